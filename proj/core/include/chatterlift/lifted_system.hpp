// Lifting of the discrete structural model and of the semi-discretized cutting
// force over one tooth-passing period, and the resulting shift-invariant
// closed loop
//
//   ξ_{K+1} = Φ ξ_K + σ,   ξ_K = [p̄_K; Δz̄_{K-1}],
//
// whose dimension is r(2n + m) for r axes, n modes per axis and m steps.
// Lifted slot k of period K holds sample index mK + k, k = 0..m-1.
#pragma once

#include "chatterlift/cutting_force.hpp"
#include "chatterlift/scenario.hpp"
#include "chatterlift/structural_dynamics.hpp"

#include <Eigen/Dense>

#include <vector>

namespace chatterlift {

struct LiftedModel {
    Eigen::MatrixXd A_L;  // A_d^m
    Eigen::MatrixXd B_L;  // [A_d^{m-1} B_d ... B_d]
    Eigen::MatrixXd C_L;  // [C_d; C_d A_d; ...; C_d A_d^{m-1}]
    Eigen::MatrixXd D_L;  // block lower-triangular Toeplitz of Markov parameters
    int steps = 0;
    Hold hold = Hold::Imp;

    int axes_count() const { return steps > 0 ? static_cast<int>(B_L.cols()) / steps : 0; }
    int state_dim() const { return static_cast<int>(A_L.rows()); }
};

struct LiftedForce {
    Eigen::VectorXd r_bar;             // stacked r_k
    Eigen::MatrixXd S_bar;             // block-diagonal, blocks S_k
    Eigen::VectorXd s_bar;             // feed repeated m times
    std::vector<Eigen::MatrixXd> blocks;  // the diagonal blocks of S_bar
    int steps = 0;
    int axes = 2;

    /// r̄ - S̄ s̄, the vibration-independent part of the lifted force per unit depth.
    Eigen::VectorXd static_forcing() const;
};

struct ClosedLoopSystem {
    Eigen::MatrixXd Phi;
    Eigen::VectorXd sigma;
    int structural_dim = 0;  // 2nr, leading block of the state
    int output_dim = 0;      // rm, trailing block of the state
};

/// Structural and force lifts for one spindle speed.
struct LiftedProblem {
    LiftedModel structure;
    LiftedForce force;
};

LiftedModel lift_structure(const DiscreteModel& model, int steps);

/// Stacks the periodic coefficients. For a single-axis model (axes = 1) the x
/// components are kept.
LiftedForce lift_force(const PeriodicCoefficients& coeffs, const Eigen::Vector2d& feed,
                       int axes = 2);

/// Evaluates f̄_K = a_p [r̄ - S̄ (s̄ + Δz̄_K - Δz̄_{K-1})].
Eigen::VectorXd evaluate_lifted_force(const LiftedForce& force, double axial_depth,
                                      const Eigen::VectorXd& vibration,
                                      const Eigen::VectorXd& vibration_previous);

ClosedLoopSystem assemble_closed_loop(const LiftedModel& structure, const LiftedForce& force,
                                      double axial_depth);

/// S̄ M and M S̄ for block-diagonal S̄ without forming dense products.
Eigen::MatrixXd block_diagonal_left_multiply(const LiftedForce& force, const Eigen::MatrixXd& m);
Eigen::MatrixXd block_diagonal_right_multiply(const Eigen::MatrixXd& m, const LiftedForce& force);

/// Angle-domain model at `spindle_speed`, discretized with step Θ/m and lifted.
LiftedProblem build_lifted_problem(const MillingScenario& scenario,
                                   const PeriodicCoefficients& coeffs, double spindle_speed,
                                   Hold hold);
LiftedProblem build_lifted_problem(const MillingScenario& scenario, double spindle_speed,
                                   const Discretization& disc);

}  // namespace chatterlift
