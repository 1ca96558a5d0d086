// Brute-force reference solvers used to validate the lifted formulation:
// a fixed-step time-marching simulator of the delay equation and the classical
// first-order semi-discretization monodromy.
#pragma once

#include "chatterlift/scenario.hpp"

#include <Eigen/Dense>

#include <functional>
#include <iosfwd>
#include <vector>

namespace chatterlift {

/// q' = A q - B_p(θ) (q - q(θ - Θ)) + w(θ) in the angle domain, with
/// B_p = a_p B S(θ) C and w = a_p B [r(θ) - S(θ) s].
struct DDESystem {
    Eigen::MatrixXd A;
    Eigen::MatrixXd B;
    Eigen::MatrixXd C;
    double delay = 0.0;  // Θ, rad
    double axial_depth = 0.0;
    std::function<Eigen::MatrixXd(double)> coupling;  // B_p(θ)
    std::function<Eigen::VectorXd(double)> forcing;   // w(θ)

    int state_dim() const { return static_cast<int>(A.rows()); }
    int axes_count() const { return static_cast<int>(C.rows()); }
};

DDESystem build_dde(const MillingScenario& scenario);

struct SimulationOptions {
    int periods = 50;
    int substeps = 1000;  // per tooth period, at least 500
    /// Initial displacement per axis, shared equally by that axis's modes.
    /// History before θ = 0 is zero.
    Eigen::Vector2d initial_displacement = Eigen::Vector2d::Constant(1e-6);
    /// Drop w(θ) to observe the homogeneous (growth/decay) response only.
    bool include_forcing = true;
};

struct DDETrajectory {
    int substeps = 0;
    double step_angle = 0.0;
    std::vector<double> theta;
    std::vector<Eigen::VectorXd> states;
    std::vector<Eigen::Vector2d> outputs;  // Δz, y = 0 for one axis

    int periods() const { return substeps > 0 ? static_cast<int>(theta.size() - 1) / substeps : 0; }
    /// Largest |Δz| component over samples of period `p` (0-based).
    double period_amplitude(int p) const;
    /// m equally spaced outputs of period `p`, sample k at θ = (p + k/m)Θ.
    std::vector<Eigen::Vector2d> period_samples(int p, int steps) const;
};

/// Fixed-step RK4 with the delayed output interpolated by a cubic through four
/// stored samples. Throws DivergenceError when the state stops being finite.
DDETrajectory simulate_dde(const DDESystem& system, const SimulationOptions& options = {});

/// Columns: period_index, theta_rad, x_m, y_m.
void write_trajectory_csv(std::ostream& os, const DDETrajectory& trajectory);

/// ξ_{i+m} = Φ_a ξ_i + σ_a over one period with ξ_i = [q_i; q_{i-1}; ...; q_{i-m}].
struct ClassicalMonodromy {
    Eigen::MatrixXd Phi_a;
    Eigen::VectorXd sigma_a;
    Eigen::MatrixXd C;
    int steps = 0;
    int state_dim = 0;
};

ClassicalMonodromy classical_sdm(const MillingScenario& scenario, int steps);

/// Output samples Δz_k, k = 0..m-1, of the fixed point (I - Φ_a)^-1 σ_a.
std::vector<Eigen::Vector2d> classical_steady_state(const ClassicalMonodromy& cm);

}  // namespace chatterlift
