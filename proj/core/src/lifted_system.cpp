#include "chatterlift/lifted_system.hpp"

#include "chatterlift/errors.hpp"

#include <cmath>

namespace chatterlift {

namespace {

constexpr double kMinReciprocalCondition = 1e-13;

}  // namespace

Eigen::VectorXd LiftedForce::static_forcing() const {
    Eigen::VectorXd out = r_bar;
    for (int k = 0; k < steps; ++k) {
        out.segment(k * axes, axes) -= blocks[static_cast<std::size_t>(k)] * s_bar.segment(k * axes, axes);
    }
    return out;
}

LiftedModel lift_structure(const DiscreteModel& model, int steps) {
    if (steps < 1) throw DomainError("steps must be >= 1");
    const Eigen::Index n = model.A_d.rows();
    const Eigen::Index r = model.B_d.cols();
    const Eigen::Index q = model.C_d.rows();
    const Eigen::Index m = steps;

    LiftedModel lm;
    lm.steps = steps;
    lm.hold = model.hold;
    lm.B_L.resize(n, r * m);
    lm.C_L.resize(q * m, n);
    lm.D_L = Eigen::MatrixXd::Zero(q * m, r * m);

    // Markov parameters C_d A_d^i B_d for i = 0..m-2.
    std::vector<Eigen::MatrixXd> markov(static_cast<std::size_t>(m));
    Eigen::MatrixXd power_b = model.B_d;  // A_d^i B_d
    Eigen::MatrixXd c_power = model.C_d;  // C_d A_d^i
    Eigen::MatrixXd power = Eigen::MatrixXd::Identity(n, n);
    for (Eigen::Index i = 0; i < m; ++i) {
        lm.B_L.middleCols((m - 1 - i) * r, r) = power_b;
        lm.C_L.middleRows(i * q, q) = c_power;
        markov[static_cast<std::size_t>(i)] = model.C_d * power_b;
        power_b = model.A_d * power_b;
        c_power = c_power * model.A_d;
        power = model.A_d * power;
    }
    lm.A_L = power;

    for (Eigen::Index i = 0; i < m; ++i) {
        lm.D_L.block(i * q, i * r, q, r) = model.D_d;
        for (Eigen::Index j = 0; j < i; ++j) {
            lm.D_L.block(i * q, j * r, q, r) = markov[static_cast<std::size_t>(i - j - 1)];
        }
    }
    return lm;
}

LiftedForce lift_force(const PeriodicCoefficients& coeffs, const Eigen::Vector2d& feed, int axes) {
    if (axes < 1 || axes > 2) throw DomainError("axes must be 1 or 2");
    const int m = coeffs.steps;
    LiftedForce lf;
    lf.steps = m;
    lf.axes = axes;
    lf.r_bar.resize(m * axes);
    lf.s_bar.resize(m * axes);
    lf.S_bar = Eigen::MatrixXd::Zero(m * axes, m * axes);
    lf.blocks.reserve(static_cast<std::size_t>(m));
    for (int k = 0; k < m; ++k) {
        const Eigen::MatrixXd block = coeffs.directional(k).topLeftCorner(axes, axes);
        lf.r_bar.segment(k * axes, axes) = coeffs.edge(k).head(axes);
        lf.s_bar.segment(k * axes, axes) = feed.head(axes);
        lf.S_bar.block(k * axes, k * axes, axes, axes) = block;
        lf.blocks.push_back(block);
    }
    return lf;
}

Eigen::VectorXd evaluate_lifted_force(const LiftedForce& force, double axial_depth,
                                      const Eigen::VectorXd& vibration,
                                      const Eigen::VectorXd& vibration_previous) {
    Eigen::VectorXd out(force.r_bar.size());
    const int r = force.axes;
    for (int k = 0; k < force.steps; ++k) {
        const Eigen::VectorXd u = force.s_bar.segment(k * r, r) + vibration.segment(k * r, r) -
                                  vibration_previous.segment(k * r, r);
        out.segment(k * r, r) = axial_depth * (force.r_bar.segment(k * r, r) -
                                               force.blocks[static_cast<std::size_t>(k)] * u);
    }
    return out;
}

Eigen::MatrixXd block_diagonal_left_multiply(const LiftedForce& force, const Eigen::MatrixXd& m) {
    Eigen::MatrixXd out(m.rows(), m.cols());
    const int r = force.axes;
    for (int k = 0; k < force.steps; ++k) {
        out.middleRows(k * r, r) = force.blocks[static_cast<std::size_t>(k)] * m.middleRows(k * r, r);
    }
    return out;
}

Eigen::MatrixXd block_diagonal_right_multiply(const Eigen::MatrixXd& m, const LiftedForce& force) {
    Eigen::MatrixXd out(m.rows(), m.cols());
    const int r = force.axes;
    for (int k = 0; k < force.steps; ++k) {
        out.middleCols(k * r, r) = m.middleCols(k * r, r) * force.blocks[static_cast<std::size_t>(k)];
    }
    return out;
}

ClosedLoopSystem assemble_closed_loop(const LiftedModel& structure, const LiftedForce& force,
                                      double axial_depth) {
    if (structure.steps != force.steps || structure.axes_count() != force.axes)
        throw DomainError("lifted structure and force have mismatched dimensions");
    if (!(axial_depth >= 0.0) || !std::isfinite(axial_depth))
        throw DomainError("axial depth must be >= 0");

    const double ap = axial_depth;
    const int r = force.axes;
    const Eigen::Index ns = structure.A_L.rows();
    const Eigen::Index no = structure.C_L.rows();
    const Eigen::VectorXd w = force.static_forcing();
    const Eigen::VectorXd dw = structure.D_L * w;

    // Slots with S_k = 0 (tool out of cut) make the matching columns of S̄ vanish.
    // Both perturbed-identity factors then reduce exactly to their active-slot
    // block M = I + a_p D_JJ S_J, and the inactive rows follow by substitution.
    std::vector<Eigen::Index> active, idle;
    for (int k = 0; k < force.steps; ++k) {
        const bool zero = force.blocks[static_cast<std::size_t>(k)].isZero(0.0);
        for (int a = 0; a < r; ++a) (zero ? idle : active).push_back(static_cast<Eigen::Index>(k) * r + a);
    }
    const auto nj = static_cast<Eigen::Index>(active.size());

    Eigen::MatrixXd s_j = Eigen::MatrixXd::Zero(nj, nj);
    for (Eigen::Index i = 0; i < nj; i += r) {
        const auto k = static_cast<std::size_t>(active[static_cast<std::size_t>(i)] / r);
        s_j.block(i, i, r, r) = force.blocks[k];
    }
    Eigen::MatrixXd ds_j(no, nj);  // (D̄_L S̄)_{:,J}
    for (Eigen::Index i = 0; i < nj; i += r) {
        const Eigen::Index col = active[static_cast<std::size_t>(i)];
        ds_j.middleCols(i, r) = structure.D_L.middleCols(col, r) * s_j.block(i, i, r, r);
    }
    const Eigen::MatrixXd ds_jj = ds_j(active, Eigen::all);
    Eigen::MatrixXd m = ap * ds_jj;
    m.diagonal().array() += 1.0;

    const Eigen::MatrixXd b_j = structure.B_L(Eigen::all, active);
    Eigen::MatrixXd rhs(nj, ns + nj + 1);
    rhs.leftCols(ns) = structure.C_L(active, Eigen::all);
    rhs.middleCols(ns, nj) = ap * ds_jj;
    rhs.col(ns + nj) = ap * dw(active);

    // H_J = B̄_J S_J M^-1 is the nonzero part of B̄_L (I + a_p S̄ D̄_L)^-1 S̄.
    Eigen::MatrixXd h_j;
    Eigen::MatrixXd u_j;
    if (nj > 0 && structure.hold == Hold::Imp) {
        // D̄_L is strictly block lower-triangular, so M is unit lower-triangular.
        h_j = m.transpose().triangularView<Eigen::UnitUpper>().solve((b_j * s_j).transpose()).transpose();
        u_j = m.triangularView<Eigen::UnitLower>().solve(rhs);
    } else if (nj > 0) {
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(m);
        const double rcond = lu.rcond();
        if (!(rcond > kMinReciprocalCondition)) throw ConditioningError(ap, rcond);
        Eigen::PartialPivLU<Eigen::MatrixXd> lu_t(m.transpose());
        h_j = lu_t.solve((b_j * s_j).transpose()).transpose();
        u_j = lu.solve(rhs);
    } else {
        h_j.resize(ns, 0);
        u_j.resize(0, ns + 1);
    }

    ClosedLoopSystem cl;
    cl.structural_dim = static_cast<int>(ns);
    cl.output_dim = static_cast<int>(no);
    cl.Phi = Eigen::MatrixXd::Zero(ns + no, ns + no);
    cl.sigma.resize(ns + no);

    cl.Phi.topLeftCorner(ns, ns) = structure.A_L - ap * (h_j * rhs.leftCols(ns));
    std::vector<Eigen::Index> cols_j(active.size());
    for (std::size_t i = 0; i < active.size(); ++i) cols_j[i] = ns + active[i];
    const std::vector<Eigen::Index>& rows_j = cols_j;
    const auto structural = Eigen::seqN(0, ns);
    cl.Phi(structural, cols_j) = ap * h_j;
    cl.sigma.head(ns) = ap * (structure.B_L * w - ap * (h_j * dw(active)));

    cl.Phi(rows_j, structural) = u_j.leftCols(ns);
    cl.Phi(rows_j, cols_j) = u_j.middleCols(ns, nj);
    cl.sigma(rows_j) = u_j.col(ns + nj);

    if (!idle.empty()) {
        std::vector<Eigen::Index> rows_idle(idle.size());
        for (std::size_t i = 0; i < idle.size(); ++i) rows_idle[i] = ns + idle[i];
        const Eigen::MatrixXd ds_idle = ap * ds_j(idle, Eigen::all);
        cl.Phi(rows_idle, structural) = structure.C_L(idle, Eigen::all) - ds_idle * u_j.leftCols(ns);
        cl.Phi(rows_idle, cols_j) = ds_idle - ds_idle * u_j.middleCols(ns, nj);
        cl.sigma(rows_idle) = ap * dw(idle) - ds_idle * u_j.col(ns + nj);
    }
    return cl;
}

LiftedProblem build_lifted_problem(const MillingScenario& scenario,
                                   const PeriodicCoefficients& coeffs, double spindle_speed,
                                   Hold hold) {
    const StateSpaceModel angle = to_angle_domain(scenario.structure(), spindle_speed);
    const DiscreteModel discrete = discretize(angle, coeffs.step_angle, hold);
    return {lift_structure(discrete, coeffs.steps),
            lift_force(coeffs, scenario.conditions.feed_per_tooth, scenario.axes_count())};
}

LiftedProblem build_lifted_problem(const MillingScenario& scenario, double spindle_speed,
                                   const Discretization& disc) {
    const PeriodicCoefficients coeffs = averaged_coefficients(
        scenario.coefficients, scenario.window(), scenario.tool.teeth_count, disc.steps);
    return build_lifted_problem(scenario, coeffs, spindle_speed, disc.hold);
}

}  // namespace chatterlift
