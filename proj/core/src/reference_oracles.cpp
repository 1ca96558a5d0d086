#include "chatterlift/reference_oracles.hpp"

#include "chatterlift/errors.hpp"

#include <charconv>
#include <cmath>
#include <ostream>

namespace chatterlift {

namespace {

constexpr int kMinSubsteps = 500;
constexpr double kMinReciprocalCondition = 1e-13;

Eigen::Vector2d to_plane(const Eigen::VectorXd& v) {
    Eigen::Vector2d out = Eigen::Vector2d::Zero();
    for (Eigen::Index a = 0; a < std::min<Eigen::Index>(v.size(), 2); ++a) out(a) = v(a);
    return out;
}

std::string format_number(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 12);
    return std::string(buf, res.ptr);
}

}  // namespace

DDESystem build_dde(const MillingScenario& scenario) {
    scenario.validate();
    const StateSpaceModel model =
        to_angle_domain(scenario.structure(), scenario.conditions.spindle_speed);
    const int r = scenario.axes_count();
    const ImmersionWindow window = scenario.window();
    const CuttingCoefficients coeffs = scenario.coefficients;
    const int teeth = scenario.tool.teeth_count;
    const double ap = scenario.conditions.axial_depth;
    const Eigen::VectorXd feed = scenario.conditions.feed_per_tooth.head(r);

    DDESystem sys;
    sys.A = model.A;
    sys.B = model.B;
    sys.C = model.C;
    sys.delay = scenario.tool.tooth_passing_angle();
    sys.axial_depth = ap;
    const Eigen::MatrixXd b = model.B;
    const Eigen::MatrixXd c = model.C;
    sys.coupling = [=](double theta) -> Eigen::MatrixXd {
        const DirectionalTerms t = directional_coefficients(theta, coeffs, window, teeth);
        return ap * (b * (t.directional.topLeftCorner(r, r) * c));
    };
    sys.forcing = [=](double theta) -> Eigen::VectorXd {
        const DirectionalTerms t = directional_coefficients(theta, coeffs, window, teeth);
        return ap * (b * (t.edge.head(r) - t.directional.topLeftCorner(r, r) * feed));
    };
    return sys;
}

double DDETrajectory::period_amplitude(int p) const {
    if (p < 0 || p >= periods()) throw DomainError("period index out of range");
    double amp = 0.0;
    for (int i = p * substeps; i <= (p + 1) * substeps; ++i)
        amp = std::max(amp, outputs[static_cast<std::size_t>(i)].cwiseAbs().maxCoeff());
    return amp;
}

std::vector<Eigen::Vector2d> DDETrajectory::period_samples(int p, int steps) const {
    if (p < 0 || p >= periods()) throw DomainError("period index out of range");
    if (steps < 1 || substeps % steps != 0)
        throw DomainError("steps must divide the substep count");
    const int stride = substeps / steps;
    std::vector<Eigen::Vector2d> out;
    out.reserve(static_cast<std::size_t>(steps));
    for (int k = 0; k < steps; ++k)
        out.push_back(outputs[static_cast<std::size_t>(p * substeps + k * stride)]);
    return out;
}

DDETrajectory simulate_dde(const DDESystem& sys, const SimulationOptions& options) {
    if (options.substeps < kMinSubsteps)
        throw DomainError("simulate_dde needs at least " + std::to_string(kMinSubsteps) +
                          " substeps per period");
    if (options.periods < 1) throw DomainError("periods must be >= 1");
    if (!(sys.delay > 0.0)) throw DomainError("delay must be positive");

    const int n = sys.state_dim();
    const int m = options.substeps;
    const double h = sys.delay / m;
    const long total = static_cast<long>(options.periods) * m;

    DDETrajectory traj;
    traj.substeps = m;
    traj.step_angle = h;
    traj.theta.reserve(static_cast<std::size_t>(total + 1));
    traj.states.reserve(static_cast<std::size_t>(total + 1));
    traj.outputs.reserve(static_cast<std::size_t>(total + 1));

    Eigen::VectorXd q = Eigen::VectorXd::Zero(n);
    for (int a = 0; a < sys.axes_count() && a < 2; ++a) {
        const double count = sys.C.row(a).sum();
        for (int i = 0; i < n; ++i)
            if (sys.C(a, i) != 0.0) q(i) = options.initial_displacement(a) / count;
    }
    traj.theta.push_back(0.0);
    traj.states.push_back(q);
    traj.outputs.push_back(to_plane(sys.C * q));

    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(n);
    auto stored = [&](long j) -> const Eigen::VectorXd& {
        return j < 0 ? zero : traj.states[static_cast<std::size_t>(j)];
    };
    auto rhs = [&](double theta, const Eigen::VectorXd& x, const Eigen::VectorXd& delayed) {
        Eigen::VectorXd dx = sys.A * x - sys.coupling(theta) * (x - delayed);
        if (options.include_forcing) dx += sys.forcing(theta);
        return dx;
    };

    for (long step = 0; step < total; ++step) {
        const double theta = step * h;
        const long base = step - m;
        const Eigen::VectorXd& d0 = stored(base);
        const Eigen::VectorXd& d1 = stored(base + 1);
        const Eigen::VectorXd dh =
            (9.0 / 16.0) * (d0 + d1) - (1.0 / 16.0) * (stored(base - 1) + stored(base + 2));

        const Eigen::VectorXd k1 = rhs(theta, q, d0);
        const Eigen::VectorXd k2 = rhs(theta + 0.5 * h, q + 0.5 * h * k1, dh);
        const Eigen::VectorXd k3 = rhs(theta + 0.5 * h, q + 0.5 * h * k2, dh);
        const Eigen::VectorXd k4 = rhs(theta + h, q + h * k3, d1);
        q += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!q.allFinite()) throw DivergenceError(static_cast<int>(step / m));

        traj.theta.push_back((step + 1) * h);
        traj.states.push_back(q);
        traj.outputs.push_back(to_plane(sys.C * q));
    }
    return traj;
}

void write_trajectory_csv(std::ostream& os, const DDETrajectory& traj) {
    os << "period_index,theta_rad,x_m,y_m\n";
    for (std::size_t i = 0; i < traj.theta.size(); ++i) {
        const long period = traj.substeps > 0 ? static_cast<long>(i) / traj.substeps : 0;
        os << period << ',' << format_number(traj.theta[i]) << ','
           << format_number(traj.outputs[i].x()) << ',' << format_number(traj.outputs[i].y())
           << '\n';
    }
}

ClassicalMonodromy classical_sdm(const MillingScenario& scenario, int steps) {
    if (steps < 1) throw DomainError("steps must be >= 1");
    scenario.validate();
    const StateSpaceModel model =
        to_angle_domain(scenario.structure(), scenario.conditions.spindle_speed);
    const int r = scenario.axes_count();
    const int ns = model.state_dim();
    const int m = steps;
    const int na = ns * (m + 1);
    const double dtheta = scenario.tool.tooth_passing_angle() / m;
    const double ap = scenario.conditions.axial_depth;
    const ImmersionWindow window = scenario.window();
    const Eigen::VectorXd feed = scenario.conditions.feed_per_tooth.head(r);

    ClassicalMonodromy cm;
    cm.steps = m;
    cm.state_dim = ns;
    cm.C = model.C;
    cm.Phi_a = Eigen::MatrixXd::Identity(na, na);
    cm.sigma_a = Eigen::VectorXd::Zero(na);

    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(ns, ns);
    Eigen::MatrixXd van_loan = Eigen::MatrixXd::Zero(3 * ns, 3 * ns);
    for (int i = 0; i < m; ++i) {
        // Piecewise-constant coefficients on [θ_i, θ_{i+1}], delayed state linear
        // between q_{i-m} and q_{i-m+1}.
        const DirectionalTerms t = interval_average(i * dtheta, (i + 1) * dtheta,
                                                    scenario.coefficients, window,
                                                    scenario.tool.teeth_count);
        const Eigen::MatrixXd s = t.directional.topLeftCorner(r, r);
        const Eigen::MatrixXd bi = ap * (model.B * s * model.C);
        const Eigen::VectorXd wi = ap * (model.B * (t.edge.head(r) - s * feed));

        van_loan.topLeftCorner(ns, ns) = (model.A - bi) * dtheta;
        van_loan.block(0, ns, ns, ns) = dtheta * eye;
        van_loan.block(ns, 2 * ns, ns, ns) = eye;
        const Eigen::MatrixXd e = matrix_exponential(van_loan);
        const Eigen::MatrixXd p = e.topLeftCorner(ns, ns);
        const Eigen::MatrixXd r0 = e.block(0, ns, ns, ns);
        const Eigen::MatrixXd r1 = e.block(0, 2 * ns, ns, ns);
        const Eigen::MatrixXd near = r1 * bi;         // weight of q_{i-m+1}
        const Eigen::MatrixXd far = (r0 - r1) * bi;   // weight of q_{i-m}

        const Eigen::MatrixXd top = p * cm.Phi_a.topRows(ns) +
                                    near * cm.Phi_a.middleRows((m - 1) * ns, ns) +
                                    far * cm.Phi_a.middleRows(m * ns, ns);
        const Eigen::VectorXd top_sigma = p * cm.sigma_a.head(ns) +
                                          near * cm.sigma_a.segment((m - 1) * ns, ns) +
                                          far * cm.sigma_a.segment(m * ns, ns) + r0 * wi;
        for (int j = m; j >= 1; --j) {
            cm.Phi_a.middleRows(j * ns, ns) = cm.Phi_a.middleRows((j - 1) * ns, ns);
            cm.sigma_a.segment(j * ns, ns) = cm.sigma_a.segment((j - 1) * ns, ns);
        }
        cm.Phi_a.topRows(ns) = top;
        cm.sigma_a.head(ns) = top_sigma;
    }
    return cm;
}

std::vector<Eigen::Vector2d> classical_steady_state(const ClassicalMonodromy& cm) {
    Eigen::MatrixXd i_minus_phi = -cm.Phi_a;
    i_minus_phi.diagonal().array() += 1.0;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(i_minus_phi);
    if (!(lu.rcond() > kMinReciprocalCondition))
        throw SingularityError("I - Phi_a is singular: the loop is marginally stable");
    const Eigen::VectorXd xi = lu.solve(cm.sigma_a);

    // ξ = [q_0; q_{-1}; ...; q_{-m}] and q_{-j} = q_{m-j} by periodicity.
    const int ns = cm.state_dim;
    std::vector<Eigen::Vector2d> out;
    out.reserve(static_cast<std::size_t>(cm.steps));
    for (int k = 0; k < cm.steps; ++k) {
        const int block = k == 0 ? 0 : cm.steps - k;
        out.push_back(to_plane(cm.C * xi.segment(block * ns, ns)));
    }
    return out;
}

}  // namespace chatterlift
