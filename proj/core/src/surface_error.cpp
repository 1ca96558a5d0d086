#include "chatterlift/surface_error.hpp"

#include "chatterlift/errors.hpp"
#include "chatterlift/parallel.hpp"

#include <cmath>
#include <limits>

namespace chatterlift {

namespace {

constexpr double kMinReciprocalCondition = 1e-13;

struct SteadySolution {
    Eigen::VectorXd state;      // p̄
    Eigen::VectorXd vibration;  // Δz̄
};

SteadySolution solve_steady_state(const LiftedModel& lm, const LiftedForce& lf,
                                  double axial_depth) {
    if (lm.steps != lf.steps || lm.axes_count() != lf.axes)
        throw DomainError("lifted structure and force have mismatched dimensions");
    if (!(axial_depth >= 0.0) || !std::isfinite(axial_depth))
        throw DomainError("axial depth must be >= 0");
    const Eigen::VectorXd w = lf.static_forcing();
    Eigen::MatrixXd i_minus_a = -lm.A_L;
    i_minus_a.diagonal().array() += 1.0;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(i_minus_a);
    if (!(lu.rcond() > kMinReciprocalCondition))
        throw SingularityError("I - A_L is singular: the structure has an undamped or marginal mode");
    SteadySolution s;
    s.state = axial_depth * lu.solve(lm.B_L * w);
    s.vibration = lm.C_L * s.state + axial_depth * (lm.D_L * w);
    return s;
}

}  // namespace

const char* to_string(SurfaceSense s) {
    switch (s) {
        case SurfaceSense::Undercut: return "undercut";
        case SurfaceSense::Overcut: return "overcut";
        case SurfaceSense::Zero: return "zero";
    }
    return "?";
}

SteadyStateVibration steady_state_vibration(const LiftedModel& lm, const LiftedForce& lf,
                                            double axial_depth) {
    const SteadySolution s = solve_steady_state(lm, lf, axial_depth);
    const int r = lf.axes;
    SteadyStateVibration out;
    out.samples.resize(static_cast<std::size_t>(lm.steps), Eigen::Vector2d::Zero());
    for (int k = 0; k < lm.steps; ++k) {
        for (int a = 0; a < r; ++a) out.samples[static_cast<std::size_t>(k)](a) = s.vibration(k * r + a);
    }
    return out;
}

Eigen::VectorXd steady_state_lifted(const LiftedModel& lm, const LiftedForce& lf,
                                    double axial_depth) {
    const SteadySolution s = solve_steady_state(lm, lf, axial_depth);
    Eigen::VectorXd out(s.state.size() + s.vibration.size());
    out << s.state, s.vibration;
    return out;
}

std::vector<EdgePoint> edge_trajectory(const SteadyStateVibration& vib, const ToolGeometry& tool,
                                       const Eigen::Vector2d& feed, int steps) {
    tool.validate();
    if (steps < 1 || vib.steps() != steps)
        throw DomainError("vibration must hold exactly `steps` samples");
    const double step_angle = tool.tooth_passing_angle() / steps;
    const double radius = 0.5 * tool.diameter;
    std::vector<EdgePoint> out;
    out.reserve(static_cast<std::size_t>(steps * tool.teeth_count));
    for (int j = 1; j <= tool.teeth_count; ++j) {
        for (int k = 0; k < steps; ++k) {
            const double phi = tooth_angle(k * step_angle, j, tool.teeth_count);
            const Eigen::Vector2d p = vib.samples[static_cast<std::size_t>(k)] +
                                      radius * Eigen::Vector2d(std::sin(phi), std::cos(phi)) +
                                      (static_cast<double>(k) / steps) * feed;
            out.push_back({j, k, p.x(), p.y()});
        }
    }
    return out;
}

SLEResult surface_location_error(std::span<const EdgePoint> trajectory,
                                 MillingDirection direction, double diameter) {
    if (trajectory.empty()) throw DomainError("trajectory must not be empty");
    const EdgePoint* top = &trajectory.front();
    for (const EdgePoint& p : trajectory)
        if (p.y > top->y) top = &p;
    const double gap = 0.5 * diameter - top->y;
    SLEResult res;
    res.value = direction == MillingDirection::Up ? gap : -gap;
    res.tooth = top->tooth;
    res.index = top->index;
    if (std::abs(res.value) < kSleZeroTolerance) {
        res.sense = SurfaceSense::Zero;
    } else {
        res.sense = res.value > 0.0 ? SurfaceSense::Undercut : SurfaceSense::Overcut;
    }
    return res;
}

SLEResult surface_location_error(const MillingScenario& scenario, const Discretization& disc) {
    scenario.validate();
    const LiftedProblem p = build_lifted_problem(scenario, scenario.conditions.spindle_speed, disc);
    const SteadyStateVibration vib =
        steady_state_vibration(p.structure, p.force, scenario.conditions.axial_depth);
    const std::vector<EdgePoint> path =
        edge_trajectory(vib, scenario.tool, scenario.conditions.feed_per_tooth, disc.steps);
    return surface_location_error(path, scenario.tool.direction, scenario.tool.diameter);
}

SLEMap sle_sweep(const MillingScenario& scenario, std::span<const double> speeds,
                 const Discretization& disc, const SweepOptions& options) {
    scenario.validate();
    if (disc.steps < 1) throw DomainError("steps must be >= 1");
    for (double s : speeds)
        if (!(s > 0.0) || !std::isfinite(s)) throw DomainError("speeds must be positive");
    const PeriodicCoefficients coeffs = averaged_coefficients(
        scenario.coefficients, scenario.window(), scenario.tool.teeth_count, disc.steps);
    const double ap = scenario.conditions.axial_depth;
    const Eigen::Vector2d feed = scenario.conditions.feed_per_tooth;

    SLEMap map;
    map.speeds.assign(speeds.begin(), speeds.end());
    map.axial_depth = ap;
    map.feed = feed;
    map.feed_has_y_component = feed.y() != 0.0;
    const std::size_t n = speeds.size();
    map.sle_values.assign(n, std::numeric_limits<double>::quiet_NaN());
    map.spectral_radius.assign(n, std::numeric_limits<double>::quiet_NaN());
    // std::vector<bool> packs bits, so stage validity in bytes for concurrent writes.
    std::vector<char> valid(n, 0);

    parallel_for(static_cast<int>(n), options.threads, [&](int i) {
        const auto idx = static_cast<std::size_t>(i);
        try {
            const LiftedProblem p = build_lifted_problem(scenario, coeffs, speeds[idx], disc.hold);
            const double rho =
                spectral_radius(assemble_closed_loop(p.structure, p.force, ap).Phi).radius;
            map.spectral_radius[idx] = rho;
            if (classify(rho, options.margin) == Classification::Unstable) return;
            const SteadyStateVibration vib = steady_state_vibration(p.structure, p.force, ap);
            const std::vector<EdgePoint> path = edge_trajectory(vib, scenario.tool, feed, disc.steps);
            map.sle_values[idx] =
                surface_location_error(path, scenario.tool.direction, scenario.tool.diameter).value;
            valid[idx] = 1;
        } catch (const std::exception&) {
            // left invalid
        }
    });
    map.valid.assign(valid.begin(), valid.end());
    return map;
}

SLEMap sle_sweep(const MillingScenario& scenario, double speed_lo, double speed_hi, int count,
                 const Discretization& disc, const SweepOptions& options) {
    if (!(speed_lo > 0.0) || !(speed_hi >= speed_lo))
        throw DomainError("speed range must be positive and ordered");
    const std::vector<double> speeds = linspace(speed_lo, speed_hi, count);
    return sle_sweep(scenario, speeds, disc, options);
}

std::vector<double> sle_critical_speeds(double natural_frequency_hz, int teeth_count, int k_max) {
    if (k_max < 1) throw DomainError("k_max must be >= 1");
    if (teeth_count < 1) throw DomainError("teeth_count must be >= 1");
    if (!(natural_frequency_hz > 0.0)) throw DomainError("natural frequency must be positive");
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(k_max));
    for (int k = 1; k <= k_max; ++k) out.push_back(60.0 * natural_frequency_hz / (k * teeth_count));
    return out;
}

}  // namespace chatterlift
