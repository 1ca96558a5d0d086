// Steady-state forced vibration of the lifted loop, the cutting-edge path it
// produces and the resulting surface location error (SLE).
#pragma once

#include "chatterlift/lifted_system.hpp"
#include "chatterlift/scenario.hpp"
#include "chatterlift/stability.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace chatterlift {

/// Δz over one tooth period, sample k at spindle angle kΘ/m. A model with only
/// the x axis reports y = 0.
struct SteadyStateVibration {
    std::vector<Eigen::Vector2d> samples;

    int steps() const { return static_cast<int>(samples.size()); }
};

struct EdgePoint {
    int tooth = 1;  // 1-based
    int index = 0;  // sample k
    double x = 0.0;
    double y = 0.0;
};

enum class SurfaceSense { Undercut, Overcut, Zero };

const char* to_string(SurfaceSense s);

struct SLEResult {
    double value = 0.0;  // m, positive means undercut
    SurfaceSense sense = SurfaceSense::Zero;
    int tooth = 1;
    int index = 0;
};

struct SLEMap {
    std::vector<double> speeds;      // rev/min
    std::vector<double> sle_values;  // m, NaN where invalid
    std::vector<bool> valid;
    std::vector<double> spectral_radius;
    double axial_depth = 0.0;
    Eigen::Vector2d feed = Eigen::Vector2d::Zero();
    /// The feed has a y component; the edge path still applies it verbatim.
    bool feed_has_y_component = false;
};

/// |SLE| below this is reported as SurfaceSense::Zero.
inline constexpr double kSleZeroTolerance = 1e-12;

/// a_p [C_L (I - A_L)^-1 B_L + D_L](r̄ - S̄ s̄), by one solve of size 2nr.
/// Throws SingularityError when I - A_L is singular (undamped structure).
SteadyStateVibration steady_state_vibration(const LiftedModel& lm, const LiftedForce& lf,
                                            double axial_depth);

/// Lifted steady state [p̄; Δz̄] as one stacked vector (the fixed point of the loop).
Eigen::VectorXd steady_state_lifted(const LiftedModel& lm, const LiftedForce& lf,
                                    double axial_depth);

std::vector<EdgePoint> edge_trajectory(const SteadyStateVibration& vib, const ToolGeometry& tool,
                                       const Eigen::Vector2d& feed, int steps);

SLEResult surface_location_error(std::span<const EdgePoint> trajectory,
                                 MillingDirection direction, double diameter);

/// SLE at the scenario's own speed, depth and feed.
SLEResult surface_location_error(const MillingScenario& scenario, const Discretization& disc);

/// SLE over `speeds` at the scenario's axial depth and feed. Speeds where the
/// closed loop is unstable (or cannot be assembled) are marked invalid.
SLEMap sle_sweep(const MillingScenario& scenario, std::span<const double> speeds,
                 const Discretization& disc, const SweepOptions& options = {});

SLEMap sle_sweep(const MillingScenario& scenario, double speed_lo, double speed_hi, int count,
                 const Discretization& disc, const SweepOptions& options = {});

/// 60 f_n / (k N) for k = 1..k_max, in rev/min.
std::vector<double> sle_critical_speeds(double natural_frequency_hz, int teeth_count, int k_max);

}  // namespace chatterlift
