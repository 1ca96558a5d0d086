// Milling force geometry: immersion, tooth engagement, chip thickness and the
// periodic directional coefficients that couple vibration to cutting force.
#pragma once

#include <Eigen/Dense>

#include <vector>

namespace chatterlift {

enum class MillingDirection { Up, Down };

struct ToolGeometry {
    int teeth_count = 2;
    double diameter = 0.0;  // m
    MillingDirection direction = MillingDirection::Down;

    void validate() const;
    /// Spindle rotation between consecutive teeth, 2π/N.
    double tooth_passing_angle() const;
};

/// Linear force law coefficients, SI units.
struct CuttingCoefficients {
    double tangential_cutting = 0.0;  // N/m²
    double normal_cutting = 0.0;      // N/m²
    double tangential_edge = 0.0;     // N/m
    double normal_edge = 0.0;         // N/m

    void validate() const;
};

struct CuttingConditions {
    double axial_depth = 0.0;    // m
    double radial_depth = 0.0;   // m
    double spindle_speed = 0.0;  // rev/min
    Eigen::Vector2d feed_per_tooth = Eigen::Vector2d::Zero();  // m/tooth

    void validate(const ToolGeometry& tool) const;
};

struct ImmersionWindow {
    double start_angle = 0.0;  // rad
    double exit_angle = 0.0;   // rad
};

/// Force coefficients at one spindle angle: f = a_p (edge - directional * u).
struct DirectionalTerms {
    Eigen::Vector2d edge = Eigen::Vector2d::Zero();
    Eigen::Matrix2d directional = Eigen::Matrix2d::Zero();
};

/// Interval-averaged coefficients r_k, S_k sampled at k*step_angle, k = 0..steps-1.
struct PeriodicCoefficients {
    int steps = 0;
    double step_angle = 0.0;
    std::vector<Eigen::Vector2d> edge_terms;
    std::vector<Eigen::Matrix2d> directional_terms;

    /// Periodic access, r_k = r_{k mod m} for any integer k.
    const Eigen::Vector2d& edge(long k) const;
    const Eigen::Matrix2d& directional(long k) const;
};

/// Reduces an angle into [0, 2π).
double wrap_angle(double angle);

ImmersionWindow immersion_window(MillingDirection direction, double radial_depth,
                                 double diameter);

/// Angular position of tooth `tooth_index` (1-based) at spindle angle θ; not reduced.
double tooth_angle(double spindle_angle, int tooth_index, int teeth_count);

/// Switching function g: true iff the reduced tooth angle lies in [φ_st, φ_ex].
bool engagement(double tooth_angle, const ImmersionWindow& window);

/// Maps tangential/normal components into the fixed xy frame.
Eigen::Matrix2d rotation_matrix(double tooth_angle);

double chip_thickness(double tooth_angle, const Eigen::Vector2d& feed,
                      const Eigen::Vector2d& vibration,
                      const Eigen::Vector2d& vibration_delayed);

/// Force on one tooth in the xy frame, assembled from rotation, chip thickness
/// and the linear force law. Zero when the tooth is out of cut.
Eigen::Vector2d tooth_force(double tooth_angle, const CuttingCoefficients& coeffs,
                            const ImmersionWindow& window, double axial_depth,
                            const Eigen::Vector2d& feed, const Eigen::Vector2d& vibration,
                            const Eigen::Vector2d& vibration_delayed);

/// Total force at spindle angle θ summed tooth by tooth.
Eigen::Vector2d milling_force(double spindle_angle, const CuttingCoefficients& coeffs,
                              const ImmersionWindow& window, int teeth_count,
                              double axial_depth, const Eigen::Vector2d& feed,
                              const Eigen::Vector2d& vibration,
                              const Eigen::Vector2d& vibration_delayed);

DirectionalTerms directional_coefficients(double spindle_angle,
                                          const CuttingCoefficients& coeffs,
                                          const ImmersionWindow& window, int teeth_count);

/// Mean of the directional terms over [from, to]. Engagement switches inside the
/// interval are used as quadrature breakpoints.
DirectionalTerms interval_average(double from, double to, const CuttingCoefficients& coeffs,
                                  const ImmersionWindow& window, int teeth_count);

/// Centered interval averages over one tooth-passing angle split into `steps` intervals.
PeriodicCoefficients averaged_coefficients(const CuttingCoefficients& coeffs,
                                           const ImmersionWindow& window, int teeth_count,
                                           int steps);

}  // namespace chatterlift
