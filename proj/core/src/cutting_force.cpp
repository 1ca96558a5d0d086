#include "chatterlift/cutting_force.hpp"

#include "chatterlift/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace chatterlift {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Simpson panels per smooth piece of an averaging interval.
constexpr int kQuadraturePanels = 32;

long positive_mod(long k, long m) {
    const long r = k % m;
    return r < 0 ? r + m : r;
}

// Adds the contribution of one engaged tooth at angle φ.
void accumulate_tooth(double phi, const CuttingCoefficients& c, DirectionalTerms& out) {
    const double s = std::sin(phi);
    const double co = std::cos(phi);
    const double s2 = std::sin(2.0 * phi);
    const double c2 = std::cos(2.0 * phi);
    const double kct = c.tangential_cutting;
    const double kcn = c.normal_cutting;
    const double ket = c.tangential_edge;
    const double ken = c.normal_edge;

    out.edge(0) -= ket * co + ken * s;
    out.edge(1) += ket * s - ken * co;

    out.directional(0, 0) += 0.5 * (kct * s2 + kcn * (1.0 - c2));
    out.directional(0, 1) += 0.5 * (kct * (1.0 + c2) + kcn * s2);
    out.directional(1, 0) += 0.5 * (-kct * (1.0 - c2) + kcn * s2);
    out.directional(1, 1) += 0.5 * (-kct * s2 + kcn * (1.0 + c2));
}

// Directional terms with the engagement pattern frozen, so that a smooth piece
// between switches can be integrated without evaluating g at its endpoints.
DirectionalTerms terms_with_mask(double theta, const CuttingCoefficients& c,
                                 const std::vector<char>& engaged, int teeth_count) {
    DirectionalTerms out;
    for (int j = 1; j <= teeth_count; ++j) {
        if (engaged[j - 1]) accumulate_tooth(tooth_angle(theta, j, teeth_count), c, out);
    }
    return out;
}

}  // namespace

void ToolGeometry::validate() const {
    if (teeth_count < 1) throw DomainError("teeth_count must be >= 1");
    if (!(diameter > 0.0) || !std::isfinite(diameter))
        throw DomainError("diameter must be finite and > 0");
}

double ToolGeometry::tooth_passing_angle() const { return kTwoPi / teeth_count; }

void CuttingCoefficients::validate() const {
    for (double v : {tangential_cutting, normal_cutting, tangential_edge, normal_edge}) {
        if (!std::isfinite(v)) throw DomainError("cutting coefficients must be finite");
    }
    if (!(tangential_cutting > 0.0)) throw DomainError("tangential cutting coefficient must be > 0");
    if (!(normal_cutting > 0.0)) throw DomainError("normal cutting coefficient must be > 0");
}

void CuttingConditions::validate(const ToolGeometry& tool) const {
    if (!(axial_depth >= 0.0) || !std::isfinite(axial_depth))
        throw DomainError("axial_depth must be >= 0");
    if (!(radial_depth >= 0.0) || radial_depth > tool.diameter)
        throw DomainError("radial_depth must lie in [0, diameter]");
    if (!(spindle_speed > 0.0) || !std::isfinite(spindle_speed))
        throw DomainError("spindle_speed must be > 0");
    if (!feed_per_tooth.allFinite()) throw DomainError("feed_per_tooth must be finite");
}

const Eigen::Vector2d& PeriodicCoefficients::edge(long k) const {
    return edge_terms[static_cast<std::size_t>(positive_mod(k, steps))];
}

const Eigen::Matrix2d& PeriodicCoefficients::directional(long k) const {
    return directional_terms[static_cast<std::size_t>(positive_mod(k, steps))];
}

double wrap_angle(double angle) {
    double r = std::fmod(angle, kTwoPi);
    if (r < 0.0) r += kTwoPi;
    // fmod of a tiny negative number can round up to exactly 2π
    if (r >= kTwoPi) r = 0.0;
    return r;
}

ImmersionWindow immersion_window(MillingDirection direction, double radial_depth,
                                 double diameter) {
    if (!(diameter > 0.0)) throw DomainError("diameter must be > 0");
    if (!(radial_depth >= 0.0) || radial_depth > diameter)
        throw DomainError("radial_depth " + std::to_string(radial_depth) +
                          " outside [0, " + std::to_string(diameter) + "]");
    const double ratio = radial_depth / diameter;
    if (direction == MillingDirection::Up) {
        return {0.0, std::acos(std::clamp(1.0 - 2.0 * ratio, -1.0, 1.0))};
    }
    return {std::acos(std::clamp(2.0 * ratio - 1.0, -1.0, 1.0)), std::numbers::pi};
}

double tooth_angle(double spindle_angle, int tooth_index, int teeth_count) {
    if (teeth_count < 1) throw DomainError("teeth_count must be >= 1");
    if (tooth_index < 1 || tooth_index > teeth_count)
        throw DomainError("tooth index " + std::to_string(tooth_index) + " outside [1, " +
                          std::to_string(teeth_count) + "]");
    return spindle_angle + kTwoPi / teeth_count * (tooth_index - 1);
}

bool engagement(double tooth_angle, const ImmersionWindow& window) {
    const double phi = wrap_angle(tooth_angle);
    return window.start_angle <= phi && phi <= window.exit_angle;
}

Eigen::Matrix2d rotation_matrix(double tooth_angle) {
    const double c = std::cos(tooth_angle);
    const double s = std::sin(tooth_angle);
    Eigen::Matrix2d r;
    r << -c, -s, s, -c;
    return r;
}

double chip_thickness(double tooth_angle, const Eigen::Vector2d& feed,
                      const Eigen::Vector2d& vibration,
                      const Eigen::Vector2d& vibration_delayed) {
    const Eigen::Vector2d u = feed + vibration - vibration_delayed;
    // R⁻¹ = Rᵀ
    const Eigen::Vector2d local = rotation_matrix(tooth_angle).transpose() * u;
    return -local(1);
}

Eigen::Vector2d tooth_force(double tooth_angle, const CuttingCoefficients& coeffs,
                            const ImmersionWindow& window, double axial_depth,
                            const Eigen::Vector2d& feed, const Eigen::Vector2d& vibration,
                            const Eigen::Vector2d& vibration_delayed) {
    if (!engagement(tooth_angle, window)) return Eigen::Vector2d::Zero();
    const double h = chip_thickness(tooth_angle, feed, vibration, vibration_delayed);
    const Eigen::Vector2d tn{coeffs.tangential_cutting * h + coeffs.tangential_edge,
                             coeffs.normal_cutting * h + coeffs.normal_edge};
    return rotation_matrix(tooth_angle) * (axial_depth * tn);
}

Eigen::Vector2d milling_force(double spindle_angle, const CuttingCoefficients& coeffs,
                              const ImmersionWindow& window, int teeth_count,
                              double axial_depth, const Eigen::Vector2d& feed,
                              const Eigen::Vector2d& vibration,
                              const Eigen::Vector2d& vibration_delayed) {
    Eigen::Vector2d total = Eigen::Vector2d::Zero();
    for (int j = 1; j <= teeth_count; ++j) {
        total += tooth_force(tooth_angle(spindle_angle, j, teeth_count), coeffs, window,
                             axial_depth, feed, vibration, vibration_delayed);
    }
    return total;
}

DirectionalTerms directional_coefficients(double spindle_angle,
                                          const CuttingCoefficients& coeffs,
                                          const ImmersionWindow& window, int teeth_count) {
    DirectionalTerms out;
    for (int j = 1; j <= teeth_count; ++j) {
        const double phi = tooth_angle(spindle_angle, j, teeth_count);
        if (engagement(phi, window)) accumulate_tooth(phi, coeffs, out);
    }
    return out;
}

DirectionalTerms interval_average(double from, double to, const CuttingCoefficients& coeffs,
                                  const ImmersionWindow& window, int teeth_count) {
    if (!(to > from)) throw DomainError("averaging interval must have positive length");

    // Spindle angles inside (from, to) where some tooth crosses φ_st or φ_ex.
    std::vector<double> cuts{from, to};
    const double spacing = kTwoPi / teeth_count;
    for (int j = 0; j < teeth_count; ++j) {
        for (double boundary : {window.start_angle, window.exit_angle}) {
            const double base = boundary - spacing * j;
            const long q_lo = static_cast<long>(std::ceil((from - base) / kTwoPi));
            const long q_hi = static_cast<long>(std::floor((to - base) / kTwoPi));
            for (long q = q_lo; q <= q_hi; ++q) {
                const double t = base + kTwoPi * static_cast<double>(q);
                if (t > from && t < to) cuts.push_back(t);
            }
        }
    }
    std::sort(cuts.begin(), cuts.end());

    DirectionalTerms sum;
    std::vector<char> engaged(static_cast<std::size_t>(teeth_count));
    for (std::size_t p = 0; p + 1 < cuts.size(); ++p) {
        const double a = cuts[p];
        const double b = cuts[p + 1];
        if (!(b > a)) continue;
        const double mid = 0.5 * (a + b);
        bool any = false;
        for (int j = 1; j <= teeth_count; ++j) {
            engaged[j - 1] = engagement(tooth_angle(mid, j, teeth_count), window) ? 1 : 0;
            any = any || engaged[j - 1];
        }
        if (!any) continue;

        // composite Simpson on the smooth piece
        const double h = (b - a) / kQuadraturePanels;
        DirectionalTerms piece;
        for (int i = 0; i <= kQuadraturePanels; ++i) {
            const double w = (i == 0 || i == kQuadraturePanels) ? 1.0 : (i % 2 ? 4.0 : 2.0);
            const DirectionalTerms t = terms_with_mask(a + h * i, coeffs, engaged, teeth_count);
            piece.edge += w * t.edge;
            piece.directional += w * t.directional;
        }
        sum.edge += piece.edge * (h / 3.0);
        sum.directional += piece.directional * (h / 3.0);
    }
    const double length = to - from;
    sum.edge /= length;
    sum.directional /= length;
    return sum;
}

PeriodicCoefficients averaged_coefficients(const CuttingCoefficients& coeffs,
                                           const ImmersionWindow& window, int teeth_count,
                                           int steps) {
    if (steps < 1) throw DomainError("steps must be >= 1");
    if (teeth_count < 1) throw DomainError("teeth_count must be >= 1");
    PeriodicCoefficients pc;
    pc.steps = steps;
    pc.step_angle = kTwoPi / teeth_count / steps;
    pc.edge_terms.reserve(static_cast<std::size_t>(steps));
    pc.directional_terms.reserve(static_cast<std::size_t>(steps));
    for (int k = 0; k < steps; ++k) {
        const double center = k * pc.step_angle;
        const DirectionalTerms t =
            interval_average(center - 0.5 * pc.step_angle, center + 0.5 * pc.step_angle,
                             coeffs, window, teeth_count);
        pc.edge_terms.push_back(t.edge);
        pc.directional_terms.push_back(t.directional);
    }
    return pc;
}

}  // namespace chatterlift
