// Floquet stability of the lifted closed loop: spectral radius, verdicts,
// stability-lobe grids, boundary extraction and convergence studies.
#pragma once

#include "chatterlift/lifted_system.hpp"
#include "chatterlift/scenario.hpp"

#include <Eigen/Dense>

#include <complex>
#include <span>
#include <vector>

namespace chatterlift {

enum class Classification { Stable, MarginallyStable, Unstable };

const char* to_string(Classification c);

struct SpectralRadius {
    double radius = 0.0;
    std::complex<double> dominant{0.0, 0.0};
};

struct StabilityVerdict {
    double spectral_radius = 0.0;
    Classification classification = Classification::Stable;
    std::complex<double> dominant_eigenvalue{0.0, 0.0};
};

/// Largest eigenvalue modulus of a dense real matrix and one eigenvalue attaining
/// it (ties broken by larger real part, then larger imaginary part).
///
/// Columns that are exactly zero contribute an eigenvalue 0 and are deflated
/// before the dense solve; the remaining spectrum is unchanged. This removes the
/// out-of-cut delay slots of a closed loop at no cost in accuracy.
SpectralRadius spectral_radius(const Eigen::MatrixXd& m);

/// All eigenvalues of a dense real matrix (no deflation).
Eigen::VectorXcd eigenvalues(const Eigen::MatrixXd& m);

/// Dense eigenvalue backend: "eigen", or "eigen+lapack" when large matrices go to dgeev.
const char* eigen_backend();

Classification classify(double radius, double margin = 0.0);

StabilityVerdict assess_stability(const ClosedLoopSystem& system, double margin = 0.0);

/// Stability at one (speed, depth) point of a scenario.
StabilityVerdict assess_stability(const MillingScenario& scenario, double spindle_speed,
                                  double axial_depth, const Discretization& disc,
                                  double margin = 0.0);

struct SweepOptions {
    int threads = 1;
    double margin = 0.0;
};

struct SLDGrid {
    std::vector<double> speeds;  // rev/min, ascending
    std::vector<double> depths;  // m, ascending
    Eigen::MatrixXd radius_field;  // speeds x depths, NaN where invalid
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> stable_mask;
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> valid_mask;
};

/// `count` evenly spaced values from lo to hi inclusive.
std::vector<double> linspace(double lo, double hi, int count);

SLDGrid sld_grid(const MillingScenario& scenario, std::span<const double> speeds,
                 std::span<const double> depths, const Discretization& disc,
                 const SweepOptions& options = {});

/// Range form: speeds in rev/min and depths in m, `speed_count` x `depth_count` cells.
SLDGrid sld_grid(const MillingScenario& scenario, double speed_lo, double speed_hi,
                 double depth_lo, double depth_hi, int speed_count, int depth_count,
                 const Discretization& disc, const SweepOptions& options = {});

/// Per speed column, the largest depth whose whole prefix is stable, refined by
/// linear interpolation of the spectral radius to 1 between the bracketing cells.
std::vector<double> stability_boundary(const SLDGrid& grid);

/// Same boundary as stability_boundary(sld_grid(...)), but each column stops at
/// its first non-stable cell.
std::vector<double> stability_boundary_scan(const MillingScenario& scenario,
                                            std::span<const double> speeds,
                                            std::span<const double> depths,
                                            const Discretization& disc,
                                            const SweepOptions& options = {});

struct ConvergenceRecord {
    int steps = 0;
    std::complex<double> eigenvalue{0.0, 0.0};
    double relative_error = 0.0;
};

/// Dominant eigenvalue at each step count against the IMP reference at
/// `reference_steps`, at the scenario's spindle speed and axial depth.
std::vector<ConvergenceRecord> convergence_curve(const MillingScenario& scenario,
                                                 std::span<const int> steps_list, Hold hold,
                                                 int reference_steps);

/// Same, with a precomputed reference eigenvalue.
std::vector<ConvergenceRecord> convergence_curve(const MillingScenario& scenario,
                                                 std::span<const int> steps_list, Hold hold,
                                                 std::complex<double> reference);

/// Σ|ref - est| / Σ|ref| in percent.
double relative_error(std::span<const double> reference, std::span<const double> estimate);

double normalized_time(double candidate_seconds, double baseline_seconds);

}  // namespace chatterlift
