#include "chatterlift/stability.hpp"

#include "chatterlift/errors.hpp"
#include "chatterlift/parallel.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#ifdef CHATTERLIFT_HAVE_LAPACK
extern "C" void dgeev_(const char* jobvl, const char* jobvr, const int* n, double* a,
                       const int* lda, double* wr, double* wi, double* vl, const int* ldvl,
                       double* vr, const int* ldvr, double* work, const int* lwork, int* info,
                       std::size_t jobvl_len, std::size_t jobvr_len);
#endif

namespace chatterlift {

namespace {

constexpr double kTieTolerance = 1e-12;

Eigen::VectorXcd eigen_eigenvalues(const Eigen::MatrixXd& m) {
    Eigen::EigenSolver<Eigen::MatrixXd> solver(m, false);
    if (solver.info() != Eigen::Success)
        throw NumericalError("eigenvalue iteration did not converge");
    return solver.eigenvalues();
}

#ifdef CHATTERLIFT_HAVE_LAPACK
// Below this size Eigen's solver is faster than reference LAPACK on unblocked BLAS.
constexpr Eigen::Index kLapackMinDim = 640;

Eigen::VectorXcd lapack_eigenvalues(const Eigen::MatrixXd& m) {
    const Eigen::Index n = m.rows();
    Eigen::MatrixXd a = m;
    const int dim = static_cast<int>(n);
    Eigen::VectorXd wr(n), wi(n);
    double dummy = 0.0;
    const int ldv = 1;
    int info = 0;
    int lwork = -1;
    double query = 0.0;
    dgeev_("N", "N", &dim, a.data(), &dim, wr.data(), wi.data(), &dummy, &ldv, &dummy, &ldv,
           &query, &lwork, &info, 1, 1);
    lwork = std::max(static_cast<int>(query), 4 * dim);
    std::vector<double> work(static_cast<std::size_t>(lwork));
    dgeev_("N", "N", &dim, a.data(), &dim, wr.data(), wi.data(), &dummy, &ldv, &dummy, &ldv,
           work.data(), &lwork, &info, 1, 1);
    if (info != 0)
        throw NumericalError("eigenvalue iteration did not converge (dgeev info " +
                             std::to_string(info) + ")");
    Eigen::VectorXcd out(n);
    for (Eigen::Index i = 0; i < n; ++i) out(i) = {wr(i), wi(i)};
    return out;
}
#endif

Eigen::VectorXcd dense_eigenvalues(const Eigen::MatrixXd& m) {
    if (m.rows() == 0) return {};
#ifdef CHATTERLIFT_HAVE_LAPACK
    if (m.rows() >= kLapackMinDim) return lapack_eigenvalues(m);
#endif
    return eigen_eigenvalues(m);
}

void require_finite_square(const Eigen::MatrixXd& m) {
    if (m.rows() != m.cols()) throw DomainError("matrix must be square");
    if (!m.allFinite()) throw DomainError("matrix has non-finite entries");
}

// Indices surviving repeated removal of exactly-zero columns (with their rows).
std::vector<Eigen::Index> active_indices(const Eigen::MatrixXd& m) {
    const Eigen::Index n = m.rows();
    std::vector<char> active(static_cast<std::size_t>(n), 1);
    bool changed = true;
    while (changed) {
        changed = false;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (!active[static_cast<std::size_t>(j)]) continue;
            bool zero = true;
            for (Eigen::Index i = 0; i < n && zero; ++i) {
                if (active[static_cast<std::size_t>(i)] && m(i, j) != 0.0) zero = false;
            }
            if (zero) {
                active[static_cast<std::size_t>(j)] = 0;
                changed = true;
            }
        }
    }
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < n; ++i)
        if (active[static_cast<std::size_t>(i)]) keep.push_back(i);
    return keep;
}

bool dominates(const std::complex<double>& a, const std::complex<double>& b) {
    const double ma = std::abs(a), mb = std::abs(b);
    const double scale = std::max({ma, mb, std::numeric_limits<double>::min()});
    if (std::abs(ma - mb) > kTieTolerance * scale) return ma > mb;
    if (a.real() != b.real()) return a.real() > b.real();
    return a.imag() > b.imag();
}

}  // namespace

const char* to_string(Classification c) {
    switch (c) {
        case Classification::Stable: return "stable";
        case Classification::MarginallyStable: return "marginal";
        case Classification::Unstable: return "unstable";
    }
    return "?";
}

const char* eigen_backend() {
#ifdef CHATTERLIFT_HAVE_LAPACK
    return "eigen+lapack";
#else
    return "eigen";
#endif
}

Eigen::VectorXcd eigenvalues(const Eigen::MatrixXd& m) {
    require_finite_square(m);
    return dense_eigenvalues(m);
}

SpectralRadius spectral_radius(const Eigen::MatrixXd& m) {
    require_finite_square(m);
    const std::vector<Eigen::Index> keep = active_indices(m);
    if (keep.empty()) return {};
    Eigen::MatrixXd reduced;
    if (static_cast<Eigen::Index>(keep.size()) == m.rows()) {
        reduced = m;
    } else {
        reduced = m(keep, keep);
    }
    const Eigen::VectorXcd eig = dense_eigenvalues(reduced);
    std::complex<double> best = eig(0);
    for (Eigen::Index i = 1; i < eig.size(); ++i)
        if (dominates(eig(i), best)) best = eig(i);
    return {std::abs(best), best};
}

Classification classify(double radius, double margin) {
    if (!(margin >= 0.0)) throw DomainError("margin must be >= 0");
    if (radius < 1.0 - margin) return Classification::Stable;
    if (radius > 1.0 + margin) return Classification::Unstable;
    return Classification::MarginallyStable;
}

StabilityVerdict assess_stability(const ClosedLoopSystem& system, double margin) {
    const SpectralRadius sr = spectral_radius(system.Phi);
    return {sr.radius, classify(sr.radius, margin), sr.dominant};
}

StabilityVerdict assess_stability(const MillingScenario& scenario, double spindle_speed,
                                  double axial_depth, const Discretization& disc, double margin) {
    const LiftedProblem problem = build_lifted_problem(scenario, spindle_speed, disc);
    return assess_stability(assemble_closed_loop(problem.structure, problem.force, axial_depth),
                            margin);
}

std::vector<double> linspace(double lo, double hi, int count) {
    if (count < 1) throw DomainError("linspace count must be >= 1");
    std::vector<double> out(static_cast<std::size_t>(count));
    if (count == 1) {
        out[0] = lo;
        return out;
    }
    for (int i = 0; i < count; ++i)
        out[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (count - 1);
    out.back() = hi;
    return out;
}

namespace {

void validate_axis(std::span<const double> values, const char* name, bool allow_zero) {
    if (values.empty()) throw DomainError(std::string(name) + " must not be empty");
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double v = values[i];
        if (!std::isfinite(v) || v < 0.0 || (!allow_zero && v == 0.0))
            throw DomainError(std::string(name) + " values must be positive and finite");
        if (i > 0 && !(v > values[i - 1]))
            throw DomainError(std::string(name) + " must be strictly ascending");
    }
}

PeriodicCoefficients scenario_coefficients(const MillingScenario& scenario,
                                           const Discretization& disc) {
    scenario.validate();
    if (disc.steps < 1) throw DomainError("steps must be >= 1");
    return averaged_coefficients(scenario.coefficients, scenario.window(),
                                 scenario.tool.teeth_count, disc.steps);
}

}  // namespace

SLDGrid sld_grid(const MillingScenario& scenario, std::span<const double> speeds,
                 std::span<const double> depths, const Discretization& disc,
                 const SweepOptions& options) {
    validate_axis(speeds, "speeds", false);
    validate_axis(depths, "depths", true);
    const PeriodicCoefficients coeffs = scenario_coefficients(scenario, disc);

    const auto ns = static_cast<Eigen::Index>(speeds.size());
    const auto nd = static_cast<Eigen::Index>(depths.size());
    SLDGrid grid;
    grid.speeds.assign(speeds.begin(), speeds.end());
    grid.depths.assign(depths.begin(), depths.end());
    grid.radius_field = Eigen::MatrixXd::Constant(ns, nd, std::numeric_limits<double>::quiet_NaN());
    grid.stable_mask = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(ns, nd, false);
    grid.valid_mask = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(ns, nd, false);

    // One task per (speed, depth) cell; the structural lift is shared along a speed column.
    std::vector<LiftedProblem> problems(static_cast<std::size_t>(ns));
    parallel_for(static_cast<int>(ns), options.threads, [&](int i) {
        try {
            problems[static_cast<std::size_t>(i)] =
                build_lifted_problem(scenario, coeffs, speeds[static_cast<std::size_t>(i)], disc.hold);
        } catch (const std::exception&) {
            problems[static_cast<std::size_t>(i)] = {};
        }
    });
    parallel_for(static_cast<int>(ns * nd), options.threads, [&](int cell) {
        const Eigen::Index i = cell / nd;
        const Eigen::Index j = cell % nd;
        const LiftedProblem& p = problems[static_cast<std::size_t>(i)];
        if (p.structure.steps == 0) return;
        try {
            const ClosedLoopSystem cl =
                assemble_closed_loop(p.structure, p.force, depths[static_cast<std::size_t>(j)]);
            const double rho = spectral_radius(cl.Phi).radius;
            grid.radius_field(i, j) = rho;
            grid.valid_mask(i, j) = true;
            grid.stable_mask(i, j) = classify(rho, options.margin) == Classification::Stable;
        } catch (const std::exception&) {
            // cell stays invalid
        }
    });
    return grid;
}

SLDGrid sld_grid(const MillingScenario& scenario, double speed_lo, double speed_hi,
                 double depth_lo, double depth_hi, int speed_count, int depth_count,
                 const Discretization& disc, const SweepOptions& options) {
    if (speed_count < 1 || depth_count < 1) throw DomainError("grid shape must be at least 1x1");
    if (!(speed_lo > 0.0) || !(speed_hi >= speed_lo) || !(depth_lo >= 0.0) ||
        !(depth_hi >= depth_lo))
        throw DomainError("speed and depth ranges must be positive and ordered");
    const std::vector<double> speeds = linspace(speed_lo, speed_hi, speed_count);
    const std::vector<double> depths = linspace(depth_lo, depth_hi, depth_count);
    return sld_grid(scenario, speeds, depths, disc, options);
}

namespace {

// Boundary of one column given radius/stable/valid accessors up to the first non-stable cell.
double column_boundary(std::span<const double> depths, std::size_t first_bad, double rho_prev,
                       double rho_bad, bool bad_valid) {
    if (first_bad == depths.size()) return depths.back();
    if (first_bad == 0) return depths.front();
    const double d0 = depths[first_bad - 1];
    const double d1 = depths[first_bad];
    if (!bad_valid || !(rho_bad > rho_prev)) return d0;
    const double t = std::clamp((1.0 - rho_prev) / (rho_bad - rho_prev), 0.0, 1.0);
    return d0 + t * (d1 - d0);
}

}  // namespace

std::vector<double> stability_boundary(const SLDGrid& grid) {
    const std::size_t nd = grid.depths.size();
    std::vector<double> out(grid.speeds.size());
    for (std::size_t i = 0; i < grid.speeds.size(); ++i) {
        const auto row = static_cast<Eigen::Index>(i);
        std::size_t j = 0;
        while (j < nd && grid.stable_mask(row, static_cast<Eigen::Index>(j))) ++j;
        const double prev = j > 0 ? grid.radius_field(row, static_cast<Eigen::Index>(j - 1)) : 0.0;
        const bool bad_valid = j < nd && grid.valid_mask(row, static_cast<Eigen::Index>(j));
        const double bad = bad_valid ? grid.radius_field(row, static_cast<Eigen::Index>(j)) : 0.0;
        out[i] = column_boundary(grid.depths, j, prev, bad, bad_valid);
    }
    return out;
}

std::vector<double> stability_boundary_scan(const MillingScenario& scenario,
                                            std::span<const double> speeds,
                                            std::span<const double> depths,
                                            const Discretization& disc,
                                            const SweepOptions& options) {
    validate_axis(speeds, "speeds", false);
    validate_axis(depths, "depths", true);
    const PeriodicCoefficients coeffs = scenario_coefficients(scenario, disc);
    std::vector<double> out(speeds.size());
    parallel_for(static_cast<int>(speeds.size()), options.threads, [&](int i) {
        LiftedProblem p;
        try {
            p = build_lifted_problem(scenario, coeffs, speeds[static_cast<std::size_t>(i)], disc.hold);
        } catch (const std::exception&) {
            out[static_cast<std::size_t>(i)] = depths.front();
            return;
        }
        double prev = 0.0, bad = 0.0;
        bool bad_valid = false;
        std::size_t j = 0;
        for (; j < depths.size(); ++j) {
            try {
                const ClosedLoopSystem cl = assemble_closed_loop(p.structure, p.force, depths[j]);
                const double rho = spectral_radius(cl.Phi).radius;
                if (classify(rho, options.margin) != Classification::Stable) {
                    bad = rho;
                    bad_valid = true;
                    break;
                }
                prev = rho;
            } catch (const std::exception&) {
                bad_valid = false;
                break;
            }
        }
        out[static_cast<std::size_t>(i)] = column_boundary(depths, j, prev, bad, bad_valid);
    });
    return out;
}

std::vector<ConvergenceRecord> convergence_curve(const MillingScenario& scenario,
                                                 std::span<const int> steps_list, Hold hold,
                                                 std::complex<double> reference) {
    if (reference == std::complex<double>(0.0, 0.0))
        throw DomainError("reference eigenvalue must be nonzero");
    std::vector<ConvergenceRecord> out;
    out.reserve(steps_list.size());
    for (int m : steps_list) {
        const StabilityVerdict v = assess_stability(scenario, scenario.conditions.spindle_speed,
                                                    scenario.conditions.axial_depth, {m, hold});
        out.push_back({m, v.dominant_eigenvalue,
                       std::abs((v.dominant_eigenvalue - reference) / reference)});
    }
    return out;
}

std::vector<ConvergenceRecord> convergence_curve(const MillingScenario& scenario,
                                                 std::span<const int> steps_list, Hold hold,
                                                 int reference_steps) {
    for (int m : steps_list) {
        if (m < 1) throw DomainError("steps must be >= 1");
        if (m > reference_steps)
            throw DomainError("reference steps must be at least the largest step count");
    }
    const StabilityVerdict ref = assess_stability(scenario, scenario.conditions.spindle_speed,
                                                  scenario.conditions.axial_depth,
                                                  {reference_steps, Hold::Imp});
    return convergence_curve(scenario, steps_list, hold, ref.dominant_eigenvalue);
}

double relative_error(std::span<const double> reference, std::span<const double> estimate) {
    if (reference.size() != estimate.size())
        throw DomainError("reference and estimate lengths differ");
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < reference.size(); ++i) {
        num += std::abs(reference[i] - estimate[i]);
        den += std::abs(reference[i]);
    }
    if (!(den > 0.0)) throw DomainError("reference sequence sums to zero");
    return 100.0 * num / den;
}

double normalized_time(double candidate_seconds, double baseline_seconds) {
    if (!(baseline_seconds > 0.0)) throw DomainError("baseline time must be positive");
    return candidate_seconds / baseline_seconds;
}

}  // namespace chatterlift
