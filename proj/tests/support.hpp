// Shared helpers for the test suites: seeded random instances and small
// oracles written independently of the library code paths.
#pragma once

#include "chatterlift/scenario.hpp"
#include "chatterlift/structural_dynamics.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

namespace testsupport {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline int uniform_int(Rng& rng, int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
}

inline Eigen::MatrixXd random_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols,
                                     double scale = 1.0) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = uniform(rng, -scale, scale);
    return m;
}

inline Eigen::VectorXd random_vector(Rng& rng, Eigen::Index n, double scale = 1.0) {
    return random_matrix(rng, n, 1, scale).col(0);
}

inline chatterlift::ModalAxis random_axis(Rng& rng, int modes) {
    chatterlift::ModalAxis axis;
    for (int i = 0; i < modes; ++i)
        axis.modes.push_back(chatterlift::ModalMode::from_hz(
            uniform(rng, 150.0, 1200.0), uniform(rng, 0.01, 0.3), uniform(rng, 2e6, 5e7)));
    return axis;
}

/// Time-domain modal model with `axes` axes and `modes` modes per axis.
inline chatterlift::StateSpaceModel random_structure(Rng& rng, int axes, int modes) {
    std::vector<chatterlift::ModalAxis> list;
    for (int a = 0; a < axes; ++a) list.push_back(random_axis(rng, modes));
    return chatterlift::realize_modal(list);
}

/// exp(M) by scaling, a 40-term Taylor sum and repeated squaring.
inline Eigen::MatrixXd series_exp(const Eigen::MatrixXd& m) {
    const double norm = m.cwiseAbs().rowwise().sum().maxCoeff();
    int squarings = 0;
    while (norm / std::ldexp(1.0, squarings) > 0.25) ++squarings;
    const Eigen::MatrixXd x = m / std::ldexp(1.0, squarings);
    const Eigen::Index n = m.rows();
    Eigen::MatrixXd term = Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd sum = term;
    for (int k = 1; k <= 40; ++k) {
        term = term * x / static_cast<double>(k);
        sum += term;
    }
    for (int i = 0; i < squarings; ++i) sum = sum * sum;
    return sum;
}

/// One classical RK4 step of q' = A q + b (b constant over the step).
inline Eigen::VectorXd rk4_step(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                                const Eigen::VectorXd& q, double h) {
    const Eigen::VectorXd k1 = a * q + b;
    const Eigen::VectorXd k2 = a * (q + 0.5 * h * k1) + b;
    const Eigen::VectorXd k3 = a * (q + 0.5 * h * k2) + b;
    const Eigen::VectorXd k4 = a * (q + h * k3) + b;
    return q + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// Integrates q' = A q + b over [0, length] in `substeps` RK4 steps.
inline Eigen::VectorXd rk4(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                           Eigen::VectorXd q, double length, int substeps) {
    const double h = length / substeps;
    for (int i = 0; i < substeps; ++i) q = rk4_step(a, b, q, h);
    return q;
}

/// Composite Simpson rule of a vector-valued integrand, `panels` even.
template <typename Fn>
auto simpson(Fn&& fn, double lo, double hi, int panels) {
    const double h = (hi - lo) / panels;
    auto sum = fn(lo);
    sum += fn(hi);
    for (int i = 1; i < panels; ++i) sum += (i % 2 ? 4.0 : 2.0) * fn(lo + i * h);
    return (sum * (h / 3.0)).eval();
}

inline double relative_max_error(const Eigen::MatrixXd& est, const Eigen::MatrixXd& ref) {
    const double scale = ref.cwiseAbs().maxCoeff();
    return (est - ref).cwiseAbs().maxCoeff() / (scale > 0.0 ? scale : 1.0);
}

}  // namespace testsupport
