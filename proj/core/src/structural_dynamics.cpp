#include "chatterlift/structural_dynamics.hpp"

#include "chatterlift/errors.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <numbers>

namespace chatterlift {

namespace {

bool is_block_diagonal_2x2(const Eigen::MatrixXd& m) {
    const Eigen::Index n = m.rows();
    if (n != m.cols() || n % 2 != 0) return false;
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) {
            if (i / 2 != j / 2 && m(i, j) != 0.0) return false;
        }
    }
    return true;
}

// A^-1 B, exploiting the 2x2 modal blocks when present.
Eigen::MatrixXd solve_state_matrix(const StateSpaceModel& model) {
    const Eigen::MatrixXd& a = model.A;
    const Eigen::MatrixXd& b = model.B;
    if (model.modal_blocks()) {
        Eigen::MatrixXd out(b.rows(), b.cols());
        for (std::size_t blk = 0; blk < model.mode_labels.size(); ++blk) {
            const Eigen::Index i = static_cast<Eigen::Index>(2 * blk);
            const Eigen::Matrix2d block = a.block<2, 2>(i, i);
            const double det = block.determinant();
            if (!(std::abs(det) > 1e-300) ||
                std::abs(det) <= 1e-14 * block.squaredNorm()) {
                throw SingularityError("state matrix singular at mode " +
                                       model.mode_labels[blk] +
                                       " (rigid-body mode cannot use ZOH)");
            }
            Eigen::Matrix2d inv;
            inv << block(1, 1), -block(0, 1), -block(1, 0), block(0, 0);
            inv /= det;
            out.middleRows(i, 2) = inv * b.middleRows(i, 2);
        }
        return out;
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
    if (!(lu.rcond() > 1e-14)) throw SingularityError("state matrix is singular");
    return lu.solve(b);
}

}  // namespace

ModalMode ModalMode::from_hz(double frequency_hz, double damping_ratio, double stiffness) {
    return {2.0 * std::numbers::pi * frequency_hz, damping_ratio, stiffness};
}

double ModalMode::frequency_hz() const { return natural_frequency / (2.0 * std::numbers::pi); }

void ModalAxis::validate() const {
    if (modes.empty()) throw DomainError("modal axis needs at least one mode");
    for (const ModalMode& mode : modes) {
        if (!(mode.natural_frequency > 0.0) || !std::isfinite(mode.natural_frequency))
            throw DomainError("natural frequency must be > 0");
        if (!(mode.damping_ratio > 0.0 && mode.damping_ratio < 1.0))
            throw DomainError("damping ratio must lie in (0, 1)");
        if (!(mode.stiffness > 0.0) || !std::isfinite(mode.stiffness))
            throw DomainError("stiffness must be > 0");
    }
}

const char* to_string(Hold hold) { return hold == Hold::Imp ? "imp" : "zoh"; }

StateSpaceModel realize_modal(std::span<const ModalAxis> axes) {
    if (axes.empty() || axes.size() > 2) throw DomainError("realize_modal supports 1 or 2 axes");
    int total_modes = 0;
    for (const ModalAxis& axis : axes) {
        axis.validate();
        total_modes += static_cast<int>(axis.modes.size());
    }
    const int n = 2 * total_modes;
    const int r = static_cast<int>(axes.size());

    StateSpaceModel model;
    model.A = Eigen::MatrixXd::Zero(n, n);
    model.B = Eigen::MatrixXd::Zero(n, r);
    model.C = Eigen::MatrixXd::Zero(r, n);
    model.domain = Domain::Time;

    static constexpr char kAxisNames[] = {'x', 'y'};
    int row = 0;
    for (int axis = 0; axis < r; ++axis) {
        int index = 1;
        for (const ModalMode& mode : axes[static_cast<std::size_t>(axis)].modes) {
            const double wn = mode.natural_frequency;
            model.A(row, row + 1) = 1.0;
            model.A(row + 1, row) = -wn * wn;
            model.A(row + 1, row + 1) = -2.0 * mode.damping_ratio * wn;
            model.B(row + 1, axis) = wn * wn / mode.stiffness;
            model.C(axis, row) = 1.0;
            model.mode_labels.push_back(std::string(1, kAxisNames[axis]) + std::to_string(index++));
            row += 2;
        }
    }
    return model;
}

StateSpaceModel realize_modal(const ModalAxis& x_axis, const ModalAxis& y_axis) {
    const ModalAxis axes[] = {x_axis, y_axis};
    return realize_modal(std::span<const ModalAxis>(axes));
}

StateSpaceModel to_angle_domain(const StateSpaceModel& model, double spindle_speed_rpm) {
    if (model.domain != Domain::Time) throw DomainError("model is already in the angle domain");
    if (!(spindle_speed_rpm > 0.0) || !std::isfinite(spindle_speed_rpm))
        throw DomainError("spindle speed must be > 0");
    const double omega = 2.0 * std::numbers::pi * spindle_speed_rpm / 60.0;
    StateSpaceModel out = model;
    out.A = model.A / omega;
    out.B = model.B / omega;
    out.domain = Domain::Angle;
    out.angular_rate = omega;
    return out;
}

Eigen::Matrix2d exponential_2x2(const Eigen::Matrix2d& m) {
    // M = sI + N with N traceless, N² = d I.
    const double s = 0.5 * m.trace();
    Eigen::Matrix2d nmat = m;
    nmat(0, 0) -= s;
    nmat(1, 1) -= s;
    const double d = nmat(0, 0) * nmat(0, 0) + nmat(0, 1) * nmat(1, 0);
    double c = 0.0;
    double g = 0.0;
    if (std::abs(d) < 1e-3) {
        c = 1.0 + d / 2.0 + d * d / 24.0 + d * d * d / 720.0 + d * d * d * d / 40320.0;
        g = 1.0 + d / 6.0 + d * d / 120.0 + d * d * d / 5040.0 + d * d * d * d / 362880.0;
    } else if (d > 0.0) {
        const double root = std::sqrt(d);
        c = std::cosh(root);
        g = std::sinh(root) / root;
    } else {
        const double root = std::sqrt(-d);
        c = std::cos(root);
        g = std::sin(root) / root;
    }
    return std::exp(s) * (c * Eigen::Matrix2d::Identity() + g * nmat);
}

Eigen::MatrixXd matrix_exponential(const Eigen::MatrixXd& m) {
    if (m.rows() != m.cols()) throw DomainError("matrix_exponential needs a square matrix");
    if (!m.allFinite()) throw DomainError("matrix_exponential input has non-finite entries");
    if (is_block_diagonal_2x2(m)) {
        Eigen::MatrixXd out = Eigen::MatrixXd::Zero(m.rows(), m.cols());
        for (Eigen::Index i = 0; i < m.rows(); i += 2) {
            out.block<2, 2>(i, i) = exponential_2x2(m.block<2, 2>(i, i));
        }
        return out;
    }
    return m.exp();
}

DiscreteModel discretize(const StateSpaceModel& model, double step_angle, Hold hold) {
    if (model.domain != Domain::Angle) throw DomainError("discretize expects an angle-domain model");
    if (!(step_angle > 0.0) || !std::isfinite(step_angle))
        throw DomainError("step angle must be > 0");

    const Eigen::Index n = model.A.rows();
    const Eigen::Index r = model.B.cols();
    DiscreteModel d;
    d.step_angle = step_angle;
    d.hold = hold;
    d.A_d = matrix_exponential(model.A * step_angle);
    d.C_d = model.C;

    if (hold == Hold::Imp) {
        d.B_d = d.A_d * model.B * step_angle;
        d.D_d = Eigen::MatrixXd::Zero(model.C.rows(), r);
        d.E_d = Eigen::MatrixXd::Zero(n, r);
        return d;
    }

    const Eigen::MatrixXd a_inv_b = solve_state_matrix(model);
    const Eigen::MatrixXd half = matrix_exponential(model.A * (0.5 * step_angle));
    const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(n, n);
    d.E_d = (half - identity) * a_inv_b;
    d.B_d = half * ((d.A_d - identity) * a_inv_b);
    d.D_d = model.C * d.E_d;
    return d;
}

Eigen::MatrixXcd frequency_response(const StateSpaceModel& model, double omega) {
    const Eigen::Index n = model.A.rows();
    const std::complex<double> s(0.0, omega);
    Eigen::MatrixXcd m = s * Eigen::MatrixXcd::Identity(n, n) - model.A.cast<std::complex<double>>();
    return model.C.cast<std::complex<double>>() *
           m.partialPivLu().solve(model.B.cast<std::complex<double>>());
}

}  // namespace chatterlift
