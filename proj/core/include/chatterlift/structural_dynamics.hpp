// Modal state-space model of the tool/workpiece structure, its angle-domain
// form, and the exact zero-phase discrete model under impulse (IMP) or
// half-shifted zero-order (ZOH) reconstruction of the cutting force.
#pragma once

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

namespace chatterlift {

struct ModalMode {
    double natural_frequency = 0.0;  // rad/s
    double damping_ratio = 0.0;
    double stiffness = 0.0;  // N/m

    static ModalMode from_hz(double frequency_hz, double damping_ratio, double stiffness);
    double frequency_hz() const;
};

struct ModalAxis {
    std::vector<ModalMode> modes;

    void validate() const;
};

enum class Domain { Time, Angle };

/// q' = A q + B f, Δz = C q. In the angle domain derivatives are per radian of
/// spindle rotation and `angular_rate` holds ω = 2πΩ/60.
struct StateSpaceModel {
    Eigen::MatrixXd A;
    Eigen::MatrixXd B;
    Eigen::MatrixXd C;
    Domain domain = Domain::Time;
    double angular_rate = 0.0;
    /// One label per 2x2 modal block ("x1", "y2", ...); empty if A is not modal.
    std::vector<std::string> mode_labels;

    int axes_count() const { return static_cast<int>(B.cols()); }
    int state_dim() const { return static_cast<int>(A.rows()); }
    bool modal_blocks() const { return !mode_labels.empty(); }
};

enum class Hold { Imp, Zoh };

const char* to_string(Hold hold);

/// p_{k+1} = A_d p_k + B_d f_k, Δz_k = C_d p_k + D_d f_k, with p_k = q_k - E_d f_k.
struct DiscreteModel {
    Eigen::MatrixXd A_d;
    Eigen::MatrixXd B_d;
    Eigen::MatrixXd C_d;
    Eigen::MatrixXd D_d;
    Eigen::MatrixXd E_d;
    double step_angle = 0.0;
    Hold hold = Hold::Imp;

    int axes_count() const { return static_cast<int>(B_d.cols()); }
    int state_dim() const { return static_cast<int>(A_d.rows()); }
};

/// Per-mode [displacement; velocity] blocks; axis forces drive only their own
/// modes and the axis output sums its modal displacements.
StateSpaceModel realize_modal(std::span<const ModalAxis> axes);
StateSpaceModel realize_modal(const ModalAxis& x_axis, const ModalAxis& y_axis);

StateSpaceModel to_angle_domain(const StateSpaceModel& model, double spindle_speed_rpm);

/// Exponential of a real square matrix. Matrices made of decoupled 2x2 diagonal
/// blocks use the closed form per block; anything else goes through Padé
/// scaling and squaring.
Eigen::MatrixXd matrix_exponential(const Eigen::MatrixXd& m);

/// exp of a single 2x2 block in closed form.
Eigen::Matrix2d exponential_2x2(const Eigen::Matrix2d& m);

DiscreteModel discretize(const StateSpaceModel& model, double step_angle, Hold hold);

/// Complex frequency response C (sI - A)^-1 B at s = iω.
Eigen::MatrixXcd frequency_response(const StateSpaceModel& model, double omega);

}  // namespace chatterlift
