#include "chatterlift/scenario.hpp"

#include "chatterlift/errors.hpp"

#include <algorithm>

namespace chatterlift {

void MillingScenario::validate() const {
    tool.validate();
    coefficients.validate();
    if (axes.empty() || axes.size() > 2) throw DomainError("scenario needs 1 or 2 modal axes");
    for (const ModalAxis& axis : axes) axis.validate();
    conditions.validate(tool);
}

ImmersionWindow MillingScenario::window() const {
    return immersion_window(tool.direction, conditions.radial_depth, tool.diameter);
}

StateSpaceModel MillingScenario::structure() const { return realize_modal(axes); }

MillingScenario reference_scenario(int modes_per_axis, double immersion_ratio,
                                   MillingDirection direction) {
    if (modes_per_axis < 1 || modes_per_axis > 2) throw DomainError("modes_per_axis must be 1 or 2");
    MillingScenario s;
    s.tool.teeth_count = 2;
    s.tool.diameter = 25.0e-3;
    s.tool.direction = direction;

    s.coefficients.tangential_cutting = 838.7e6;
    s.coefficients.normal_cutting = 384.6e6;
    s.coefficients.tangential_edge = 19.59e3;
    s.coefficients.normal_edge = 21.18e3;

    ModalAxis x{{ModalMode::from_hz(350.0, 0.042, 38.462e6),
                 ModalMode::from_hz(540.0, 0.040, 1.681e6)}};
    ModalAxis y{{ModalMode::from_hz(284.0, 0.054, 16.129e6),
                 ModalMode::from_hz(554.0, 0.190, 6.579e6)}};
    x.modes.resize(static_cast<std::size_t>(modes_per_axis));
    y.modes.resize(static_cast<std::size_t>(modes_per_axis));
    s.axes = {x, y};

    s.conditions.axial_depth = 0.5e-3;
    s.conditions.radial_depth = std::clamp(immersion_ratio, 0.0, 1.0) * s.tool.diameter;
    s.conditions.spindle_speed = 12500.0;
    s.conditions.feed_per_tooth = Eigen::Vector2d(0.2e-3, 0.0);
    return s;
}

}  // namespace chatterlift
