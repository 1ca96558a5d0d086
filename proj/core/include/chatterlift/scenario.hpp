#pragma once

#include "chatterlift/cutting_force.hpp"
#include "chatterlift/structural_dynamics.hpp"

#include <vector>

namespace chatterlift {

/// Complete milling problem instance in SI units.
struct MillingScenario {
    ToolGeometry tool;
    CuttingCoefficients coefficients;
    /// One modal axis per motion axis: x, then optionally y.
    std::vector<ModalAxis> axes;
    CuttingConditions conditions;

    void validate() const;
    int axes_count() const { return static_cast<int>(axes.size()); }
    ImmersionWindow window() const;
    StateSpaceModel structure() const;
};

struct Discretization {
    int steps = 40;
    Hold hold = Hold::Imp;
};

/// Two-flute 25 mm end mill with two modes per axis (the published benchmark
/// set). `modes_per_axis` keeps the leading modes; `immersion_ratio` is a_r/D.
/// Cutting conditions default to a_p = 0.5 mm at 12.5 krpm, 0.2 mm/tooth along x.
MillingScenario reference_scenario(int modes_per_axis = 2, double immersion_ratio = 0.5,
                                   MillingDirection direction = MillingDirection::Down);

}  // namespace chatterlift
