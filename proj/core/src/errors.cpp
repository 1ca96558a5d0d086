#include "chatterlift/errors.hpp"

#include <cstdio>

namespace chatterlift {

namespace {

std::string conditioning_message(double axial_depth, double rcond) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "closed-loop factor I + a_p S D_L is singular at a_p = %.6g m "
                  "(reciprocal condition %.3g)",
                  axial_depth, rcond);
    return buf;
}

}  // namespace

ConditioningError::ConditioningError(double axial_depth, double rcond)
    : std::runtime_error(conditioning_message(axial_depth, rcond)),
      axial_depth_(axial_depth),
      rcond_(rcond) {}

DivergenceError::DivergenceError(int period_index)
    : std::runtime_error("time-marching solution diverged in tooth period " +
                         std::to_string(period_index)),
      period_index_(period_index) {}

}  // namespace chatterlift
