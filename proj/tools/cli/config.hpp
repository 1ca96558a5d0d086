// Plain-text run configuration: one `key = value` per line, `#` starts a comment.
// Keys carry their unit (diameter_mm, k_ct_n_per_mm2, ...); values are
// converted to SI on load.
#pragma once

#include "chatterlift/scenario.hpp"

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace chatterlift::cli {

struct RunConfig {
    MillingScenario scenario;

    Discretization discretization;
    int reference_steps = 1000;
    double speed_lo = 3000.0;  // rev/min
    double speed_hi = 23000.0;
    double depth_lo = 0.1e-3;  // m
    double depth_hi = 5.0e-3;
    int speed_count = 100;
    int depth_count = 100;
    int sle_points = 200;
    std::vector<int> converge_steps{20, 40, 60, 80, 100};
    int simulate_periods = 50;
    int simulate_substeps = 1000;
    int threads = 1;
    double margin = 0.0;
};

/// Raised for malformed files and for values violating their constraints.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

RunConfig load_config(const std::string& path);

/// `source` names the input in error messages.
RunConfig parse_config(std::istream& in, const std::string& source = "<config>");

/// Every key the loader accepts, in documentation order.
const std::vector<std::string>& known_keys();

// Value syntax shared with command-line overrides; throw ConfigError naming `what`.
Hold parse_hold(const std::string& text, const std::string& what);
/// "lo:hi" with lo <= hi, both finite.
std::pair<double, double> parse_range(const std::string& text, const std::string& what);
/// "WxH", both >= 1.
std::pair<int, int> parse_grid(const std::string& text, const std::string& what);

}  // namespace chatterlift::cli
