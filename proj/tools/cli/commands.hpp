#pragma once

#include "config.hpp"

#include "chatterlift/stability.hpp"

#include <Eigen/Dense>

#include <iosfwd>
#include <string>

namespace chatterlift::cli {

enum class Command { Sld, Sle, Converge, Simulate, Chart };

Command parse_command(const std::string& name);

struct RunPaths {
    std::string out_dir = ".";
    std::string sld_input;  // chart: reuse an existing sld.csv instead of recomputing
};

/// Output directory from the flag, then CHATTERLIFT_OUT_DIR, then ".".
std::string resolve_out_dir(const std::string& flag_value);

/// Runs one command, writing its files under paths.out_dir and a one-line
/// summary per file to `log`. Returns the process exit status.
int run(Command command, const RunConfig& config, const RunPaths& paths, std::ostream& log);

/// SLE in micrometres for every stable cell of `grid` (NaN elsewhere). The
/// steady state is linear in depth, so one solve per speed serves the column.
Eigen::MatrixXd sle_field(const MillingScenario& scenario, const SLDGrid& grid,
                          const Discretization& disc, int threads);

}  // namespace chatterlift::cli
