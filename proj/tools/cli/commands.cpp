#include "commands.hpp"

#include "chart.hpp"
#include "csv.hpp"

#include "chatterlift/errors.hpp"
#include "chatterlift/parallel.hpp"
#include "chatterlift/reference_oracles.hpp"
#include "chatterlift/surface_error.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

namespace chatterlift::cli {

namespace {

std::string join(const std::string& dir, const char* name) {
    return (std::filesystem::path(dir) / name).string();
}

SweepOptions sweep_options(const RunConfig& cfg) { return {cfg.threads, cfg.margin}; }

SLDGrid compute_sld(const RunConfig& cfg) {
    return sld_grid(cfg.scenario, cfg.speed_lo, cfg.speed_hi, cfg.depth_lo, cfg.depth_hi,
                    cfg.speed_count, cfg.depth_count, cfg.discretization, sweep_options(cfg));
}

int count_valid(const SLDGrid& g) { return static_cast<int>(g.valid_mask.count()); }

int run_sld(const RunConfig& cfg, const RunPaths& paths, std::ostream& log) {
    const SLDGrid grid = compute_sld(cfg);
    std::ostringstream os;
    write_sld_csv(os, grid);
    const std::string path = join(paths.out_dir, "sld.csv");
    write_file(path, os.str());
    log << "sld: " << grid.speeds.size() * grid.depths.size() << " cells ("
        << grid.stable_mask.count() << " stable, "
        << grid.speeds.size() * grid.depths.size() - static_cast<std::size_t>(count_valid(grid))
        << " invalid), m = " << cfg.discretization.steps << ' ' << to_string(cfg.discretization.hold)
        << " -> " << path << '\n';
    return 0;
}

int run_sle(const RunConfig& cfg, const RunPaths& paths, std::ostream& log) {
    const SLEMap map = sle_sweep(cfg.scenario, cfg.speed_lo, cfg.speed_hi, cfg.sle_points,
                                 cfg.discretization, sweep_options(cfg));
    std::ostringstream os;
    write_sle_csv(os, map);
    const std::string path = join(paths.out_dir, "sle.csv");
    write_file(path, os.str());

    std::ostringstream meta;
    meta << "axial_depth_mm = " << format_number(map.axial_depth * 1e3) << '\n'
         << "feed_x_mm_per_tooth = " << format_number(map.feed.x() * 1e3) << '\n'
         << "feed_y_mm_per_tooth = " << format_number(map.feed.y() * 1e3) << '\n'
         << "feed_has_y_component = " << (map.feed_has_y_component ? 1 : 0) << '\n'
         << "steps = " << cfg.discretization.steps << '\n'
         << "hold = " << to_string(cfg.discretization.hold) << '\n';
    write_file(path + ".meta", meta.str());

    const auto invalid = std::count(map.valid.begin(), map.valid.end(), false);
    log << "sle: " << map.speeds.size() << " speeds (" << invalid << " invalid) at a_p = "
        << format_number(map.axial_depth * 1e3) << " mm -> " << path << '\n';
    if (map.feed_has_y_component)
        log << "sle: note: feed has a y component; the edge path applies it as given\n";
    return 0;
}

int run_converge(const RunConfig& cfg, const RunPaths& paths, std::ostream& log) {
    const std::vector<ConvergenceRecord> records = convergence_curve(
        cfg.scenario, cfg.converge_steps, cfg.discretization.hold, cfg.reference_steps);
    std::ostringstream os;
    write_convergence_csv(os, records);
    const std::string path = join(paths.out_dir, "convergence.csv");
    write_file(path, os.str());
    log << "converge: " << records.size() << " step counts against IMP m = "
        << cfg.reference_steps << " -> " << path << '\n';
    return 0;
}

int run_simulate(const RunConfig& cfg, const RunPaths& paths, std::ostream& log) {
    SimulationOptions opt;
    opt.periods = cfg.simulate_periods;
    opt.substeps = cfg.simulate_substeps;
    const std::string path = join(paths.out_dir, "trajectory.csv");
    DDETrajectory traj;
    try {
        traj = simulate_dde(build_dde(cfg.scenario), opt);
    } catch (const DivergenceError& e) {
        // chatter: a numerical outcome, not a failure of the run
        write_file(path, "period_index,theta_rad,x_m,y_m\n");
        log << "simulate: diverged in period " << e.period_index() << " -> " << path << '\n';
        return 0;
    }
    std::ostringstream os;
    write_trajectory_csv(os, traj);
    write_file(path, os.str());
    log << "simulate: " << traj.periods() << " periods, last-period amplitude "
        << format_number(traj.period_amplitude(traj.periods() - 1)) << " m -> " << path << '\n';
    return 0;
}

int run_chart(const RunConfig& cfg, const RunPaths& paths, std::ostream& log) {
    SLDGrid grid;
    if (!paths.sld_input.empty()) {
        std::ifstream in(paths.sld_input);
        if (!in) throw std::runtime_error("cannot open '" + paths.sld_input + "'");
        grid = read_sld_csv(in);
    } else {
        grid = compute_sld(cfg);
    }
    const Eigen::MatrixXd sle = sle_field(cfg.scenario, grid, cfg.discretization, cfg.threads);
    const std::string svg = render_chart(grid, sle);
    const std::string path = join(paths.out_dir, "chart.svg");
    write_file(path, svg);
    const MaskCheck check = check_chart_mask(svg, grid);
    log << "chart: " << check.cells << " cells, " << check.mismatches << " mask mismatches -> "
        << path << '\n';
    return check.mismatches == 0 ? 0 : 1;
}

}  // namespace

Command parse_command(const std::string& name) {
    if (name == "sld") return Command::Sld;
    if (name == "sle") return Command::Sle;
    if (name == "converge") return Command::Converge;
    if (name == "simulate") return Command::Simulate;
    if (name == "chart") return Command::Chart;
    throw ConfigError("unknown command '" + name + "'");
}

std::string resolve_out_dir(const std::string& flag_value) {
    if (!flag_value.empty()) return flag_value;
    if (const char* env = std::getenv("CHATTERLIFT_OUT_DIR"); env && *env) return env;
    return ".";
}

Eigen::MatrixXd sle_field(const MillingScenario& scenario, const SLDGrid& grid,
                          const Discretization& disc, int threads) {
    const auto ns = static_cast<Eigen::Index>(grid.speeds.size());
    const auto nd = static_cast<Eigen::Index>(grid.depths.size());
    Eigen::MatrixXd field = Eigen::MatrixXd::Constant(ns, nd, std::numeric_limits<double>::quiet_NaN());
    if (ns == 0 || nd == 0) return field;
    const PeriodicCoefficients coeffs = averaged_coefficients(
        scenario.coefficients, scenario.window(), scenario.tool.teeth_count, disc.steps);
    const Eigen::Vector2d feed = scenario.conditions.feed_per_tooth;
    parallel_for(static_cast<int>(ns), threads, [&](int i) {
        if (!grid.stable_mask.row(i).any()) return;
        try {
            const LiftedProblem p =
                build_lifted_problem(scenario, coeffs, grid.speeds[static_cast<std::size_t>(i)], disc.hold);
            const SteadyStateVibration unit = steady_state_vibration(p.structure, p.force, 1.0);
            for (Eigen::Index j = 0; j < nd; ++j) {
                if (!grid.stable_mask(i, j)) continue;
                SteadyStateVibration vib = unit;
                for (Eigen::Vector2d& v : vib.samples) v *= grid.depths[static_cast<std::size_t>(j)];
                const std::vector<EdgePoint> path = edge_trajectory(vib, scenario.tool, feed, disc.steps);
                field(i, j) = surface_location_error(path, scenario.tool.direction,
                                                     scenario.tool.diameter)
                                  .value *
                              1e6;
            }
        } catch (const std::exception&) {
            // column stays NaN
        }
    });
    return field;
}

int run(Command command, const RunConfig& config, const RunPaths& paths, std::ostream& log) {
    std::filesystem::create_directories(paths.out_dir);
    switch (command) {
        case Command::Sld: return run_sld(config, paths, log);
        case Command::Sle: return run_sle(config, paths, log);
        case Command::Converge: return run_converge(config, paths, log);
        case Command::Simulate: return run_simulate(config, paths, log);
        case Command::Chart: return run_chart(config, paths, log);
    }
    return 2;
}

}  // namespace chatterlift::cli
