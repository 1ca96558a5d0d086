#include "commands.hpp"
#include "config.hpp"

#include "chatterlift/errors.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace chatterlift;
using namespace chatterlift::cli;

namespace {

struct Overrides {
    std::string config_path;
    std::string out_dir;
    std::string hold;
    int steps = 0;
    std::string grid;
    std::string speed_range;
    std::string depth_range;
    int threads = 0;
    std::string sld_input;
};

void add_common(CLI::App* sub, Overrides& o) {
    sub->add_option("--config", o.config_path, "run configuration file")->required();
    sub->add_option("--out", o.out_dir, "output directory (default: $CHATTERLIFT_OUT_DIR or .)");
    sub->add_option("--hold", o.hold, "zero-phase hold: imp or zoh");
    sub->add_option("--steps", o.steps, "samples per tooth period m");
    sub->add_option("--grid", o.grid, "sweep grid WxH (speeds x depths)");
    sub->add_option("--speed-range", o.speed_range, "spindle speed range lo:hi in rev/min");
    sub->add_option("--depth-range", o.depth_range, "axial depth range lo:hi in mm");
    sub->add_option("--threads", o.threads, "worker threads");
}

void apply(const Overrides& o, RunConfig& cfg) {
    if (!o.hold.empty()) cfg.discretization.hold = parse_hold(o.hold, "--hold");
    if (o.steps != 0) {
        if (o.steps < 1) throw ConfigError("--steps: must be >= 1");
        cfg.discretization.steps = o.steps;
    }
    if (!o.grid.empty()) {
        const auto [w, h] = parse_grid(o.grid, "--grid");
        cfg.speed_count = w;
        cfg.depth_count = h;
        cfg.sle_points = w;
    }
    if (!o.speed_range.empty()) {
        const auto [lo, hi] = parse_range(o.speed_range, "--speed-range");
        if (lo <= 0.0) throw ConfigError("--speed-range: speeds must be > 0");
        cfg.speed_lo = lo;
        cfg.speed_hi = hi;
    }
    if (!o.depth_range.empty()) {
        const auto [lo, hi] = parse_range(o.depth_range, "--depth-range");
        if (lo < 0.0) throw ConfigError("--depth-range: depths must be >= 0");
        cfg.depth_lo = lo * 1e-3;
        cfg.depth_hi = hi * 1e-3;
    }
    if (o.threads != 0) {
        if (o.threads < 1) throw ConfigError("--threads: must be >= 1");
        cfg.threads = o.threads;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Chatter stability and surface location error for milling"};
    app.require_subcommand(1);

    Overrides o;
    const std::pair<const char*, const char*> commands[] = {
        {"sld", "stability lobe grid -> sld.csv"},
        {"sle", "surface location error sweep at the configured depth -> sle.csv"},
        {"converge", "eigenvalue convergence against a fine IMP reference -> convergence.csv"},
        {"simulate", "time-marching reference simulation -> trajectory.csv"},
        {"chart", "stability/SLE contour chart -> chart.svg"},
    };
    for (const auto& [name, help] : commands) {
        CLI::App* sub = app.add_subcommand(name, help);
        add_common(sub, o);
        if (std::string(name) == "chart")
            sub->add_option("--sld", o.sld_input, "reuse an existing sld.csv instead of recomputing");
    }

    CLI11_PARSE(app, argc, argv);

    const std::string name = app.get_subcommands().front()->get_name();
    try {
        RunConfig cfg = load_config(o.config_path);
        apply(o, cfg);
        RunPaths paths;
        paths.out_dir = resolve_out_dir(o.out_dir);
        paths.sld_input = o.sld_input;
        return run(parse_command(name), cfg, paths, std::cout);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const DomainError& e) {
        // physically valid config that the chosen command cannot use
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << name << ": " << e.what() << '\n';
        return 1;
    }
}
