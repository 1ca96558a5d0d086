#include "config.hpp"

#include "chatterlift/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace chatterlift::cli {

namespace {

struct Entry {
    std::string value;
    int line = 0;
};

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, sep)) out.push_back(trim(item));
    return out;
}

double to_double(const std::string& text, const std::string& what) {
    double v = 0.0;
    const char* end = text.data() + text.size();
    const auto res = std::from_chars(text.data(), end, v);
    if (res.ec != std::errc() || res.ptr != end || !std::isfinite(v))
        throw ConfigError(what + ": expected a number, got '" + text + "'");
    return v;
}

int to_int(const std::string& text, const std::string& what) {
    int v = 0;
    const char* end = text.data() + text.size();
    const auto res = std::from_chars(text.data(), end, v);
    if (res.ec != std::errc() || res.ptr != end)
        throw ConfigError(what + ": expected an integer, got '" + text + "'");
    return v;
}

class Reader {
public:
    Reader(std::map<std::string, Entry> entries, std::string source)
        : entries_(std::move(entries)), source_(std::move(source)) {}

    bool has(const std::string& key) const { return entries_.count(key) > 0; }

    std::string where(const std::string& key) const {
        const auto it = entries_.find(key);
        if (it == entries_.end()) return source_ + ": key '" + key + "'";
        return source_ + ":" + std::to_string(it->second.line) + ": key '" + key + "'";
    }

    const std::string& raw(const std::string& key) const {
        const auto it = entries_.find(key);
        if (it == entries_.end())
            throw ConfigError(source_ + ": missing required key '" + key + "'");
        return it->second.value;
    }

    double number(const std::string& key) const { return to_double(raw(key), where(key)); }
    double number(const std::string& key, double fallback) const {
        return has(key) ? number(key) : fallback;
    }
    int integer(const std::string& key) const { return to_int(raw(key), where(key)); }
    int integer(const std::string& key, int fallback) const {
        return has(key) ? integer(key) : fallback;
    }
    std::vector<double> numbers(const std::string& key) const {
        std::vector<double> out;
        for (const std::string& item : split(raw(key), ',')) out.push_back(to_double(item, where(key)));
        return out;
    }

    [[noreturn]] void reject(const std::string& key, const std::string& constraint) const {
        throw ConfigError(where(key) + ": " + constraint);
    }

private:
    std::map<std::string, Entry> entries_;
    std::string source_;
};

ModalAxis read_axis(const Reader& rd, const std::string& axis, int modes_used) {
    const std::string fk = axis + "_modes_hz";
    const std::string dk = axis + "_damping";
    const std::string kk = axis + "_stiffness_n_per_um";
    const std::vector<double> freq = rd.numbers(fk);
    const std::vector<double> damp = rd.numbers(dk);
    const std::vector<double> stiff = rd.numbers(kk);
    if (damp.size() != freq.size()) rd.reject(dk, "needs one damping ratio per mode in " + fk);
    if (stiff.size() != freq.size()) rd.reject(kk, "needs one stiffness per mode in " + fk);
    for (double f : freq)
        if (!(f > 0.0)) rd.reject(fk, "natural frequency must be > 0 Hz");
    for (double d : damp)
        if (!(d >= 0.0)) rd.reject(dk, "damping ratio must be >= 0");
    for (double k : stiff)
        if (!(k > 0.0)) rd.reject(kk, "stiffness must be > 0 N/um");
    if (modes_used > static_cast<int>(freq.size()))
        rd.reject("modes_used", "exceeds the " + std::to_string(freq.size()) + " modes listed in " + fk);
    ModalAxis out;
    const std::size_t n = modes_used > 0 ? static_cast<std::size_t>(modes_used) : freq.size();
    for (std::size_t i = 0; i < n; ++i)
        out.modes.push_back(ModalMode::from_hz(freq[i], damp[i], stiff[i] * 1e6));
    return out;
}

}  // namespace

const std::vector<std::string>& known_keys() {
    static const std::vector<std::string> keys{
        "direction",          "teeth_count",         "diameter_mm",
        "feed_x_mm_per_tooth", "feed_y_mm_per_tooth", "k_ct_n_per_mm2",
        "k_cn_n_per_mm2",     "k_et_n_per_mm",       "k_en_n_per_mm",
        "x_modes_hz",         "x_damping",           "x_stiffness_n_per_um",
        "y_modes_hz",         "y_damping",           "y_stiffness_n_per_um",
        "modes_used",         "radial_immersion",    "radial_depth_mm",
        "axial_depth_mm",     "spindle_speed_rpm",   "steps",
        "hold",               "reference_steps",     "speed_range_rpm",
        "depth_range_mm",     "grid",                "sle_points",
        "converge_steps",     "simulate_periods",    "simulate_substeps",
        "threads",            "margin",
    };
    return keys;
}

Hold parse_hold(const std::string& text, const std::string& what) {
    std::string t = text;
    std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
    if (t == "imp") return Hold::Imp;
    if (t == "zoh") return Hold::Zoh;
    throw ConfigError(what + ": expected 'imp' or 'zoh', got '" + text + "'");
}

std::pair<double, double> parse_range(const std::string& text, const std::string& what) {
    const std::vector<std::string> parts = split(text, ':');
    if (parts.size() != 2) throw ConfigError(what + ": expected 'lo:hi', got '" + text + "'");
    const double lo = to_double(parts[0], what);
    const double hi = to_double(parts[1], what);
    if (lo > hi) throw ConfigError(what + ": lower bound exceeds upper bound");
    return {lo, hi};
}

std::pair<int, int> parse_grid(const std::string& text, const std::string& what) {
    const std::vector<std::string> parts = split(text, 'x');
    if (parts.size() != 2) throw ConfigError(what + ": expected 'WxH', got '" + text + "'");
    const int w = to_int(parts[0], what);
    const int h = to_int(parts[1], what);
    if (w < 1 || h < 1) throw ConfigError(what + ": grid must be at least 1x1");
    return {w, h};
}

RunConfig parse_config(std::istream& in, const std::string& source) {
    std::map<std::string, Entry> entries;
    const std::vector<std::string>& keys = known_keys();
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        const std::string body = trim(std::string_view(line).substr(0, line.find('#')));
        if (body.empty()) continue;
        const auto eq = body.find('=');
        const std::string at = source + ":" + std::to_string(number);
        if (eq == std::string::npos) throw ConfigError(at + ": expected 'key = value'");
        const std::string key = trim(std::string_view(body).substr(0, eq));
        const std::string value = trim(std::string_view(body).substr(eq + 1));
        if (std::find(keys.begin(), keys.end(), key) == keys.end())
            throw ConfigError(at + ": unknown key '" + key + "'");
        if (value.empty()) throw ConfigError(at + ": key '" + key + "' has no value");
        if (!entries.emplace(key, Entry{value, number}).second)
            throw ConfigError(at + ": duplicate key '" + key + "'");
    }
    const Reader rd(std::move(entries), source);

    RunConfig cfg;
    MillingScenario& s = cfg.scenario;

    const std::string dir = rd.raw("direction");
    if (dir == "up") {
        s.tool.direction = MillingDirection::Up;
    } else if (dir == "down") {
        s.tool.direction = MillingDirection::Down;
    } else {
        rd.reject("direction", "expected 'up' or 'down', got '" + dir + "'");
    }
    s.tool.teeth_count = rd.integer("teeth_count");
    if (s.tool.teeth_count < 1) rd.reject("teeth_count", "must be >= 1");
    s.tool.diameter = rd.number("diameter_mm") * 1e-3;
    if (!(s.tool.diameter > 0.0)) rd.reject("diameter_mm", "must be > 0");

    s.coefficients.tangential_cutting = rd.number("k_ct_n_per_mm2") * 1e6;
    s.coefficients.normal_cutting = rd.number("k_cn_n_per_mm2") * 1e6;
    s.coefficients.tangential_edge = rd.number("k_et_n_per_mm") * 1e3;
    s.coefficients.normal_edge = rd.number("k_en_n_per_mm") * 1e3;
    if (!(s.coefficients.tangential_cutting > 0.0)) rd.reject("k_ct_n_per_mm2", "must be > 0");
    if (!(s.coefficients.normal_cutting > 0.0)) rd.reject("k_cn_n_per_mm2", "must be > 0");

    const int modes_used = rd.integer("modes_used", 0);
    if (rd.has("modes_used") && modes_used < 1) rd.reject("modes_used", "must be >= 1");
    s.axes.push_back(read_axis(rd, "x", modes_used));
    const bool any_y = rd.has("y_modes_hz") || rd.has("y_damping") || rd.has("y_stiffness_n_per_um");
    if (any_y) s.axes.push_back(read_axis(rd, "y", modes_used));

    if (rd.has("radial_immersion") && rd.has("radial_depth_mm"))
        rd.reject("radial_depth_mm", "give either radial_immersion or radial_depth_mm, not both");
    if (rd.has("radial_depth_mm")) {
        s.conditions.radial_depth = rd.number("radial_depth_mm") * 1e-3;
        if (!(s.conditions.radial_depth >= 0.0) || s.conditions.radial_depth > s.tool.diameter)
            rd.reject("radial_depth_mm", "must lie in [0, diameter_mm]");
    } else {
        const double ratio = rd.number("radial_immersion");
        if (!(ratio >= 0.0) || ratio > 1.0) rd.reject("radial_immersion", "must lie in [0, 1]");
        s.conditions.radial_depth = ratio * s.tool.diameter;
    }
    s.conditions.axial_depth = rd.number("axial_depth_mm") * 1e-3;
    if (!(s.conditions.axial_depth >= 0.0)) rd.reject("axial_depth_mm", "must be >= 0");
    s.conditions.spindle_speed = rd.number("spindle_speed_rpm");
    if (!(s.conditions.spindle_speed > 0.0)) rd.reject("spindle_speed_rpm", "must be > 0");
    s.conditions.feed_per_tooth = Eigen::Vector2d(rd.number("feed_x_mm_per_tooth") * 1e-3,
                                                  rd.number("feed_y_mm_per_tooth", 0.0) * 1e-3);

    cfg.discretization.steps = rd.integer("steps", cfg.discretization.steps);
    if (cfg.discretization.steps < 1) rd.reject("steps", "must be >= 1");
    if (rd.has("hold")) cfg.discretization.hold = parse_hold(rd.raw("hold"), rd.where("hold"));
    cfg.reference_steps = rd.integer("reference_steps", cfg.reference_steps);
    if (cfg.reference_steps < 1) rd.reject("reference_steps", "must be >= 1");
    if (rd.has("speed_range_rpm")) {
        std::tie(cfg.speed_lo, cfg.speed_hi) =
            parse_range(rd.raw("speed_range_rpm"), rd.where("speed_range_rpm"));
        if (!(cfg.speed_lo > 0.0)) rd.reject("speed_range_rpm", "speeds must be > 0");
    }
    if (rd.has("depth_range_mm")) {
        const auto [lo, hi] = parse_range(rd.raw("depth_range_mm"), rd.where("depth_range_mm"));
        if (!(lo >= 0.0)) rd.reject("depth_range_mm", "depths must be >= 0");
        cfg.depth_lo = lo * 1e-3;
        cfg.depth_hi = hi * 1e-3;
    }
    if (rd.has("grid"))
        std::tie(cfg.speed_count, cfg.depth_count) = parse_grid(rd.raw("grid"), rd.where("grid"));
    cfg.sle_points = rd.integer("sle_points", cfg.sle_points);
    if (cfg.sle_points < 1) rd.reject("sle_points", "must be >= 1");
    if (rd.has("converge_steps")) {
        cfg.converge_steps.clear();
        for (const std::string& item : split(rd.raw("converge_steps"), ',')) {
            const int m = to_int(item, rd.where("converge_steps"));
            if (m < 1) rd.reject("converge_steps", "step counts must be >= 1");
            cfg.converge_steps.push_back(m);
        }
    }
    cfg.simulate_periods = rd.integer("simulate_periods", cfg.simulate_periods);
    if (cfg.simulate_periods < 1) rd.reject("simulate_periods", "must be >= 1");
    cfg.simulate_substeps = rd.integer("simulate_substeps", cfg.simulate_substeps);
    if (cfg.simulate_substeps < 500) rd.reject("simulate_substeps", "must be >= 500");
    cfg.threads = rd.integer("threads", cfg.threads);
    if (cfg.threads < 1) rd.reject("threads", "must be >= 1");
    cfg.margin = rd.number("margin", cfg.margin);
    if (!(cfg.margin >= 0.0)) rd.reject("margin", "must be >= 0");

    try {
        s.validate();
    } catch (const DomainError& e) {
        throw ConfigError(source + ": " + e.what());
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    return parse_config(in, path);
}

}  // namespace chatterlift::cli
