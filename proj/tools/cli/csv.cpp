#include "csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace chatterlift::cli {

namespace {

std::vector<std::string> fields(const std::string& line) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(line);
    while (std::getline(in, item, ',')) out.push_back(item);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_number(const std::string& text, int line) {
    if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
    double v = 0.0;
    const char* end = text.data() + text.size();
    const auto res = std::from_chars(text.data(), end, v);
    if (res.ec != std::errc() || res.ptr != end)
        throw std::runtime_error("csv line " + std::to_string(line) + ": bad number '" + text + "'");
    return v;
}

bool parse_flag(const std::string& text, int line) {
    if (text == "1") return true;
    if (text == "0") return false;
    throw std::runtime_error("csv line " + std::to_string(line) + ": expected 0 or 1, got '" + text + "'");
}

// Reads rows after checking the header; calls fn(fields, line_number) per row.
template <typename Fn>
void read_rows(std::istream& is, const char* header, std::size_t columns, Fn&& fn) {
    std::string line;
    if (!std::getline(is, line) || line != header)
        throw std::runtime_error(std::string("csv line 1: expected header '") + header + "'");
    int number = 1;
    while (std::getline(is, line)) {
        ++number;
        if (line.empty()) continue;
        const std::vector<std::string> f = fields(line);
        if (f.size() != columns)
            throw std::runtime_error("csv line " + std::to_string(number) + ": expected " +
                                     std::to_string(columns) + " fields");
        fn(f, number);
    }
}

}  // namespace

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 12);
    return std::string(buf, res.ptr);
}

void write_sld_csv(std::ostream& os, const SLDGrid& grid) {
    os << kSldHeader << '\n';
    for (std::size_t i = 0; i < grid.speeds.size(); ++i) {
        for (std::size_t j = 0; j < grid.depths.size(); ++j) {
            const auto r = static_cast<Eigen::Index>(i);
            const auto c = static_cast<Eigen::Index>(j);
            const bool valid = grid.valid_mask(r, c);
            os << format_number(grid.speeds[i]) << ',' << format_number(grid.depths[j] * 1e3) << ','
               << (valid ? format_number(grid.radius_field(r, c)) : "nan") << ','
               << (grid.stable_mask(r, c) ? '1' : '0') << '\n';
        }
    }
}

void write_sle_csv(std::ostream& os, const SLEMap& map) {
    os << kSleHeader << '\n';
    for (std::size_t i = 0; i < map.speeds.size(); ++i) {
        os << format_number(map.speeds[i]) << ','
           << (map.valid[i] ? format_number(map.sle_values[i] * 1e6) : "nan") << ','
           << (map.valid[i] ? '1' : '0') << '\n';
    }
}

void write_convergence_csv(std::ostream& os, std::span<const ConvergenceRecord> records) {
    os << kConvergenceHeader << '\n';
    for (const ConvergenceRecord& r : records) {
        os << r.steps << ',' << format_number(r.eigenvalue.real()) << ','
           << format_number(r.eigenvalue.imag()) << ',' << format_number(r.relative_error) << '\n';
    }
}

SLDGrid read_sld_csv(std::istream& is) {
    struct Row {
        double speed, depth, radius;
        bool stable;
    };
    std::vector<Row> rows;
    read_rows(is, kSldHeader, 4, [&](const std::vector<std::string>& f, int line) {
        rows.push_back({parse_number(f[0], line), parse_number(f[1], line) * 1e-3,
                        parse_number(f[2], line), parse_flag(f[3], line)});
    });
    SLDGrid grid;
    // Speed-major: depths repeat within each speed block.
    for (const Row& r : rows) {
        if (grid.speeds.empty() || grid.speeds.back() != r.speed) grid.speeds.push_back(r.speed);
        if (grid.speeds.size() == 1) grid.depths.push_back(r.depth);
    }
    const std::size_t ns = grid.speeds.size(), nd = grid.depths.size();
    if (ns * nd != rows.size()) throw std::runtime_error("csv rows do not form a speed-major grid");
    const auto n_s = static_cast<Eigen::Index>(ns), n_d = static_cast<Eigen::Index>(nd);
    grid.radius_field.resize(n_s, n_d);
    grid.stable_mask.resize(n_s, n_d);
    grid.valid_mask.resize(n_s, n_d);
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const auto i = static_cast<Eigen::Index>(k / nd), j = static_cast<Eigen::Index>(k % nd);
        grid.radius_field(i, j) = rows[k].radius;
        grid.valid_mask(i, j) = !std::isnan(rows[k].radius);
        grid.stable_mask(i, j) = rows[k].stable;
    }
    return grid;
}

SLEMap read_sle_csv(std::istream& is) {
    SLEMap map;
    read_rows(is, kSleHeader, 3, [&](const std::vector<std::string>& f, int line) {
        map.speeds.push_back(parse_number(f[0], line));
        map.sle_values.push_back(parse_number(f[1], line) * 1e-6);
        map.valid.push_back(parse_flag(f[2], line));
    });
    map.spectral_radius.assign(map.speeds.size(), std::numeric_limits<double>::quiet_NaN());
    return map;
}

std::vector<ConvergenceRecord> read_convergence_csv(std::istream& is) {
    std::vector<ConvergenceRecord> out;
    read_rows(is, kConvergenceHeader, 4, [&](const std::vector<std::string>& f, int line) {
        ConvergenceRecord r;
        r.steps = static_cast<int>(parse_number(f[0], line));
        r.eigenvalue = {parse_number(f[1], line), parse_number(f[2], line)};
        r.relative_error = parse_number(f[3], line);
        out.push_back(r);
    });
    return out;
}

void write_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << contents;
    out.close();
    if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

}  // namespace chatterlift::cli
