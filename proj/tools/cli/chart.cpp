#include "chart.hpp"

#include "csv.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <sstream>

namespace chatterlift::cli {

namespace {

// Ten-step perceptual ramp (dark blue to yellow).
constexpr std::array<const char*, 10> kPalette{
    "#440154", "#482878", "#3e4a89", "#31688e", "#26828e",
    "#1f9e89", "#35b779", "#6ece58", "#b5de2b", "#fde725",
};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

double interpolate(double a, double b, double level) {
    return (level - a) / (b - a);
}

}  // namespace

std::vector<ContourSegment> contour_segments(const Eigen::MatrixXd& f, double level) {
    std::vector<ContourSegment> out;
    for (Eigen::Index i = 0; i + 1 < f.rows(); ++i) {
        for (Eigen::Index j = 0; j + 1 < f.cols(); ++j) {
            const double v00 = f(i, j), v10 = f(i + 1, j), v11 = f(i + 1, j + 1), v01 = f(i, j + 1);
            if (!std::isfinite(v00) || !std::isfinite(v10) || !std::isfinite(v11) || !std::isfinite(v01))
                continue;
            // Crossing points on the four edges, walked counter-clockwise.
            std::array<std::pair<double, double>, 4> pts;
            int n = 0;
            const double x = static_cast<double>(i), y = static_cast<double>(j);
            auto edge = [&](double a, double b, double xa, double ya, double xb, double yb) {
                if ((a < level) != (b < level)) {
                    const double t = interpolate(a, b, level);
                    pts[static_cast<std::size_t>(n++)] = {xa + t * (xb - xa), ya + t * (yb - ya)};
                }
            };
            edge(v00, v10, x, y, x + 1, y);
            edge(v10, v11, x + 1, y, x + 1, y + 1);
            edge(v11, v01, x + 1, y + 1, x, y + 1);
            edge(v01, v00, x, y + 1, x, y);
            if (n == 2) {
                out.push_back({pts[0].first, pts[0].second, pts[1].first, pts[1].second});
            } else if (n == 4) {
                // Saddle: pair edges by the centre value.
                const double centre = 0.25 * (v00 + v10 + v11 + v01);
                if ((centre < level) == (v00 < level)) {
                    out.push_back({pts[0].first, pts[0].second, pts[1].first, pts[1].second});
                    out.push_back({pts[2].first, pts[2].second, pts[3].first, pts[3].second});
                } else {
                    out.push_back({pts[0].first, pts[0].second, pts[3].first, pts[3].second});
                    out.push_back({pts[1].first, pts[1].second, pts[2].first, pts[2].second});
                }
            }
        }
    }
    return out;
}

std::string render_chart(const SLDGrid& grid, const Eigen::MatrixXd& sle_um,
                         const ChartOptions& opt) {
    const int ns = static_cast<int>(grid.speeds.size());
    const int nd = static_cast<int>(grid.depths.size());
    const double left = 80, right = 150, top = 40, bottom = 60;
    const double pw = opt.width - left - right;
    const double ph = opt.height - top - bottom;
    const double cw = ns > 0 ? pw / ns : pw;
    const double ch = nd > 0 ? ph / nd : ph;
    const int levels = std::clamp(opt.color_levels, 2, static_cast<int>(kPalette.size()));

    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (Eigen::Index i = 0; i < sle_um.rows(); ++i)
        for (Eigen::Index j = 0; j < sle_um.cols(); ++j)
            if (grid.stable_mask(i, j) && std::isfinite(sle_um(i, j))) {
                lo = std::min(lo, sle_um(i, j));
                hi = std::max(hi, sle_um(i, j));
            }
    const bool have_sle = lo <= hi;
    if (have_sle && hi - lo < 1e-12) hi = lo + 1.0;
    const double step = have_sle ? (hi - lo) / levels : 1.0;
    auto bin = [&](double v) {
        return std::clamp(static_cast<int>(std::floor((v - lo) / step)), 0, levels - 1);
    };
    // Grid index coordinates -> image coordinates (cell centres at half-integers).
    auto px = [&](double i) { return left + (i + 0.5) * cw; };
    auto py = [&](double j) { return top + ph - (j + 0.5) * ch; };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opt.width << "\" height=\""
        << opt.height << "\" viewBox=\"0 0 " << opt.width << ' ' << opt.height << "\">\n";
    svg << "<style>rect.unstable{fill:#ffffff}text{font-family:sans-serif;font-size:12px}</style>\n";
    svg << "<text x=\"" << fmt(left) << "\" y=\"24\" font-size=\"15\">" << opt.title << "</text>\n";

    svg << "<g id=\"cells\" shape-rendering=\"crispEdges\">\n";
    for (int i = 0; i < ns; ++i) {
        for (int j = 0; j < nd; ++j) {
            const bool stable = grid.stable_mask(i, j);
            const double v = sle_um.size() > 0 ? sle_um(i, j) : std::numeric_limits<double>::quiet_NaN();
            svg << "<rect class=\"" << (stable ? "stable" : "unstable") << "\" data-i=\"" << i
                << "\" data-j=\"" << j << "\" x=\"" << fmt(left + i * cw) << "\" y=\""
                << fmt(top + ph - (j + 1) * ch) << "\" width=\"" << fmt(cw) << "\" height=\""
                << fmt(ch) << '"';
            if (stable) {
                const char* fill = have_sle && std::isfinite(v) ? kPalette[static_cast<std::size_t>(
                                                                      bin(v) * 10 / levels)]
                                                                : "#c8c8c8";
                svg << " fill=\"" << fill << '"';
                if (std::isfinite(v)) svg << " data-sle-um=\"" << format_number(v) << '"';
            }
            svg << "/>\n";
        }
    }
    svg << "</g>\n";

    // SLE contours on the stable part of the field, one dashed path per level.
    if (have_sle && ns > 1 && nd > 1) {
        Eigen::MatrixXd field = sle_um;
        for (Eigen::Index i = 0; i < field.rows(); ++i)
            for (Eigen::Index j = 0; j < field.cols(); ++j)
                if (!grid.stable_mask(i, j)) field(i, j) = std::numeric_limits<double>::quiet_NaN();
        svg << "<g id=\"contours\" fill=\"none\" stroke=\"#202020\" stroke-width=\"0.8\" "
               "stroke-dasharray=\"4 3\">\n";
        for (int k = 1; k < levels; ++k) {
            const double level = lo + k * step;
            const std::vector<ContourSegment> segs = contour_segments(field, level);
            if (segs.empty()) continue;
            svg << "<path data-level-um=\"" << format_number(level) << "\" d=\"";
            for (const ContourSegment& s : segs)
                svg << 'M' << fmt(px(s.x0)) << ' ' << fmt(py(s.y0)) << 'L' << fmt(px(s.x1)) << ' '
                    << fmt(py(s.y1));
            svg << "\"/>\n";
            const ContourSegment& mid = segs[segs.size() / 2];
            svg << "<text x=\"" << fmt(px(0.5 * (mid.x0 + mid.x1))) << "\" y=\""
                << fmt(py(0.5 * (mid.y0 + mid.y1))) << "\" font-size=\"10\" stroke=\"none\" "
                   "fill=\"#202020\">"
                << fmt(level) << "</text>\n";
        }
        svg << "</g>\n";
    }

    // Stability boundary, drawn through the interpolated depth of each column.
    if (ns > 0 && nd > 1) {
        const std::vector<double> boundary = stability_boundary(grid);
        const double d0 = grid.depths.front(), d1 = grid.depths.back();
        svg << "<polyline id=\"boundary\" fill=\"none\" stroke=\"#000000\" stroke-width=\"1.6\" points=\"";
        for (int i = 0; i < ns; ++i) {
            const double jj = (boundary[static_cast<std::size_t>(i)] - d0) / (d1 - d0) * (nd - 1);
            svg << (i ? " " : "") << fmt(px(i)) << ',' << fmt(py(jj));
        }
        svg << "\"/>\n";
    }

    // Axes and ticks.
    svg << "<g id=\"axes\" stroke=\"#000000\" fill=\"none\">\n";
    svg << "<rect x=\"" << fmt(left) << "\" y=\"" << fmt(top) << "\" width=\"" << fmt(pw)
        << "\" height=\"" << fmt(ph) << "\"/>\n</g>\n";
    constexpr int kTicks = 5;
    for (int t = 0; t < kTicks && ns > 0; ++t) {
        const int i = (ns - 1) * t / (kTicks - 1);
        svg << "<text x=\"" << fmt(px(i)) << "\" y=\"" << fmt(top + ph + 18)
            << "\" text-anchor=\"middle\">" << format_number(std::round(grid.speeds[static_cast<std::size_t>(i)]))
            << "</text>\n";
    }
    for (int t = 0; t < kTicks && nd > 0; ++t) {
        const int j = (nd - 1) * t / (kTicks - 1);
        svg << "<text x=\"" << fmt(left - 8) << "\" y=\"" << fmt(py(j) + 4)
            << "\" text-anchor=\"end\">" << fmt(grid.depths[static_cast<std::size_t>(j)] * 1e3)
            << "</text>\n";
    }
    svg << "<text x=\"" << fmt(left + pw / 2) << "\" y=\"" << fmt(opt.height - 18)
        << "\" text-anchor=\"middle\">spindle speed (rpm)</text>\n";
    svg << "<text transform=\"translate(22," << fmt(top + ph / 2)
        << ") rotate(-90)\" text-anchor=\"middle\">axial depth (mm)</text>\n";

    // Colour legend.
    if (have_sle) {
        const double lx = left + pw + 30, lh = ph / levels;
        svg << "<g id=\"legend\">\n<text x=\"" << fmt(lx) << "\" y=\"" << fmt(top - 8)
            << "\">SLE (um)</text>\n";
        for (int k = 0; k < levels; ++k) {
            const double y = top + ph - (k + 1) * lh;
            svg << "<rect x=\"" << fmt(lx) << "\" y=\"" << fmt(y) << "\" width=\"18\" height=\""
                << fmt(lh) << "\" fill=\"" << kPalette[static_cast<std::size_t>(k * 10 / levels)]
                << "\"/>\n";
            svg << "<text x=\"" << fmt(lx + 24) << "\" y=\"" << fmt(y + lh + 4) << "\">"
                << fmt(lo + k * step) << "</text>\n";
        }
        svg << "<text x=\"" << fmt(lx + 24) << "\" y=\"" << fmt(top + 4) << "\">" << fmt(hi)
            << "</text>\n</g>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

MaskCheck check_chart_mask(const std::string& svg, const SLDGrid& grid) {
    const auto ns = static_cast<Eigen::Index>(grid.speeds.size());
    const auto nd = static_cast<Eigen::Index>(grid.depths.size());
    Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic> seen =
        Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic>::Zero(ns, nd);
    MaskCheck res;
    const std::string open = "<rect class=\"";
    auto attribute = [&](std::size_t from, std::size_t until, const std::string& name) -> long {
        const std::size_t at = svg.find(name + "=\"", from);
        if (at == std::string::npos || at > until) return -1;
        return std::strtol(svg.c_str() + at + name.size() + 2, nullptr, 10);
    };
    for (std::size_t pos = svg.find(open); pos != std::string::npos; pos = svg.find(open, pos + 1)) {
        const std::size_t end = svg.find('>', pos);
        const std::size_t cls = pos + open.size();
        const bool stable = svg.compare(cls, 7, "stable\"") == 0;
        const bool unstable = svg.compare(cls, 9, "unstable\"") == 0;
        const long i = attribute(pos, end, "data-i");
        const long j = attribute(pos, end, "data-j");
        if ((!stable && !unstable) || i < 0 || j < 0) continue;
        ++res.cells;
        if (i >= ns || j >= nd) {
            ++res.mismatches;
            continue;
        }
        ++seen(i, j);
        if (stable != grid.stable_mask(i, j)) ++res.mismatches;
    }
    for (Eigen::Index i = 0; i < ns; ++i)
        for (Eigen::Index j = 0; j < nd; ++j)
            if (seen(i, j) != 1) ++res.mismatches;
    return res;
}

}  // namespace chatterlift::cli
