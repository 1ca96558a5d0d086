// SVG stability/SLE chart: one rect per grid cell (stable cells filled by a
// discrete SLE colormap, unstable cells blank), dashed labelled SLE contours
// and the stability boundary as a solid line.
#pragma once

#include "chatterlift/stability.hpp"

#include <Eigen/Dense>

#include <string>

namespace chatterlift::cli {

struct ChartOptions {
    int width = 900;
    int height = 600;
    int color_levels = 10;
    std::string title = "Stability and surface location error";
};

/// `sle_um` is speeds x depths in micrometres, NaN where no SLE is defined.
std::string render_chart(const SLDGrid& grid, const Eigen::MatrixXd& sle_um,
                         const ChartOptions& options = {});

struct MaskCheck {
    int cells = 0;       // rects found in the image
    int mismatches = 0;  // rects whose class disagrees with the mask, plus missing cells
};

/// Compares the `stable`/`unstable` class of every cell rect with the mask.
MaskCheck check_chart_mask(const std::string& svg, const SLDGrid& grid);

struct ContourSegment {
    double x0, y0, x1, y1;  // in grid index coordinates
};

/// Marching squares on a field sampled at integer (i, j); squares touching a
/// NaN corner are skipped.
std::vector<ContourSegment> contour_segments(const Eigen::MatrixXd& field, double level);

}  // namespace chatterlift::cli
