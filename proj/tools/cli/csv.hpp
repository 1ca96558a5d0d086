// Fixed CSV layouts. Numbers are written with 12 significant digits through
// std::to_chars, so output does not depend on the locale.
#pragma once

#include "chatterlift/stability.hpp"
#include "chatterlift/surface_error.hpp"

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace chatterlift::cli {

inline constexpr const char* kSldHeader = "omega_rpm,ap_mm,spectral_radius,stable";
inline constexpr const char* kSleHeader = "omega_rpm,sle_um,valid";
inline constexpr const char* kConvergenceHeader = "m,mu_re,mu_im,rel_err";

std::string format_number(double v);

/// Speed-major rows; invalid cells carry spectral_radius "nan" and stable 0.
void write_sld_csv(std::ostream& os, const SLDGrid& grid);
void write_sle_csv(std::ostream& os, const SLEMap& map);
void write_convergence_csv(std::ostream& os, std::span<const ConvergenceRecord> records);

/// Inverse of write_sld_csv. Throws std::runtime_error naming the line on bad input.
SLDGrid read_sld_csv(std::istream& is);
SLEMap read_sle_csv(std::istream& is);
std::vector<ConvergenceRecord> read_convergence_csv(std::istream& is);

/// Writes through a temporary stream and reports I/O failure with the path.
void write_file(const std::string& path, const std::string& contents);

}  // namespace chatterlift::cli
