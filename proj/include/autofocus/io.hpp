#pragma once

// Persistence: exact CSV for images, measurements, geometry and kernels;
// PGM and SVG previews; atomic file writes.

#include "autofocus/evaluate.hpp"
#include "autofocus/model.hpp"

#include <json.hpp>

#include <filesystem>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace autofocus {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// 17 significant digits; parses back to the same double.
std::string format_double(double v);

/// Writes to a temporary sibling then renames over `path`. Creates parent directories.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

/// ix,iy,re,im for every pixel in linear order.
std::string image_csv(const CVec& values, GridShape shape);
CVec parse_image_csv(const std::string& text, GridShape shape);

/// m,k,freq_hz,re,im; k runs over all rows of pair m (scan position major).
std::string measurements_csv(const MeasurementSet& meas);
/// Fills meas.y from CSV text; pairs and freqs must already be set.
void parse_measurements_csv(const std::string& text, MeasurementSet& meas);

/// m,p,tx_x,tx_y,rx_x,rx_y,tx_true_x,tx_true_y,rx_true_x,rx_true_y,ap_x,ap_y
/// with one row per pair and scan position (p = 0 only without an aperture).
std::string geometry_csv(const std::vector<AntennaPair>& pairs);
std::vector<AntennaPair> parse_geometry_csv(const std::string& text);

/// m,dx,dy,value for every kernel entry.
std::string kernels_csv(const std::vector<ShiftKernel>& kernels);
std::vector<ShiftKernel> parse_kernels_csv(const std::string& text);

/// Binary 8-bit PGM of |x| scaled so the maximum maps to 255.
std::string pgm_image(const CVec& values, GridShape shape);

/// Line plot of Pd against Pfa, one polyline per named curve.
std::string roc_svg(const std::vector<std::pair<std::string, RocCurve>>& curves, const std::string& title);

/// 64-bit FNV-1a of a byte string, as 16 hex digits.
std::string fnv1a_hex(const std::string& bytes);

}  // namespace autofocus
