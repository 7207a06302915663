#pragma once

#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "mollow/calibration.hpp"
#include "mollow/segmented.hpp"

namespace mollow {

inline constexpr const char* kSweepSchema = "# mollow-sweep v1";
inline constexpr const char* kLinewidthSchema = "# mollow-linewidth v1";
inline constexpr const char* kSpectrumSchema = "# mollow-spectrum v1";

/// Per-point status written to the CSV; details go to the JSON metadata.
enum class PointStatus { ok, numerical, invalid };

std::string to_string(PointStatus status);

/// One sweep point. Missing values (failed fits, no upper sideband) are NaN
/// and written as empty CSV fields.
struct SweepRecord {
  std::size_t index = 0;
  std::string variant = "base";
  double drive_J = 0.0;
  double omega_target = std::numeric_limits<double>::quiet_NaN();
  double omega = std::numeric_limits<double>::quiet_NaN();  ///< extracted Rabi frequency, GHz
  double lower_center = std::numeric_limits<double>::quiet_NaN();
  double lower_fwhm = std::numeric_limits<double>::quiet_NaN();
  double lower_fwhm_filtered = std::numeric_limits<double>::quiet_NaN();  ///< after the 0.9 GHz filter
  double upper_center = std::numeric_limits<double>::quiet_NaN();
  double upper_fwhm = std::numeric_limits<double>::quiet_NaN();
  double area_low = std::numeric_limits<double>::quiet_NaN();
  double area_high = std::numeric_limits<double>::quiet_NaN();
  double cavity_area = std::numeric_limits<double>::quiet_NaN();
  bool cavity_held = false;
  int fock_used = 0;
  double top_fock_population = std::numeric_limits<double>::quiet_NaN();
  bool lower_converged = false;
  bool four_converged = false;
  PointStatus status = PointStatus::ok;

  [[nodiscard]] double omega_sq() const { return omega * omega; }
  [[nodiscard]] double area_ratio() const { return area_high / area_low; }
  [[nodiscard]] bool ok() const { return status == PointStatus::ok; }
};

/// Nine significant digits; NaN becomes an empty field.
std::string format_value(double value);

std::string sweep_csv_header();
std::string sweep_csv_row(const SweepRecord& record);
/// Schema line, column line and one row per record, in the given order.
std::string sweep_csv(const std::vector<SweepRecord>& records);
std::vector<SweepRecord> read_sweep_csv(const std::filesystem::path& path);

/// Writes text atomically enough for our purposes; throws IoError.
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

/// Reads a linewidth curve: optional schema line, then a header naming
/// omega_sq_GHz2, fwhm_GHz and optionally fwhm_sigma_GHz. Rows must have
/// strictly increasing omega_sq; violations are ConfigErrors with line numbers.
LinewidthCurve import_experimental(const std::filesystem::path& path);
LinewidthCurve parse_linewidth_csv(const std::string& text, const std::string& source = "<input>");
std::string linewidth_csv(const LinewidthCurve& curve);

/// Curve of one variant's successful rows, sorted by Omega^2.
LinewidthCurve curve_from_records(const std::vector<SweepRecord>& records, const std::string& variant = "base");

/// Segmented-regression analysis of lower_fwhm versus Omega^2 over the
/// successful rows of one variant.
struct TransitionReport {
  std::optional<double> breakpoint;  ///< GHz^2; nullopt when a single line suffices
  double crossing = 0.0;             ///< delta_cx^2, where the upper sideband meets the cavity
  SegmentedFit fit;
};

/// Needs at least 6 usable points.
TransitionReport transition_locator(const std::vector<SweepRecord>& records, double delta_cx,
                                    const std::string& variant = "base");

}  // namespace mollow
