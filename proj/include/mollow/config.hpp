#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mollow/calibration.hpp"

namespace mollow {

enum class Protocol { spectrum, linewidth_sweep, intensity_sweep, ablation, calibrate };
enum class SweepAxis { drive_J, omega };

std::string to_string(Protocol protocol);
std::string to_string(SweepAxis axis);

/// Sweep points along the drive amplitude J or along target Rabi frequencies
/// (GHz), in which case J is found from a tabulated Omega(J).
struct SweepSpec {
  SweepAxis axis = SweepAxis::omega;
  std::vector<double> values;
};

/// Spectral grid; the span is derived from the sweep unless given.
struct GridSpec {
  std::optional<double> omega_min;
  std::optional<double> omega_max;
  double spacing = 0.25;
  std::optional<double> t_max;  ///< ns
  double margin = 70.0;         ///< GHz beyond the outermost feature when the span is derived
};

struct RunConfig {
  std::string name = "run";
  Protocol protocol = Protocol::linewidth_sweep;
  SystemParams params;
  SweepSpec sweep;
  GridSpec grid;
  std::optional<int> fock;  ///< nullopt selects adaptive truncation
  int workers = 1;
  bool plot = false;
  std::filesystem::path output_dir = "out";
  std::uint64_t seed = 1;

  // calibrate protocol
  std::optional<std::filesystem::path> data;  ///< measured curve; synthetic data from `params` when absent
  double noise = 0.03;                       ///< multiplicative noise of synthetic data
  PhononRates start{0.2, 0.3};
  int calibration_fock = 4;

  /// Throws ConfigError for an empty sweep or inconsistent settings.
  void validate() const;
};

/// Parses `key = value` lines; `#` starts a comment. Unknown keys, duplicate
/// keys and malformed values are ConfigErrors that carry the line number.
RunConfig parse_config(const std::string& text, RunConfig defaults = {});
RunConfig load_config(const std::filesystem::path& path, RunConfig defaults = {});

/// Canonical `key = value` rendering that parse_config reads back unchanged.
std::string render_config(const RunConfig& config);

/// Built-in figure recipes.
const std::vector<std::string>& preset_names();
std::string preset_text(const std::string& name);
RunConfig preset_config(const std::string& name);

}  // namespace mollow
