#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mollow/config.hpp"
#include "mollow/records.hpp"

namespace mollow {

inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr const char* kMetadataSchema = "mollow-metadata v1";
inline constexpr const char* kCalibrationSchema = "# mollow-calibration v1";

/// Process exit codes shared by the library and the command line tool.
enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitNumerical = 3, kExitIo = 4 };

/// Run fails (exit code 3) when more than this fraction of points fail.
inline constexpr double kFailureThreshold = 0.2;

/// Cavity fits are held when the upper sideband is this close to the cavity (GHz).
inline constexpr double kCavityWindow = 10.0;

/// Everything needed to recompute one sweep row.
struct PointSpec {
  std::size_t index = 0;
  std::string variant = "base";
  SystemParams params;  ///< drive_J set; fock_dim used when `fock` is set
  double omega_target = std::numeric_limits<double>::quiet_NaN();
  std::optional<int> fock;  ///< nullopt: adaptive truncation
  SpectrumGrid grid;
  std::optional<double> t_max;
  std::optional<double> held_cavity_area;
};

struct PointOutcome {
  SweepRecord record;
  double t_max = 0.0;
  std::string error;  ///< empty on success
  int lower_iterations = 0;
  double lower_gradient = 0.0;
  int four_iterations = 0;
  double four_gradient = 0.0;
  std::vector<int> fock_history;
};

/// Simulate one point and run both fit protocols: the two-Lorentzian lower
/// sideband linewidth (raw and through the 0.9 GHz filter) and the
/// four-Lorentzian decomposition for Omega, upper sideband and areas.
/// Failures are reported in the outcome, never thrown.
PointOutcome evaluate_point(const PointSpec& spec);

/// Parameter sets of a protocol: one "base" entry, or the three ablation
/// variants no_dephasing, dephasing_only and full.
std::vector<std::pair<std::string, SystemParams>> protocol_variants(const RunConfig& config);

/// Symmetric spectral grid wide enough for the largest expected Rabi
/// frequency and the cavity, unless the config fixes it.
SpectrumGrid resolve_grid(const RunConfig& config, double omega_reach);

/// Rough Rabi frequency of a cavity drive, 2 g |sqrt(kappa) J / (delta_c - i kappa/2)|.
double estimated_rabi(const SystemParams& p);

struct SpotCheckReport {
  std::vector<std::size_t> rows;  ///< zero-based data rows that were recomputed
  std::vector<bool> matches;
  [[nodiscard]] bool passed() const;
};

struct RunSummary {
  std::filesystem::path csv;
  std::filesystem::path metadata;
  std::vector<std::filesystem::path> plots;
  std::size_t points = 0;
  std::size_t failures = 0;
  SpotCheckReport spot_check;
  std::vector<SweepRecord> records;  ///< empty for the spectrum and calibrate protocols

  [[nodiscard]] int exit_code() const;
};

/// Runs the configured protocol and writes <name>.csv, <name>.json and,
/// with plotting on, SVG figures derived from the CSV. Throws ConfigError,
/// IoError or NumericalError for run-level failures; per-point failures are
/// recorded in the rows.
RunSummary run(const RunConfig& config);

/// Recomputes `count` rows drawn with the given seed from the parameters
/// recorded in the metadata file and compares them with the CSV text.
SpotCheckReport spot_check(const std::filesystem::path& metadata, const std::filesystem::path& csv, int count,
                           std::uint64_t seed);

}  // namespace mollow
