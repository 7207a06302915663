#pragma once

#include <array>
#include <map>
#include <mutex>
#include <optional>
#include <utility>
#include <vector>

#include "mollow/sideband.hpp"

namespace mollow {

/// Fractional FWHM uncertainty assumed for points without a sigma.
inline constexpr double kDefaultSigmaFraction = 0.05;

struct LinewidthPoint {
  double omega_sq = 0.0;  ///< |Omega/2pi|^2 in GHz^2
  double fwhm = 0.0;      ///< GHz
  std::optional<double> fwhm_sigma;
};

/// Lower-sideband linewidth versus squared Rabi frequency at one detuning.
/// The phonon rates inside `fixed_params` are ignored by the calibration.
struct LinewidthCurve {
  std::vector<LinewidthPoint> points;
  double delta_cx = 0.0;
  SystemParams fixed_params;

  /// Throws InvalidArgument unless omega_sq is strictly increasing and every
  /// fwhm (and sigma, if given) is positive and finite.
  void validate() const;
  [[nodiscard]] std::vector<double> omega_sq() const;
  [[nodiscard]] std::vector<double> fwhm() const;
  /// Given sigmas, with kDefaultSigmaFraction * fwhm substituted where absent.
  [[nodiscard]] std::vector<double> sigmas() const;
  [[nodiscard]] bool sigma_defaulted() const;
};

using PhononRates = std::pair<double, double>;  ///< (gamma_ph_ads, gamma_ph_asp) in GHz

struct ForwardModelSettings {
  int fock_dim = 4;
  Frame frame = Frame::displaced;
  double spacing = 0.25;  ///< GHz, spectral grid step
  /// The grid only spans the lower half of the spectrum, so sampling at its
  /// Nyquist rate already folds the upper sideband and cavity far outside it.
  double oversample = 1.0;
  std::optional<double> t_max;  ///< ns; default from the decay rates at the largest drive
  double window_margin = 70.0;  ///< GHz below the lower sideband kept on the grid
  PhononRates reference_rates{0.2, 0.3};  ///< rates at which Omega(J) is tabulated
  int table_size = 32;
  int workers = 1;
};

/// Lower-sideband FWHM as a function of the phonon rates and the Rabi
/// frequency, with Omega mapped to the drive J through a tabulated Omega(J)
/// relation and each (rates, J) evaluation memoized.
class ForwardModel {
 public:
  ForwardModel(SystemParams base, ForwardModelSettings settings = {});

  /// Builds (once) the Omega(J) table covering [omega_lo, omega_hi] GHz.
  void prepare(double omega_lo, double omega_hi);
  /// Drive J with Omega(J) = omega, by monotone linear interpolation of the
  /// table. Throws NumericalError outside the tabulated range.
  [[nodiscard]] double drive_for(double omega) const;
  /// FWHM of the lower sideband at the given rates and drive J.
  double linewidth(const PhononRates& rates, double drive_j, double omega_hint);
  std::vector<double> predict(const PhononRates& rates, const std::vector<double>& omega_sq);

  [[nodiscard]] const SystemParams& base() const { return base_; }
  [[nodiscard]] const ForwardModelSettings& settings() const { return settings_; }
  [[nodiscard]] const std::vector<std::pair<double, double>>& table() const { return table_; }  ///< (J, Omega)
  [[nodiscard]] std::size_t evaluations() const;
  [[nodiscard]] std::size_t cache_hits() const;
  [[nodiscard]] double t_max() const { return t_max_; }

 private:
  SystemParams base_;
  ForwardModelSettings settings_;
  std::vector<std::pair<double, double>> table_;
  double t_max_ = 0.0;
  double omega_max_ = 0.0;
  mutable std::mutex mutex_;
  std::map<std::array<double, 3>, double> cache_;
  std::size_t evaluations_ = 0;
  std::size_t hits_ = 0;
};

/// Predicted lower-sideband FWHM at every omega_sq of the template curve.
std::vector<double> predict_linewidths(const PhononRates& rates, const LinewidthCurve& curve, ForwardModel& model);

struct PhononFitOptions {
  PhononRates start{0.2, 0.3};
  int max_iterations = 50;
  double fd_step = 1e-2;    ///< GHz, forward-difference step
  double step_tol = 1e-4;   ///< GHz, stop when both rates move less than this
};

struct PhononFitResult {
  double gamma_ph_ads = 0.0;
  double gamma_ph_asp = 0.0;
  double sigma_ads = 0.0;
  double sigma_asp = 0.0;
  double correlation = 0.0;  ///< between the two rate estimates
  double residual_norm = 0.0;  ///< sqrt of the weighted objective
  LinewidthCurve curve_predicted;
  bool converged = false;
  bool clamped = false;  ///< an iterate had a negative rate set to zero
  int iterations = 0;
  std::vector<double> objective_log;  ///< weighted objective after each accepted step, starting point first
  std::vector<PhononRates> rate_log;
};

/// Damped Gauss-Newton on the weighted residuals (predicted - measured) / sigma
/// with a forward-difference Jacobian. The covariance is the linearized
/// (J^T J)^-1 scaled by the reduced chi-square. Points may come in any order.
/// Throws NumericalError when not converged after max_iterations.
PhononFitResult fit_phonon_rates(const LinewidthCurve& data, ForwardModel& model, const PhononFitOptions& options = {});

}  // namespace mollow
