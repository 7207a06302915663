#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "mollow/dynamics.hpp"

namespace mollow {

/// Area-parameterized Lorentzian: (2A / (pi G)) (G/2)^2 / ((w - w0)^2 + (G/2)^2).
struct LorentzianPeak {
  double center = 0.0;
  double fwhm = 1.0;
  double area = 0.0;

  [[nodiscard]] double height() const;
  [[nodiscard]] double density(double omega) const;
};

/// Sum of peaks plus a constant baseline. Throws InvalidArgument for fwhm <= 0.
std::vector<double> eval_model(std::span<const LorentzianPeak> peaks, double baseline, std::span<const double> omega);

struct LorentzianFitResult {
  std::vector<LorentzianPeak> peaks;
  double baseline = 0.0;
  double residual_norm = 0.0;
  bool converged = false;
  int iterations = 0;
  double gradient_norm = 0.0;  ///< relative: ||J^T r|| / (||J|| ||data||)
  /// 1-sigma estimates ordered (center, fwhm, area) per peak, then baseline;
  /// zero for held parameters.
  std::vector<double> parameter_uncertainties;
  bool degenerate = false;      ///< two peaks within 1e-3 GHz of each other
  bool rank_deficient = false;  ///< Jacobian lost column rank at the solution
};

/// Parameter hold flags for one peak.
struct PeakHold {
  bool center = false;
  bool fwhm = false;
  bool area = false;
};

/// Inclusive box bounds for one peak's parameters.
struct PeakBounds {
  std::pair<double, double> center{-1e300, 1e300};
  std::pair<double, double> fwhm{1e-9, 1e300};
  std::pair<double, double> area{0.0, 1e300};
};

struct FitOptions {
  std::optional<std::vector<LorentzianPeak>> init;
  std::vector<PeakHold> hold;      ///< empty or one per peak
  std::vector<PeakBounds> bounds;  ///< empty or one per peak
  bool fit_baseline = true;
  double baseline_init = 0.0;
  std::optional<std::pair<double, double>> window;  ///< restrict the fit to [lo, hi]
  double gradient_tol = 1e-10;
  int max_iterations = 200;
};

/// Local maximum with its topographic prominence: the height above the
/// higher of the two minima reached before climbing to a taller point.
struct SpectralMaximum {
  std::size_t index = 0;
  double omega = 0.0;
  double value = 0.0;
  double prominence = 0.0;
};

std::vector<SpectralMaximum> find_maxima(std::span<const double> omega, std::span<const double> values);

/// k most prominent local maxima separated by at least two grid steps, with
/// half-maximum widths and matching areas. Missing peaks are seeded at the
/// largest residual of the partial model.
std::vector<LorentzianPeak> initial_peaks(std::span<const double> omega, std::span<const double> values, int k);

/// Levenberg-Marquardt least squares of k Lorentzians plus baseline.
/// Requires at least 5k + 5 samples in the fitted range and 1 <= k <= 5.
LorentzianFitResult fit_lorentzians(const SpectrumTrace& trace, int k, const FitOptions& options = {});

/// Half the splitting of a two-peak fit whose centers have opposite signs.
double extract_rabi(const LorentzianFitResult& fit);
double extract_rabi(const LorentzianPeak& lower, const LorentzianPeak& upper);

enum class InstrumentResponse { fabry_perot, spectrometer };

/// FWHM in GHz: 0.9 for the fiber Fabry-Perot filter, 7 for the grating spectrometer.
double instrument_fwhm(InstrumentResponse response);

/// Convolution with a unit-area Lorentzian response on the trace's own grid.
SpectrumTrace instrument_convolve(const SpectrumTrace& trace, double response_fwhm);
SpectrumTrace instrument_convolve(const SpectrumTrace& trace, InstrumentResponse response);

}  // namespace mollow
