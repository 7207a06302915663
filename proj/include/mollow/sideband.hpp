#pragma once

#include <optional>

#include "mollow/lorentzian.hpp"

namespace mollow {

std::vector<SpectralMaximum> find_maxima(const SpectrumTrace& trace);

/// Lower-sideband linewidth protocol: one Lorentzian for the sideband and one
/// for the central (laser-line) component, fitted on a window that reaches from
/// the sideband's far wing to half way towards the laser.
struct SidebandLinewidth {
  LorentzianPeak sideband;
  LorentzianPeak central;
  LorentzianFitResult fit;
};

/// `center_hint` (GHz, negative) selects the maximum nearest to it;
/// otherwise the most prominent maximum below -`min_offset` is used.
/// A fixed `window` replaces the data-driven one, which keeps the result a
/// smooth function of the model parameters.
SidebandLinewidth fit_lower_sideband(const SpectrumTrace& trace, std::optional<double> center_hint = std::nullopt,
                                     double min_offset = 4.0,
                                     std::optional<std::pair<double, double>> window = std::nullopt);

/// Four-peak Mollow decomposition: lower sideband, central line, upper
/// sideband and the cavity. The cavity peak sits at delta_c with FWHM kappa;
/// its area is free unless `held_cavity_area` is given.
struct MollowFitOptions {
  double delta_c = 0.0;
  double kappa = 36.0;
  std::optional<double> held_cavity_area;
  std::optional<double> lower_hint;
  std::optional<double> upper_hint;
};

struct MollowFit {
  static constexpr std::size_t kLower = 0;
  static constexpr std::size_t kCentral = 1;
  static constexpr std::size_t kUpper = 2;
  static constexpr std::size_t kCavity = 3;

  LorentzianFitResult fit;
  bool cavity_held = false;

  [[nodiscard]] const LorentzianPeak& lower() const { return fit.peaks.at(kLower); }
  [[nodiscard]] const LorentzianPeak& central() const { return fit.peaks.at(kCentral); }
  [[nodiscard]] const LorentzianPeak& upper() const { return fit.peaks.at(kUpper); }
  [[nodiscard]] const LorentzianPeak& cavity() const { return fit.peaks.at(kCavity); }
};

MollowFit fit_mollow_four(const SpectrumTrace& trace, const MollowFitOptions& options);

/// Omega = (upper - lower) / 2 from the labelled sidebands.
double extract_rabi(const MollowFit& fit);

/// area(upper) / area(lower); throws NumericalError for a vanishing lower area.
double sideband_intensity_ratio(const MollowFit& fit);
double sideband_intensity_ratio(const LorentzianPeak& lower, const LorentzianPeak& upper);

}  // namespace mollow
