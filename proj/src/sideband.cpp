#include "mollow/sideband.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mollow/error.hpp"

namespace mollow {

std::vector<SpectralMaximum> find_maxima(const SpectrumTrace& trace) { return find_maxima(trace.omega, trace.values); }

namespace {

const SpectralMaximum* pick(const std::vector<SpectralMaximum>& maxima, bool lower_side, double min_offset,
                            std::optional<double> hint) {
  const SpectralMaximum* best = nullptr;
  for (const auto& m : maxima) {
    const bool on_side = lower_side ? m.omega < -min_offset : m.omega > min_offset;
    if (!on_side) continue;
    if (hint) {
      if (!best || std::abs(m.omega - *hint) < std::abs(best->omega - *hint)) best = &m;
    } else if (!best || m.prominence > best->prominence) {
      best = &m;
    }
  }
  return best;
}

double half_width_at(const SpectrumTrace& trace, std::size_t i) {
  const auto& y = trace.values;
  const double half = 0.5 * y[i];
  std::size_t lo = i;
  while (lo > 0 && y[lo] > half) --lo;
  std::size_t hi = i;
  while (hi + 1 < y.size() && y[hi] > half) ++hi;
  return trace.omega[hi] - trace.omega[lo];
}

double value_at(const SpectrumTrace& trace, double omega) {
  const auto it = std::lower_bound(trace.omega.begin(), trace.omega.end(), omega);
  const auto k = static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(it - trace.omega.begin(), 0,
                                                                      static_cast<std::ptrdiff_t>(trace.size()) - 1));
  return trace.values[k];
}

}  // namespace

SidebandLinewidth fit_lower_sideband(const SpectrumTrace& trace, std::optional<double> center_hint,
                                     double min_offset, std::optional<std::pair<double, double>> window) {
  const auto maxima = find_maxima(trace);
  const SpectralMaximum* m = pick(maxima, true, min_offset, center_hint);
  if (!m) throw NumericalError("no lower sideband maximum found");

  const double wl = m->omega;
  const double width0 = std::clamp(half_width_at(trace, m->index), 2.0 * trace.spacing(), std::abs(wl) / 2.0);
  const double lo = wl - 4.0 * width0 - 5.0;
  const double hi = std::min(wl / 2.0, -1.0);

  const double central_width = 5.0;
  FitOptions opt;
  opt.window = window.value_or(std::pair{lo, hi});
  opt.init = std::vector<LorentzianPeak>{
      {wl, width0, m->value * std::numbers::pi * width0 / 2.0},
      {0.0, central_width, std::max(value_at(trace, -1.0), 0.0) * std::numbers::pi * central_width / 2.0},
  };
  PeakBounds sb;
  sb.center = {wl - 5.0, wl + 5.0};
  PeakBounds central;
  central.center = {-10.0, 10.0};
  central.fwhm = {0.05, 1e300};
  opt.bounds = {sb, central};

  SidebandLinewidth out;
  out.fit = fit_lorentzians(trace, 2, opt);
  out.sideband = out.fit.peaks[0];
  out.central = out.fit.peaks[1];
  return out;
}

MollowFit fit_mollow_four(const SpectrumTrace& trace, const MollowFitOptions& options) {
  const SidebandLinewidth low = fit_lower_sideband(trace, options.lower_hint);
  const auto maxima = find_maxima(trace);
  std::optional<double> upper_hint = options.upper_hint;
  if (!upper_hint) upper_hint = -low.sideband.center;
  const SpectralMaximum* up = pick(maxima, false, 4.0, upper_hint);
  if (!up) throw NumericalError("no upper sideband maximum found");
  const double width_up = std::clamp(half_width_at(trace, up->index), 2.0 * trace.spacing(), up->omega / 2.0);

  const auto at_zero = std::min_element(maxima.begin(), maxima.end(), [](const auto& a, const auto& b) {
    return std::abs(a.omega) < std::abs(b.omega);
  });
  double central_width = 5.0;
  if (at_zero != maxima.end() && std::abs(at_zero->omega) < 4.0) {
    central_width = std::clamp(half_width_at(trace, at_zero->index), 0.5, 20.0);
  }

  FitOptions opt;
  const double cavity_area0 =
      options.held_cavity_area.value_or(0.1 * up->value * std::numbers::pi * options.kappa / 2.0);
  opt.init = std::vector<LorentzianPeak>{
      low.sideband,
      {0.0, central_width, std::max(value_at(trace, 0.0), 0.0) * std::numbers::pi * central_width / 2.0},
      {up->omega, width_up, up->value * std::numbers::pi * width_up / 2.0},
      {options.delta_c, options.kappa, cavity_area0},
  };
  PeakBounds lower_b;
  // Sidebands may move a few GHz from their seeds but never merge into the central line.
  const double wl = low.sideband.center;
  lower_b.center = {wl - 10.0, std::min(wl + 10.0, wl / 2.0)};
  PeakBounds central_b;
  central_b.center = {-5.0, 5.0};
  central_b.fwhm = {0.01, 60.0};
  lower_b.fwhm = {0.05, 60.0};
  PeakBounds upper_b;
  upper_b.center = {std::max(up->omega - 10.0, up->omega / 2.0), up->omega + 10.0};
  upper_b.fwhm = {0.05, 60.0};
  opt.bounds = {lower_b, central_b, upper_b, PeakBounds{}};
  PeakHold cavity_hold{true, true, options.held_cavity_area.has_value()};
  opt.hold = {PeakHold{}, PeakHold{}, PeakHold{}, cavity_hold};
  opt.fit_baseline = false;

  MollowFit out;
  out.fit = fit_lorentzians(trace, 4, opt);
  out.cavity_held = options.held_cavity_area.has_value();
  return out;
}

double extract_rabi(const MollowFit& fit) { return extract_rabi(fit.lower(), fit.upper()); }

double sideband_intensity_ratio(const LorentzianPeak& lower, const LorentzianPeak& upper) {
  if (!(lower.area > 1e-300)) throw NumericalError("lower sideband area vanishes");
  return upper.area / lower.area;
}

double sideband_intensity_ratio(const MollowFit& fit) { return sideband_intensity_ratio(fit.lower(), fit.upper()); }

}  // namespace mollow
