#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace mollow {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  bool markers = true;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<PlotSeries> series;
};

/// Self-contained SVG line chart. Non-finite points are skipped.
std::string render_svg(const PlotSpec& spec);

/// Figures derived solely from an output CSV, written next to it as
/// <stem>_<kind>.svg. The CSV schema line selects the figure set:
/// sweeps give FWHM versus Omega^2 and area ratio versus Omega, spectra give
/// the spectral density, calibrations give measured and fitted linewidths.
std::vector<std::filesystem::path> write_plots(const std::filesystem::path& csv);

}  // namespace mollow
