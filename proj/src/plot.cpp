#include "mollow/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "mollow/error.hpp"
#include "mollow/experiment.hpp"
#include "mollow/records.hpp"

namespace mollow {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 78.0;
constexpr double kRight = 150.0;
constexpr double kTop = 36.0;
constexpr double kBottom = 52.0;
constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string px(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Axis {
  double lo = 0.0;
  double hi = 1.0;
  double step = 0.1;
};

Axis nice_axis(double lo, double hi) {
  if (!(hi > lo)) {
    const double pad = std::max(std::abs(lo) * 0.1, 1.0);
    lo -= pad;
    hi += pad;
  }
  const double raw = (hi - lo) / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double frac = raw / mag;
  const double step = (frac < 1.5 ? 1.0 : frac < 3.5 ? 2.0 : frac < 7.5 ? 5.0 : 10.0) * mag;
  return {std::floor(lo / step) * step, std::ceil(hi / step) * step, step};
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double field(const std::string& s) {
  return s.empty() ? std::numeric_limits<double>::quiet_NaN() : std::stod(s);
}

// Rows of a simple numeric CSV after the schema and header lines.
std::vector<std::vector<double>> numeric_rows(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  std::getline(in, line);
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    for (const auto& f : split(line)) row.push_back(field(f));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::filesystem::path sibling(const std::filesystem::path& csv, const std::string& kind) {
  return csv.parent_path() / (csv.stem().string() + "_" + kind + ".svg");
}

}  // namespace

std::string render_svg(const PlotSpec& spec) {
  double xmin = std::numeric_limits<double>::infinity();
  double xmax = -xmin;
  double ymin = xmin;
  double ymax = -xmin;
  for (const auto& s : spec.series) {
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, s.y[i]);
      ymax = std::max(ymax, s.y[i]);
    }
  }
  if (!std::isfinite(xmin)) {
    xmin = ymin = 0.0;
    xmax = ymax = 1.0;
  }
  const Axis ax = nice_axis(xmin, xmax);
  const Axis ay = nice_axis(ymin, ymax);
  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  auto sx = [&](double x) { return kLeft + (x - ax.lo) / (ax.hi - ax.lo) * pw; };
  auto sy = [&](double y) { return kTop + ph - (y - ay.lo) / (ay.hi - ay.lo) * ph; };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
     << "<text x=\"" << px(kLeft + pw / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
     << escape(spec.title) << "</text>\n"
     << "<rect x=\"" << px(kLeft) << "\" y=\"" << px(kTop) << "\" width=\"" << px(pw) << "\" height=\"" << px(ph)
     << "\" fill=\"none\" stroke=\"black\"/>\n";

  const int nx = static_cast<int>(std::lround((ax.hi - ax.lo) / ax.step));
  for (int i = 0; i <= nx; ++i) {
    const double v = ax.lo + i * ax.step;
    os << "<line x1=\"" << px(sx(v)) << "\" y1=\"" << px(kTop + ph) << "\" x2=\"" << px(sx(v)) << "\" y2=\""
       << px(kTop + ph + 5) << "\" stroke=\"black\"/>\n"
       << "<text x=\"" << px(sx(v)) << "\" y=\"" << px(kTop + ph + 18) << "\" text-anchor=\"middle\">"
       << num(std::abs(v) < 1e-12 * ax.step ? 0.0 : v) << "</text>\n";
  }
  const int ny = static_cast<int>(std::lround((ay.hi - ay.lo) / ay.step));
  for (int i = 0; i <= ny; ++i) {
    const double v = ay.lo + i * ay.step;
    os << "<line x1=\"" << px(kLeft - 5) << "\" y1=\"" << px(sy(v)) << "\" x2=\"" << px(kLeft) << "\" y2=\""
       << px(sy(v)) << "\" stroke=\"black\"/>\n"
       << "<text x=\"" << px(kLeft - 8) << "\" y=\"" << px(sy(v) + 4) << "\" text-anchor=\"end\">"
       << num(std::abs(v) < 1e-12 * ay.step ? 0.0 : v) << "</text>\n";
  }
  os << "<text x=\"" << px(kLeft + pw / 2) << "\" y=\"" << px(kHeight - 12) << "\" text-anchor=\"middle\">"
     << escape(spec.x_label) << "</text>\n"
     << "<text transform=\"translate(18," << px(kTop + ph / 2) << ") rotate(-90)\" text-anchor=\"middle\">"
     << escape(spec.y_label) << "</text>\n";

  for (std::size_t k = 0; k < spec.series.size(); ++k) {
    const auto& s = spec.series[k];
    const char* color = kColors[k % std::size(kColors)];
    std::string points;
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      points += (points.empty() ? "" : " ") + px(sx(s.x[i])) + "," + px(sy(s.y[i]));
      if (s.markers) {
        os << "<circle cx=\"" << px(sx(s.x[i])) << "\" cy=\"" << px(sy(s.y[i])) << "\" r=\"2.5\" fill=\"" << color
           << "\"/>\n";
      }
    }
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"" << points << "\"/>\n";
    const double ly = kTop + 14 + 18 * static_cast<double>(k);
    os << "<line x1=\"" << px(kWidth - kRight + 12) << "\" y1=\"" << px(ly - 4) << "\" x2=\""
       << px(kWidth - kRight + 32) << "\" y2=\"" << px(ly - 4) << "\" stroke=\"" << color
       << "\" stroke-width=\"2\"/>\n"
       << "<text x=\"" << px(kWidth - kRight + 38) << "\" y=\"" << px(ly) << "\">" << escape(s.label)
       << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::vector<std::filesystem::path> write_plots(const std::filesystem::path& csv) {
  const std::string text = read_text(csv);
  const std::string schema = text.substr(0, text.find('\n'));
  std::vector<std::filesystem::path> written;
  auto emit = [&](const std::string& kind, const PlotSpec& spec) {
    const auto path = sibling(csv, kind);
    write_text(path, render_svg(spec));
    written.push_back(path);
  };

  if (schema == kSweepSchema) {
    const auto records = read_sweep_csv(csv);
    std::vector<std::string> variants;
    for (const auto& r : records) {
      if (std::find(variants.begin(), variants.end(), r.variant) == variants.end()) variants.push_back(r.variant);
    }
    PlotSpec fwhm{"Lower sideband linewidth", "|Omega/2pi|^2 (GHz^2)", "FWHM (GHz)", {}};
    PlotSpec ratio{"Sideband intensity ratio", "Omega/2pi (GHz)", "area high / area low", {}};
    for (const auto& v : variants) {
      PlotSeries a{v, {}, {}};
      PlotSeries b{v, {}, {}};
      for (const auto& r : records) {
        if (r.variant != v || !r.ok()) continue;
        a.x.push_back(r.omega_sq());
        a.y.push_back(r.lower_fwhm);
        b.x.push_back(r.omega);
        b.y.push_back(r.area_ratio());
      }
      fwhm.series.push_back(std::move(a));
      ratio.series.push_back(std::move(b));
    }
    emit("fwhm", fwhm);
    emit("ratio", ratio);
  } else if (schema == kSpectrumSchema) {
    PlotSeries s{"incoherent", {}, {}, false};
    for (const auto& row : numeric_rows(text)) {
      s.x.push_back(row.at(0));
      s.y.push_back(row.at(1));
    }
    emit("spectrum", PlotSpec{"Emission spectrum", "omega' (GHz)", "spectral density (arb.)", {s}});
  } else if (schema == kCalibrationSchema) {
    PlotSeries measured{"measured", {}, {}};
    PlotSeries fitted{"fitted", {}, {}, false};
    for (const auto& row : numeric_rows(text)) {
      measured.x.push_back(row.at(0));
      measured.y.push_back(row.at(1));
      fitted.x.push_back(row.at(0));
      fitted.y.push_back(row.at(3));
    }
    emit("fit", PlotSpec{"Phonon-rate calibration", "|Omega/2pi|^2 (GHz^2)", "FWHM (GHz)", {measured, fitted}});
  } else {
    throw ConfigError(csv.string() + ": unrecognized schema line '" + schema + "'");
  }
  return written;
}

}  // namespace mollow
