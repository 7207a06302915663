#pragma once

#include <optional>
#include <span>

namespace mollow {

/// Ordinary least-squares line y = intercept + slope x.
struct LineFit {
  double intercept = 0.0;
  double slope = 0.0;
  double sse = 0.0;
  double r_squared = 0.0;
};

LineFit fit_line(std::span<const double> x, std::span<const double> y);

/// Continuous two-segment model y = c0 + s_below x + (s_above - s_below) (x - x_b)_+,
/// with the breakpoint x_b scanned over interior sample points.
struct SegmentedFit {
  double breakpoint = 0.0;
  double intercept = 0.0;
  double slope_below = 0.0;
  double slope_above = 0.0;
  double sse = 0.0;
  LineFit single;           ///< the one-line alternative
  double f_statistic = 0.0;  ///< two-segment vs one line, (2, n - 4) degrees of freedom
  double p_value = 1.0;
};

/// Needs at least 6 points with strictly increasing x; each side of the
/// breakpoint keeps at least three samples including the knee.
SegmentedFit fit_segmented(std::span<const double> x, std::span<const double> y);

/// Breakpoint of a significant (p < alpha) concave knee, i.e. the slope
/// drops across it; nullopt when a single line explains the data or the
/// curve only steepens.
std::optional<double> locate_breakpoint(std::span<const double> x, std::span<const double> y, double alpha = 0.01);

}  // namespace mollow
