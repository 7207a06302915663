#include "mollow/segmented.hpp"

#include <Eigen/Dense>
#include <boost/math/distributions/fisher_f.hpp>
#include <cmath>
#include <numeric>
#include <limits>

#include "mollow/error.hpp"

namespace mollow {

namespace {

void check_axis(std::span<const double> x, std::span<const double> y, std::size_t min_points) {
  if (x.size() != y.size()) throw InvalidArgument("x and y differ in length");
  if (x.size() < min_points) throw InvalidArgument("need at least " + std::to_string(min_points) + " points");
  for (std::size_t i = 1; i < x.size(); ++i) {
    if (!(x[i] > x[i - 1])) throw InvalidArgument("x must be strictly increasing");
  }
}

double total_ss(std::span<const double> y) {
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(y.size());
  double ss = 0.0;
  for (double v : y) ss += (v - mean) * (v - mean);
  return ss;
}

}  // namespace

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  check_axis(x, y, 2);
  const auto n = static_cast<Eigen::Index>(x.size());
  Eigen::MatrixXd a(n, 2);
  const Eigen::Map<const Eigen::VectorXd> yv(y.data(), n);
  for (Eigen::Index i = 0; i < n; ++i) a.row(i) << 1.0, x[static_cast<std::size_t>(i)];
  const Eigen::Vector2d c = a.colPivHouseholderQr().solve(yv);
  LineFit out;
  out.intercept = c(0);
  out.slope = c(1);
  out.sse = (a * c - yv).squaredNorm();
  const double sst = total_ss(y);
  out.r_squared = sst > 0.0 ? 1.0 - out.sse / sst : 1.0;
  return out;
}

SegmentedFit fit_segmented(std::span<const double> x, std::span<const double> y) {
  check_axis(x, y, 6);
  const auto n = static_cast<Eigen::Index>(x.size());
  const Eigen::Map<const Eigen::VectorXd> yv(y.data(), n);

  SegmentedFit best;
  best.sse = std::numeric_limits<double>::infinity();
  for (Eigen::Index b = 2; b + 2 < n; ++b) {
    const double xb = x[static_cast<std::size_t>(b)];
    Eigen::MatrixXd a(n, 3);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double xi = x[static_cast<std::size_t>(i)];
      a.row(i) << 1.0, xi, std::max(xi - xb, 0.0);
    }
    const Eigen::Vector3d c = a.colPivHouseholderQr().solve(yv);
    const double sse = (a * c - yv).squaredNorm();
    if (sse < best.sse) {
      best.sse = sse;
      best.breakpoint = xb;
      best.intercept = c(0);
      best.slope_below = c(1);
      best.slope_above = c(1) + c(2);
    }
  }

  best.single = fit_line(x, y);
  const double dof = static_cast<double>(n) - 4.0;
  // Improvements at the level of round-off in the total sum of squares do not count.
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  double sst = 0.0;
  for (double v : y) sst += (v - mean) * (v - mean);
  const double floor = 1e-12 * sst;
  double gain = best.single.sse - best.sse;
  if (gain <= floor) gain = 0.0;
  if (gain == 0.0) {
    best.f_statistic = 0.0;
    best.p_value = 1.0;
  } else if (best.sse <= floor) {
    best.f_statistic = gain > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    best.p_value = gain > 0.0 ? 0.0 : 1.0;
  } else {
    best.f_statistic = (gain / 2.0) / (best.sse / dof);
    const boost::math::fisher_f dist(2.0, dof);
    best.p_value = boost::math::cdf(boost::math::complement(dist, best.f_statistic));
  }
  return best;
}

std::optional<double> locate_breakpoint(std::span<const double> x, std::span<const double> y, double alpha) {
  const SegmentedFit fit = fit_segmented(x, y);
  if (fit.p_value < alpha && fit.slope_above < fit.slope_below) return fit.breakpoint;
  return std::nullopt;
}

}  // namespace mollow
