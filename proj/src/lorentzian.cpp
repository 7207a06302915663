#include "mollow/lorentzian.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "mollow/error.hpp"

namespace mollow {

double LorentzianPeak::height() const { return 2.0 * area / (std::numbers::pi * fwhm); }

double LorentzianPeak::density(double omega) const {
  const double h = 0.5 * fwhm;
  const double u = omega - center;
  return area / std::numbers::pi * h / (u * u + h * h);
}

std::vector<double> eval_model(std::span<const LorentzianPeak> peaks, double baseline, std::span<const double> omega) {
  for (const auto& p : peaks) {
    if (!(p.fwhm > 0.0)) throw InvalidArgument("Lorentzian fwhm must be positive");
  }
  std::vector<double> out(omega.size(), baseline);
  for (std::size_t i = 0; i < omega.size(); ++i) {
    for (const auto& p : peaks) out[i] += p.density(omega[i]);
  }
  return out;
}

namespace {

double half_max_width(std::span<const double> omega, std::span<const double> values, std::size_t i, double floor) {
  const double half = floor + 0.5 * (values[i] - floor);
  std::size_t lo = i;
  while (lo > 0 && values[lo] > half) --lo;
  std::size_t hi = i;
  while (hi + 1 < values.size() && values[hi] > half) ++hi;
  return omega[hi] - omega[lo];
}

}  // namespace

std::vector<SpectralMaximum> find_maxima(std::span<const double> omega, std::span<const double> y) {
  const std::size_t n = y.size();
  if (omega.size() != n) throw InvalidArgument("grid and values differ in length");
  std::vector<SpectralMaximum> out;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (!(y[i] > y[i - 1] && y[i] >= y[i + 1])) continue;
    double left_min = y[i];
    std::size_t l = i;
    while (l > 0 && y[l - 1] <= y[i]) left_min = std::min(left_min, y[--l]);
    double right_min = y[i];
    std::size_t r = i;
    while (r + 1 < n && y[r + 1] <= y[i]) right_min = std::min(right_min, y[++r]);
    out.push_back({i, omega[i], y[i], y[i] - std::max(left_min, right_min)});
  }
  return out;
}

std::vector<LorentzianPeak> initial_peaks(std::span<const double> omega, std::span<const double> values, int k) {
  const std::size_t n = values.size();
  if (n < 3 || omega.size() != n) throw InvalidArgument("initial_peaks needs at least three samples");
  const double step = std::abs(omega[1] - omega[0]);
  const double floor = *std::min_element(values.begin(), values.end());
  const double span = std::abs(omega.back() - omega.front());

  // Ranking by prominence keeps noise ripples on one peak from masking the next.
  auto maxima = find_maxima(omega, values);
  std::stable_sort(maxima.begin(), maxima.end(), [](const auto& a, const auto& b) { return a.prominence > b.prominence; });

  std::vector<std::size_t> chosen;
  for (const auto& m : maxima) {
    if (static_cast<int>(chosen.size()) == k) break;
    const bool separated = std::all_of(chosen.begin(), chosen.end(), [&](auto j) {
      return std::abs(m.omega - omega[j]) >= 2.0 * step * (1.0 - 1e-9);
    });
    if (separated) chosen.push_back(m.index);
  }

  std::vector<LorentzianPeak> peaks;
  for (auto i : chosen) {
    const double width = std::clamp(half_max_width(omega, values, i, floor), 2.0 * step, 0.5 * span);
    peaks.push_back({omega[i], width, std::max(values[i] - floor, 0.0) * std::numbers::pi * width / 2.0});
  }
  while (static_cast<int>(peaks.size()) < k) {
    const auto model = eval_model(peaks, floor, omega);
    std::size_t best = 0;
    for (std::size_t i = 1; i < n; ++i) {
      if (values[i] - model[i] > values[best] - model[best]) best = i;
    }
    const double excess = std::max(values[best] - model[best], 0.0);
    const double width = std::max(4.0 * step, span / 20.0);
    peaks.push_back({omega[best], width, excess * std::numbers::pi * width / 2.0});
  }
  std::sort(peaks.begin(), peaks.end(), [](const auto& a, const auto& b) { return a.center < b.center; });
  return peaks;
}

namespace {

Eigen::VectorXd pack(const std::vector<LorentzianPeak>& peaks, double baseline) {
  Eigen::VectorXd p(3 * peaks.size() + 1);
  for (std::size_t j = 0; j < peaks.size(); ++j) {
    p(3 * j) = peaks[j].center;
    p(3 * j + 1) = peaks[j].fwhm;
    p(3 * j + 2) = peaks[j].area;
  }
  p(p.size() - 1) = baseline;
  return p;
}

std::vector<LorentzianPeak> unpack(const Eigen::VectorXd& p, int k) {
  std::vector<LorentzianPeak> peaks(static_cast<std::size_t>(k));
  for (int j = 0; j < k; ++j) peaks[j] = {p(3 * j), p(3 * j + 1), p(3 * j + 2)};
  return peaks;
}

void project(Eigen::VectorXd& p, const std::vector<PeakBounds>& bounds, int k) {
  for (int j = 0; j < k; ++j) {
    const auto& b = bounds[j];
    p(3 * j) = std::clamp(p(3 * j), b.center.first, b.center.second);
    p(3 * j + 1) = std::clamp(p(3 * j + 1), std::max(b.fwhm.first, 1e-12), b.fwhm.second);
    p(3 * j + 2) = std::clamp(p(3 * j + 2), b.area.first, b.area.second);
  }
}

// Residuals model - data and the Jacobian with respect to all parameters.
void evaluate(const Eigen::VectorXd& p, int k, std::span<const double> w, std::span<const double> y,
              Eigen::VectorXd& r, Eigen::MatrixXd* jac) {
  const auto m = static_cast<Eigen::Index>(w.size());
  r.resize(m);
  if (jac) jac->setZero(m, p.size());
  const double baseline = p(p.size() - 1);
  for (Eigen::Index i = 0; i < m; ++i) {
    double model = baseline;
    for (int j = 0; j < k; ++j) {
      const double c = p(3 * j);
      const double h = 0.5 * p(3 * j + 1);
      const double a = p(3 * j + 2);
      const double u = w[i] - c;
      const double den = u * u + h * h;
      model += a / std::numbers::pi * h / den;
      if (jac) {
        (*jac)(i, 3 * j) = a / std::numbers::pi * h * 2.0 * u / (den * den);
        (*jac)(i, 3 * j + 1) = a / (2.0 * std::numbers::pi) * (u * u - h * h) / (den * den);
        (*jac)(i, 3 * j + 2) = h / (std::numbers::pi * den);
      }
    }
    if (jac) (*jac)(i, p.size() - 1) = 1.0;
    r(i) = model - y[i];
  }
}

}  // namespace

LorentzianFitResult fit_lorentzians(const SpectrumTrace& trace, int k, const FitOptions& options) {
  if (k < 1 || k > 5) throw InvalidArgument("fit_lorentzians supports 1..5 peaks");
  if (trace.omega.size() != trace.values.size()) throw InvalidArgument("trace grid and values differ in length");

  std::size_t first = 0;
  std::size_t last = trace.omega.size();
  if (options.window) {
    while (first < last && trace.omega[first] < options.window->first) ++first;
    while (last > first && trace.omega[last - 1] > options.window->second) --last;
  }
  const std::span<const double> w(trace.omega.data() + first, last - first);
  const std::span<const double> y(trace.values.data() + first, last - first);
  if (w.size() < static_cast<std::size_t>(5 * k + 5)) {
    throw InvalidArgument("fit needs at least " + std::to_string(5 * k + 5) + " samples, got " +
                          std::to_string(w.size()));
  }
  if ((!options.hold.empty() && options.hold.size() != static_cast<std::size_t>(k)) ||
      (!options.bounds.empty() && options.bounds.size() != static_cast<std::size_t>(k))) {
    throw InvalidArgument("hold/bounds must have one entry per peak");
  }

  std::vector<LorentzianPeak> init = options.init ? *options.init : initial_peaks(w, y, k);
  if (init.size() != static_cast<std::size_t>(k)) throw InvalidArgument("init must provide k peaks");
  const std::vector<PeakHold> hold = options.hold.empty() ? std::vector<PeakHold>(k) : options.hold;
  const std::vector<PeakBounds> bounds = options.bounds.empty() ? std::vector<PeakBounds>(k) : options.bounds;

  std::vector<int> free;
  for (int j = 0; j < k; ++j) {
    if (!hold[j].center) free.push_back(3 * j);
    if (!hold[j].fwhm) free.push_back(3 * j + 1);
    if (!hold[j].area) free.push_back(3 * j + 2);
  }
  if (options.fit_baseline) free.push_back(3 * k);
  const auto nf = static_cast<Eigen::Index>(free.size());

  Eigen::VectorXd p = pack(init, options.baseline_init);
  project(p, bounds, k);

  const double data_norm = std::max(Eigen::Map<const Eigen::VectorXd>(y.data(), y.size()).norm(), 1e-300);

  Eigen::VectorXd r;
  Eigen::MatrixXd jac_full;
  evaluate(p, k, w, y, r, &jac_full);
  double cost = r.squaredNorm();

  auto reduced = [&](const Eigen::MatrixXd& full) {
    Eigen::MatrixXd jr(full.rows(), nf);
    for (Eigen::Index c = 0; c < nf; ++c) jr.col(c) = full.col(free[c]);
    return jr;
  };

  // Lower/upper bound of each full-vector parameter, for the active set.
  Eigen::VectorXd lower(3 * k + 1);
  Eigen::VectorXd upper(3 * k + 1);
  for (int j = 0; j < k; ++j) {
    lower(3 * j) = bounds[j].center.first;
    upper(3 * j) = bounds[j].center.second;
    lower(3 * j + 1) = std::max(bounds[j].fwhm.first, 1e-12);
    upper(3 * j + 1) = bounds[j].fwhm.second;
    lower(3 * j + 2) = bounds[j].area.first;
    upper(3 * j + 2) = bounds[j].area.second;
  }
  lower(3 * k) = -1e300;
  upper(3 * k) = 1e300;

  // Parameters pinned at a bound with the descent direction pointing outward.
  auto active_mask = [&](const Eigen::VectorXd& grad) {
    std::vector<bool> active(static_cast<std::size_t>(nf), false);
    for (Eigen::Index c = 0; c < nf; ++c) {
      const double v = p(free[c]);
      active[c] = (v <= lower(free[c]) && grad(c) > 0.0) || (v >= upper(free[c]) && grad(c) < 0.0);
    }
    return active;
  };
  auto projected_grad_norm = [&](const Eigen::MatrixXd& jac, const Eigen::VectorXd& res) {
    Eigen::VectorXd grad = jac.transpose() * res;
    const auto active = active_mask(grad);
    for (Eigen::Index c = 0; c < nf; ++c) {
      if (active[c]) grad(c) = 0.0;
    }
    return grad.norm() / (std::max(jac.norm(), 1e-300) * data_norm);
  };

  LorentzianFitResult result;
  double lambda = 1e-3;
  Eigen::MatrixXd jac = reduced(jac_full);
  double rel_grad = projected_grad_norm(jac, r);
  int iter = 0;
  for (; iter < options.max_iterations && rel_grad >= options.gradient_tol; ++iter) {
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::VectorXd grad = jac.transpose() * r;
    const auto active = active_mask(grad);
    bool accepted = false;
    while (!accepted && lambda < 1e16) {
      Eigen::MatrixXd a = jtj;
      Eigen::VectorXd rhs = -grad;
      for (Eigen::Index c = 0; c < nf; ++c) {
        a(c, c) += lambda * std::max(jtj(c, c), 1e-300);
        if (active[c]) {
          a.row(c).setZero();
          a.col(c).setZero();
          a(c, c) = 1.0;
          rhs(c) = 0.0;
        }
      }
      const Eigen::VectorXd delta = a.ldlt().solve(rhs);
      Eigen::VectorXd trial = p;
      for (Eigen::Index c = 0; c < nf; ++c) trial(free[c]) += delta(c);
      project(trial, bounds, k);
      Eigen::VectorXd r_trial;
      evaluate(trial, k, w, y, r_trial, nullptr);
      const double trial_cost = r_trial.squaredNorm();
      if (std::isfinite(trial_cost) && trial_cost < cost) {
        p = trial;
        cost = trial_cost;
        lambda = std::max(lambda / 10.0, 1e-12);
        accepted = true;
      } else {
        lambda *= 10.0;
      }
    }
    if (!accepted) break;
    evaluate(p, k, w, y, r, &jac_full);
    jac = reduced(jac_full);
    rel_grad = projected_grad_norm(jac, r);
  }

  result.peaks = unpack(p, k);
  result.baseline = p(3 * k);
  result.residual_norm = std::sqrt(cost);
  result.iterations = iter;
  result.gradient_norm = rel_grad;
  result.converged = rel_grad < options.gradient_tol;

  // Column-scaled rank check and linearized covariance.
  Eigen::VectorXd scale(nf);
  for (Eigen::Index c = 0; c < nf; ++c) scale(c) = std::max(jac.col(c).norm(), 1e-300);
  const Eigen::MatrixXd js = jac * scale.cwiseInverse().asDiagonal();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(js);
  qr.setThreshold(1e-10);
  result.rank_deficient = qr.rank() < nf;

  result.parameter_uncertainties.assign(static_cast<std::size_t>(3 * k + 1), 0.0);
  const auto dof = static_cast<double>(w.size()) - static_cast<double>(nf);
  if (!result.rank_deficient && dof > 0) {
    const double s2 = cost / dof;
    const Eigen::MatrixXd cov_scaled = (js.transpose() * js).inverse();
    for (Eigen::Index c = 0; c < nf; ++c) {
      result.parameter_uncertainties[static_cast<std::size_t>(free[c])] =
          std::sqrt(std::max(cov_scaled(c, c) * s2, 0.0)) / scale(c);
    }
  }

  for (int i = 0; i < k; ++i) {
    for (int j = i + 1; j < k; ++j) {
      if (std::abs(result.peaks[i].center - result.peaks[j].center) < 1e-3) result.degenerate = true;
    }
  }
  return result;
}

double extract_rabi(const LorentzianPeak& lower, const LorentzianPeak& upper) {
  const double lo = std::min(lower.center, upper.center);
  const double hi = std::max(lower.center, upper.center);
  if (!(lo < 0.0 && hi > 0.0)) throw InvalidArgument("sidebands must lie on opposite sides of the laser");
  return 0.5 * (hi - lo);
}

double extract_rabi(const LorentzianFitResult& fit) {
  const LorentzianPeak* lower = nullptr;
  const LorentzianPeak* upper = nullptr;
  for (const auto& p : fit.peaks) {
    if (p.center < 0.0 && (!lower || p.center < lower->center)) lower = &p;
    if (p.center > 0.0 && (!upper || p.center > upper->center)) upper = &p;
  }
  if (!lower || !upper) throw InvalidArgument("missing sideband: need peaks on both sides of the laser");
  return extract_rabi(*lower, *upper);
}

double instrument_fwhm(InstrumentResponse response) {
  return response == InstrumentResponse::fabry_perot ? 0.9 : 7.0;
}

SpectrumTrace instrument_convolve(const SpectrumTrace& trace, double response_fwhm) {
  const std::size_t n = trace.omega.size();
  if (n < 2 || !(response_fwhm > 0.0)) throw InvalidArgument("instrument_convolve needs a grid and positive FWHM");
  const double step = trace.spacing();
  const double span = trace.omega.back() - trace.omega.front();
  if (!(response_fwhm < span / 4.0)) throw InvalidArgument("instrument response is too wide for the trace span");
  if (step > response_fwhm / 4.0) throw InvalidArgument("grid too coarse for the instrument response");

  // Discrete kernel normalized to unit area over the full span.
  const LorentzianPeak kernel{0.0, response_fwhm, 1.0};
  std::vector<double> k(2 * n - 1);
  double norm = 0.0;
  for (std::size_t i = 0; i < k.size(); ++i) {
    k[i] = kernel.density((static_cast<double>(i) - static_cast<double>(n - 1)) * step);
    norm += k[i] * step;
  }
  SpectrumTrace out = trace;
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += trace.values[j] * k[i + (n - 1) - j];
    out.values[i] = acc * step / norm;
  }
  return out;
}

SpectrumTrace instrument_convolve(const SpectrumTrace& trace, InstrumentResponse response) {
  return instrument_convolve(trace, instrument_fwhm(response));
}

}  // namespace mollow
