#include "mollow/calibration.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "mollow/error.hpp"
#include "mollow/parallel.hpp"

namespace mollow {

void LinewidthCurve::validate() const {
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& pt = points[i];
    if (!std::isfinite(pt.omega_sq) || pt.omega_sq <= 0.0) throw InvalidArgument("omega_sq must be positive");
    if (!std::isfinite(pt.fwhm) || pt.fwhm <= 0.0) throw InvalidArgument("fwhm must be positive");
    if (pt.fwhm_sigma && !(std::isfinite(*pt.fwhm_sigma) && *pt.fwhm_sigma > 0.0)) {
      throw InvalidArgument("fwhm_sigma must be positive");
    }
    if (i > 0 && !(pt.omega_sq > points[i - 1].omega_sq)) {
      throw InvalidArgument("omega_sq must be strictly increasing");
    }
  }
}

std::vector<double> LinewidthCurve::omega_sq() const {
  std::vector<double> out;
  for (const auto& pt : points) out.push_back(pt.omega_sq);
  return out;
}

std::vector<double> LinewidthCurve::fwhm() const {
  std::vector<double> out;
  for (const auto& pt : points) out.push_back(pt.fwhm);
  return out;
}

std::vector<double> LinewidthCurve::sigmas() const {
  std::vector<double> out;
  for (const auto& pt : points) out.push_back(pt.fwhm_sigma.value_or(kDefaultSigmaFraction * pt.fwhm));
  return out;
}

bool LinewidthCurve::sigma_defaulted() const {
  return std::any_of(points.begin(), points.end(), [](const auto& pt) { return !pt.fwhm_sigma; });
}

ForwardModel::ForwardModel(SystemParams base, ForwardModelSettings settings)
    : base_(std::move(base)), settings_(settings) {
  base_.fock_dim = settings_.fock_dim;
  base_.frame = settings_.frame;
  base_.validate();
}

namespace {

double rabi_at(const SystemParams& p, double omega_guess, double spacing, const SimulationSettings& base) {
  SimulationSettings s = base;
  const double reach = std::max(omega_guess, std::abs(p.delta_c)) + 70.0;
  s.grid = {-reach, reach, spacing};
  const SimulatedSpectrum sim = simulate_spectrum(p, s);
  MollowFitOptions mo;
  mo.delta_c = p.delta_c;
  mo.kappa = p.kappa;
  mo.lower_hint = -omega_guess;
  mo.upper_hint = omega_guess;
  return extract_rabi(fit_mollow_four(sim.trace, mo));
}

}  // namespace

void ForwardModel::prepare(double omega_lo, double omega_hi) {
  if (!(omega_lo > 0.0 && omega_hi >= omega_lo)) throw InvalidArgument("invalid Omega range for the drive table");
  const std::lock_guard lock(mutex_);
  if (!table_.empty() && table_.front().second <= omega_lo && table_.back().second >= omega_hi) return;

  SystemParams p = base_;
  p.gamma_ph_ads = settings_.reference_rates.first;
  p.gamma_ph_asp = settings_.reference_rates.second;

  SimulationSettings sim;
  sim.oversample = settings_.oversample;
  sim.t_max = settings_.t_max;

  // Pilot point: Omega grows close to linearly in J, which sets the table range.
  const double j_pilot = 5.0;
  p.drive_J = j_pilot;
  const double slope = rabi_at(p, 3.0 * j_pilot, settings_.spacing, sim) / j_pilot;
  if (!(slope > 0.0)) throw NumericalError("drive pilot produced no Mollow splitting");

  double j_lo = 0.8 * omega_lo / slope;
  double j_hi = 1.2 * omega_hi / slope;
  for (int attempt = 0; attempt < 4; ++attempt) {
    if (!settings_.t_max) {
      p.drive_J = j_hi;
      const double rate = slowest_rate(build_liouvillian(p), p);
      t_max_ = std::min(std::max(8.0 / rate, 1.0 / (2.0 * settings_.spacing)), 200.0);
    } else {
      t_max_ = *settings_.t_max;
    }
    sim.t_max = t_max_;

    const auto n = static_cast<std::size_t>(std::max(settings_.table_size, 4));
    std::vector<std::pair<double, double>> table(n);
    parallel_for(n, settings_.workers, [&](std::size_t i) {
      SystemParams q = p;
      q.drive_J = j_lo + (j_hi - j_lo) * static_cast<double>(i) / static_cast<double>(n - 1);
      table[i] = {q.drive_J, rabi_at(q, slope * q.drive_J, settings_.spacing, sim)};
    });
    for (std::size_t i = 1; i < n; ++i) {
      if (!(table[i].second > table[i - 1].second)) {
        throw NumericalError("Omega(J) is not monotone near J = " + std::to_string(table[i].first));
      }
    }
    if (table.front().second <= omega_lo && table.back().second >= omega_hi) {
      table_ = std::move(table);
      omega_max_ = table_.back().second;
      return;
    }
    if (table.front().second > omega_lo) j_lo *= 0.7;
    if (table.back().second < omega_hi) j_hi *= 1.3;
  }
  throw NumericalError("could not tabulate Omega(J) over the requested range");
}

double ForwardModel::drive_for(double omega) const {
  const std::lock_guard lock(mutex_);
  if (table_.empty() || omega < table_.front().second || omega > table_.back().second) {
    throw NumericalError("Omega = " + std::to_string(omega) + " GHz lies outside the tabulated drive range");
  }
  const auto it = std::lower_bound(table_.begin(), table_.end(), omega,
                                   [](const auto& row, double v) { return row.second < v; });
  if (it == table_.begin()) return it->first;
  const auto& [j1, o1] = *(it - 1);
  const auto& [j2, o2] = *it;
  return j1 + (j2 - j1) * (omega - o1) / (o2 - o1);
}

double ForwardModel::linewidth(const PhononRates& rates, double drive_j, double omega_hint) {
  const std::array<double, 3> key{rates.first, rates.second, drive_j};
  {
    const std::lock_guard lock(mutex_);
    if (const auto it = cache_.find(key); it != cache_.end()) {
      ++hits_;
      return it->second;
    }
  }
  SystemParams p = base_;
  p.gamma_ph_ads = rates.first;
  p.gamma_ph_asp = rates.second;
  p.drive_J = drive_j;
  SimulationSettings s;
  s.grid = {-(omega_hint + settings_.window_margin), 0.0, settings_.spacing};
  s.oversample = settings_.oversample;
  s.t_max = t_max_ > 0.0 ? std::optional<double>(t_max_) : settings_.t_max;
  const SimulatedSpectrum sim = simulate_spectrum(p, s);
  const std::pair window{-omega_hint - 50.0, std::min(-omega_hint / 2.0, -1.0)};
  const double width = fit_lower_sideband(sim.trace, -omega_hint, 4.0, window).sideband.fwhm;

  const std::lock_guard lock(mutex_);
  cache_.emplace(key, width);
  ++evaluations_;
  return width;
}

std::vector<double> ForwardModel::predict(const PhononRates& rates, const std::vector<double>& omega_sq) {
  if (omega_sq.empty()) return {};
  const auto [lo, hi] = std::minmax_element(omega_sq.begin(), omega_sq.end());
  prepare(std::sqrt(*lo), std::sqrt(*hi));
  std::vector<double> out(omega_sq.size());
  parallel_for(omega_sq.size(), settings_.workers, [&](std::size_t i) {
    const double omega = std::sqrt(omega_sq[i]);
    out[i] = linewidth(rates, drive_for(omega), omega);
  });
  return out;
}

std::size_t ForwardModel::evaluations() const {
  const std::lock_guard lock(mutex_);
  return evaluations_;
}

std::size_t ForwardModel::cache_hits() const {
  const std::lock_guard lock(mutex_);
  return hits_;
}

std::vector<double> predict_linewidths(const PhononRates& rates, const LinewidthCurve& curve, ForwardModel& model) {
  if (rates.first < 0.0 || rates.second < 0.0) throw InvalidArgument("phonon rates must be nonnegative");
  return model.predict(rates, curve.omega_sq());
}

namespace {

struct Weighted {
  std::vector<double> omega_sq;
  Eigen::VectorXd measured;
  Eigen::VectorXd sigma;
};

Eigen::VectorXd residuals(const Weighted& w, const std::vector<double>& predicted) {
  const Eigen::Map<const Eigen::VectorXd> pv(predicted.data(), static_cast<Eigen::Index>(predicted.size()));
  return (pv - w.measured).cwiseQuotient(w.sigma);
}

}  // namespace

PhononFitResult fit_phonon_rates(const LinewidthCurve& data, ForwardModel& model, const PhononFitOptions& options) {
  LinewidthCurve curve = data;
  std::sort(curve.points.begin(), curve.points.end(),
            [](const auto& a, const auto& b) { return a.omega_sq < b.omega_sq; });
  curve.validate();
  if (curve.points.size() < 4) throw InvalidArgument("calibration needs at least 4 linewidth points");
  if (std::abs(curve.delta_cx - model.base().delta_cx()) > 1e-9) {
    throw InvalidArgument("curve detuning does not match the forward model");
  }

  Weighted w;
  w.omega_sq = curve.omega_sq();
  const auto fwhm = curve.fwhm();
  const auto sig = curve.sigmas();
  w.measured = Eigen::Map<const Eigen::VectorXd>(fwhm.data(), static_cast<Eigen::Index>(fwhm.size()));
  w.sigma = Eigen::Map<const Eigen::VectorXd>(sig.data(), static_cast<Eigen::Index>(sig.size()));

  PhononFitResult out;
  Eigen::Vector2d x(options.start.first, options.start.second);
  x = x.cwiseMax(0.0);
  auto rates_of = [](const Eigen::Vector2d& v) { return PhononRates{v(0), v(1)}; };

  Eigen::VectorXd r = residuals(w, model.predict(rates_of(x), w.omega_sq));
  double cost = r.squaredNorm();
  out.objective_log.push_back(cost);
  out.rate_log.push_back(rates_of(x));

  const auto n = r.size();
  Eigen::MatrixXd jac(n, 2);
  double mu = 0.0;
  for (int iter = 0; iter < options.max_iterations; ++iter) {
    for (int c = 0; c < 2; ++c) {
      Eigen::Vector2d xp = x;
      xp(c) += options.fd_step;
      jac.col(c) = (residuals(w, model.predict(rates_of(xp), w.omega_sq)) - r) / options.fd_step;
    }
    const Eigen::Matrix2d jtj = jac.transpose() * jac;
    const Eigen::Vector2d grad = jac.transpose() * r;

    // Damping grows tenfold on every rejected step and relaxes after acceptance.
    bool accepted = false;
    Eigen::Vector2d step = Eigen::Vector2d::Zero();
    for (int attempt = 0; attempt < 30 && !accepted; ++attempt) {
      Eigen::Matrix2d a = jtj;
      a.diagonal() += mu * jtj.diagonal();
      step = a.ldlt().solve(-grad);
      Eigen::Vector2d trial = x + step;
      if ((trial.array() < 0.0).any()) out.clamped = true;
      trial = trial.cwiseMax(0.0);
      step = trial - x;
      if (step.cwiseAbs().maxCoeff() < options.step_tol) {
        accepted = true;
        break;
      }
      const Eigen::VectorXd r_trial = residuals(w, model.predict(rates_of(trial), w.omega_sq));
      const double trial_cost = r_trial.squaredNorm();
      if (trial_cost <= cost) {
        x = trial;
        r = r_trial;
        cost = trial_cost;
        out.objective_log.push_back(cost);
        out.rate_log.push_back(rates_of(x));
        mu = mu / 10.0 < 1e-6 ? 0.0 : mu / 10.0;
        accepted = true;
      } else {
        mu = mu == 0.0 ? 1e-3 : 10.0 * mu;
      }
    }
    out.iterations = iter + 1;
    if (!accepted) break;
    if (step.cwiseAbs().maxCoeff() < options.step_tol) {
      out.converged = true;
      break;
    }
  }
  if (!out.converged) {
    throw NumericalError("phonon-rate fit did not converge after " + std::to_string(out.iterations) +
                         " iterations (rates " + std::to_string(x(0)) + ", " + std::to_string(x(1)) + ")");
  }

  out.gamma_ph_ads = x(0);
  out.gamma_ph_asp = x(1);
  out.residual_norm = std::sqrt(cost);
  const double dof = std::max(static_cast<double>(n) - 2.0, 1.0);
  const Eigen::Matrix2d cov = (jac.transpose() * jac).inverse() * (cost / dof);
  out.sigma_ads = std::sqrt(std::max(cov(0, 0), 0.0));
  out.sigma_asp = std::sqrt(std::max(cov(1, 1), 0.0));
  out.correlation = cov(0, 1) / std::max(out.sigma_ads * out.sigma_asp, 1e-300);

  out.curve_predicted = curve;
  const auto predicted = model.predict(rates_of(x), w.omega_sq);
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    out.curve_predicted.points[i].fwhm = predicted[i];
    out.curve_predicted.points[i].fwhm_sigma.reset();
  }
  out.curve_predicted.fixed_params.gamma_ph_ads = x(0);
  out.curve_predicted.fixed_params.gamma_ph_asp = x(1);
  return out;
}

}  // namespace mollow
