#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "mollow/calibration.hpp"
#include "mollow/error.hpp"
#include "support.hpp"

using namespace mollow;

namespace {

LinewidthCurve template_curve(double delta_cx, std::vector<double> omegas) {
  LinewidthCurve c;
  c.delta_cx = delta_cx;
  c.fixed_params = test::device_params(delta_cx);
  for (double w : omegas) c.points.push_back({w * w, 1.0, std::nullopt});
  return c;
}

}  // namespace

TEST_CASE("curve validation and sigma defaults") {
  LinewidthCurve c = template_curve(42.0, {10.0, 20.0, 30.0});
  CHECK_NOTHROW(c.validate());
  CHECK(c.sigma_defaulted());
  CHECK(c.sigmas()[0] == doctest::Approx(0.05));
  c.points[1].fwhm_sigma = 0.2;
  CHECK(c.sigmas()[1] == 0.2);
  c.points[2].omega_sq = c.points[1].omega_sq;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c = template_curve(42.0, {10.0, 20.0});
  c.points[0].fwhm = -1.0;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
}

TEST_CASE("drive table is monotone and inverts Omega") {
  ForwardModel model(test::device_params(42.0));
  model.prepare(15.0, 70.0);
  const auto& table = model.table();
  REQUIRE(table.size() >= 4);
  for (std::size_t i = 1; i < table.size(); ++i) CHECK(table[i].second > table[i - 1].second);
  CHECK(table.front().second <= 15.0);
  CHECK(table.back().second >= 70.0);
  const double j = model.drive_for(40.0);
  CHECK(j > table.front().first);
  CHECK(j < table.back().first);
  CHECK_THROWS_AS(static_cast<void>(model.drive_for(1e4)), NumericalError);
}

TEST_CASE("forward model memoizes repeated evaluations") {
  ForwardModel model(test::device_params(42.0));
  const std::vector<double> omega_sq{400.0, 900.0, 1600.0};
  const auto first = model.predict({0.19, 0.28}, omega_sq);
  const std::size_t evals = model.evaluations();
  const auto second = model.predict({0.19, 0.28}, omega_sq);
  CHECK(first == second);
  CHECK(model.evaluations() == evals);
  CHECK(model.cache_hits() >= 3);
}

TEST_CASE("linewidth grows with each phonon rate away from the crossing") {
  ForwardModel model(test::device_params(42.0));
  const std::vector<double> omega_sq{20.0 * 20.0, 65.0 * 65.0};
  const std::vector<double> rates{0.0, 0.2, 0.4};
  for (double fixed : rates) {
    for (std::size_t i = 0; i + 1 < rates.size(); ++i) {
      const auto lo_a = model.predict({rates[i], fixed}, omega_sq);
      const auto hi_a = model.predict({rates[i + 1], fixed}, omega_sq);
      const auto lo_b = model.predict({fixed, rates[i]}, omega_sq);
      const auto hi_b = model.predict({fixed, rates[i + 1]}, omega_sq);
      for (std::size_t k = 0; k < omega_sq.size(); ++k) {
        CHECK(hi_a[k] >= lo_a[k] - 1e-6);
        CHECK(hi_b[k] >= lo_b[k] - 1e-6);
      }
    }
  }
}

TEST_CASE("noiseless data is recovered exactly") {
  ForwardModel model(test::device_params(42.0));
  LinewidthCurve c = template_curve(42.0, {16.0, 22.0, 28.0, 34.0, 40.0, 46.0, 52.0, 58.0, 64.0, 70.0});
  const auto truth = predict_linewidths({0.19, 0.28}, c, model);
  for (std::size_t i = 0; i < truth.size(); ++i) c.points[i].fwhm = truth[i];
  const auto fit = fit_phonon_rates(c, model);
  CHECK(fit.converged);
  CHECK(std::abs(fit.gamma_ph_ads - 0.19) < 1e-4);
  CHECK(std::abs(fit.gamma_ph_asp - 0.28) < 1e-4);
  CHECK(fit.residual_norm < 1e-2);
  for (std::size_t i = 1; i < fit.objective_log.size(); ++i) CHECK(fit.objective_log[i] <= fit.objective_log[i - 1]);

  SUBCASE("point order does not matter") {
    LinewidthCurve shuffled = c;
    std::reverse(shuffled.points.begin(), shuffled.points.end());
    std::swap(shuffled.points[2], shuffled.points[7]);
    const auto other = fit_phonon_rates(shuffled, model);
    CHECK(other.gamma_ph_ads == doctest::Approx(fit.gamma_ph_ads).epsilon(1e-9));
    CHECK(other.gamma_ph_asp == doctest::Approx(fit.gamma_ph_asp).epsilon(1e-9));
  }
  SUBCASE("swapping the rate roles fits worse") {
    const auto swapped = predict_linewidths({0.28, 0.19}, c, model);
    double cost = 0.0;
    const auto sig = c.sigmas();
    for (std::size_t i = 0; i < swapped.size(); ++i) cost += std::pow((swapped[i] - truth[i]) / sig[i], 2);
    CHECK(std::sqrt(cost) > 10.0 * fit.residual_norm);
  }
}

TEST_CASE("negative iterates are clamped") {
  ForwardModel model(test::device_params(42.0));
  LinewidthCurve c = template_curve(42.0, {16.0, 26.0, 36.0, 46.0, 56.0, 66.0});
  const auto truth = predict_linewidths({0.0, 0.05}, c, model);
  for (std::size_t i = 0; i < truth.size(); ++i) c.points[i].fwhm = 0.97 * truth[i];
  const auto fit = fit_phonon_rates(c, model);
  CHECK(fit.clamped);
  CHECK(fit.gamma_ph_ads >= 0.0);
  CHECK(fit.gamma_ph_asp >= 0.0);
}

TEST_CASE("calibration preconditions") {
  ForwardModel model(test::device_params(42.0));
  LinewidthCurve c = template_curve(42.0, {20.0, 30.0, 40.0});
  CHECK_THROWS_AS(fit_phonon_rates(c, model), InvalidArgument);
  LinewidthCurve other = template_curve(85.0, {20.0, 30.0, 40.0, 50.0});
  CHECK_THROWS_AS(fit_phonon_rates(other, model), InvalidArgument);
  CHECK_THROWS_AS(predict_linewidths({-0.1, 0.2}, c, model), InvalidArgument);
}
