#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <json.hpp>

#include "mollow/error.hpp"
#include "mollow/experiment.hpp"
#include "mollow/plot.hpp"

using namespace mollow;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("mollow_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// Small, quick sweep: truncated displaced frame and a coarse drive axis.
RunConfig small_sweep(const fs::path& out) {
  return parse_config(
      "name = small\nprotocol = linewidth_sweep\ndelta_c = 42\ngamma_ph_ads = 0.19\ngamma_ph_asp = 0.28\n"
      "frame = displaced\nfock_dim = 5\nsweep_axis = drive_J\nsweep_values = 4, 7, 10, 13\n"
      "omega_spacing = 0.25\noutput_dir = " +
      out.string() + "\n");
}

}  // namespace

TEST_CASE("config parsing") {
  SUBCASE("values and ranges") {
    const auto c = parse_config("delta_c = 42  # cavity\nsweep_start = 10\nsweep_stop = 20\nsweep_count = 3\n");
    CHECK(c.params.delta_c == 42.0);
    REQUIRE(c.sweep.values.size() == 3);
    CHECK(c.sweep.values[1] == doctest::Approx(15.0));
  }
  SUBCASE("squared ranges are uniform in omega^2") {
    const auto c = parse_config("sweep_start = 10\nsweep_stop = 20\nsweep_count = 3\nsweep_scale = squared\n");
    CHECK(c.sweep.values[1] * c.sweep.values[1] == doctest::Approx(250.0));
  }
  SUBCASE("unknown keys are errors with line numbers") {
    try {
      parse_config("delta_c = 1\n\nbogus = 2\nsweep_values = 1\n");
      FAIL("expected a ConfigError");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("line 3") != std::string::npos);
      CHECK(std::string(e.what()).find("bogus") != std::string::npos);
    }
  }
  SUBCASE("malformed input") {
    CHECK_THROWS_AS(parse_config("g = fast\nsweep_values = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("g = 1\ng = 2\nsweep_values = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("g 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("sweep_values = 1\nsweep_start = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("kappa = -1\nsweep_values = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("protocol = linewidth_sweep\n"), ConfigError);
  }
  SUBCASE("fock dimension") {
    CHECK(parse_config("fock_dim = auto\nsweep_values = 1\n").fock == std::nullopt);
    CHECK(parse_config("fock_dim = 12\nsweep_values = 1\n").fock == 12);
    CHECK_THROWS_AS(parse_config("fock_dim = 1\nsweep_values = 1\n"), ConfigError);
  }
  SUBCASE("rendering round-trips") {
    for (const auto& name : preset_names()) {
      const RunConfig c = preset_config(name);
      CHECK(render_config(parse_config(render_config(c))) == render_config(c));
    }
  }
  SUBCASE("presets") {
    CHECK(preset_names().size() == 6);
    CHECK(preset_config("fig3b").params.delta_cx() == 42.0);
    CHECK(preset_config("fig4a").protocol == Protocol::ablation);
    CHECK_THROWS_AS(preset_config("fig9"), ConfigError);
  }
}

TEST_CASE("value formatting") {
  CHECK(format_value(1.0 / 3.0) == "0.333333333");
  CHECK(format_value(12345.678912345) == "12345.6789");
  CHECK(format_value(std::nan("")).empty());
}

TEST_CASE("sweep CSV round trip") {
  SweepRecord r;
  r.index = 3;
  r.variant = "full";
  r.drive_J = 7.5;
  r.omega = 30.0;
  r.lower_fwhm = 8.25;
  r.area_low = 1.0;
  r.area_high = 2.0;
  r.fock_used = 8;
  r.lower_converged = true;
  const fs::path dir = scratch("csv");
  write_text(dir / "s.csv", sweep_csv({r}));
  const auto back = read_sweep_csv(dir / "s.csv");
  REQUIRE(back.size() == 1);
  CHECK(back[0].variant == "full");
  CHECK(back[0].omega_sq() == doctest::Approx(900.0));
  CHECK(back[0].area_ratio() == doctest::Approx(2.0));
  CHECK(std::isnan(back[0].upper_fwhm));
  CHECK(sweep_csv(back) == sweep_csv({r}));
}

TEST_CASE("linewidth import") {
  SUBCASE("well-formed ten-row file") {
    std::string text = "omega_sq_GHz2,fwhm_GHz,fwhm_sigma_GHz\n";
    for (int i = 1; i <= 10; ++i) text += std::to_string(i * 300) + "," + std::to_string(5 + i) + ",0.2\n";
    const auto curve = parse_linewidth_csv(text);
    CHECK(curve.points.size() == 10);
    CHECK_FALSE(curve.sigma_defaulted());
  }
  SUBCASE("duplicate rows report both lines") {
    try {
      parse_linewidth_csv("omega_sq_GHz2,fwhm_GHz\n100,5\n200,6\n100,7\n");
      FAIL("expected a ConfigError");
    } catch (const ConfigError& e) {
      const std::string msg = e.what();
      CHECK(msg.find(":4:") != std::string::npos);
      CHECK(msg.find("line 2") != std::string::npos);
    }
  }
  SUBCASE("missing sigma column defaults and is flagged") {
    const auto curve = parse_linewidth_csv(std::string(kLinewidthSchema) + "\nomega_sq_GHz2,fwhm_GHz\n100,5\n400,6\n");
    CHECK(curve.sigma_defaulted());
    CHECK(curve.sigmas()[1] == doctest::Approx(kDefaultSigmaFraction * 6.0));
  }
  SUBCASE("schema violations") {
    CHECK_THROWS_AS(parse_linewidth_csv("omega,fwhm\n1,2\n"), ConfigError);
    CHECK_THROWS_AS(parse_linewidth_csv("omega_sq_GHz2,fwhm_GHz\n400,5\n100,6\n"), ConfigError);
    CHECK_THROWS_AS(parse_linewidth_csv("omega_sq_GHz2,fwhm_GHz\n400,-5\n"), ConfigError);
    CHECK_THROWS_AS(parse_linewidth_csv("omega_sq_GHz2,fwhm_GHz\n400\n"), ConfigError);
    CHECK_THROWS_AS(import_experimental("/nonexistent/curve.csv"), IoError);
  }
  SUBCASE("export round trip") {
    LinewidthCurve c;
    c.points = {{100.0, 5.0, 0.1}, {400.0, 6.0, std::nullopt}};
    const auto back = parse_linewidth_csv(linewidth_csv(c));
    CHECK(back.points[0].fwhm_sigma == doctest::Approx(0.1));
    CHECK_FALSE(back.points[1].fwhm_sigma.has_value());
  }
}

TEST_CASE("transition locator") {
  auto records_for = [](auto fwhm_of) {
    std::vector<SweepRecord> rows;
    for (int i = 0; i < 25; ++i) {
      SweepRecord r;
      r.index = static_cast<std::size_t>(i);
      r.omega = std::sqrt(200.0 + 150.0 * i);
      r.lower_fwhm = fwhm_of(r.omega_sq());
      rows.push_back(r);
    }
    return rows;
  };
  SUBCASE("piecewise-linear knee at 2000 within one grid point") {
    const auto rows = records_for([](double x) { return x < 2000.0 ? 4.0 + 0.004 * x : 12.0 + 0.0004 * (x - 2000.0); });
    const auto t = transition_locator(rows, 42.0);
    REQUIRE(t.breakpoint.has_value());
    CHECK(std::abs(*t.breakpoint - 2000.0) <= 150.0);
    CHECK(t.crossing == doctest::Approx(1764.0));
  }
  SUBCASE("a straight line has no transition") {
    const auto t = transition_locator(records_for([](double x) { return 3.0 + 0.002 * x; }), 85.0);
    CHECK_FALSE(t.breakpoint.has_value());
  }
  SUBCASE("failed rows and other variants are ignored") {
    auto rows = records_for([](double x) { return 3.0 + 0.002 * x; });
    for (std::size_t i = 5; i < rows.size(); ++i) rows[i].status = PointStatus::numerical;
    CHECK_THROWS_AS(transition_locator(rows, 42.0), InvalidArgument);
    CHECK_THROWS_AS(transition_locator(records_for([](double) { return 1.0; }), 42.0, "full"), InvalidArgument);
  }
}

TEST_CASE("sweep run: determinism, spot check, metadata and plots") {
  const fs::path a = scratch("run_a");
  const fs::path b = scratch("run_b");
  RunConfig ca = small_sweep(a);
  ca.plot = true;
  RunConfig cb = small_sweep(b);
  cb.workers = 2;
  const RunSummary sa = run(ca);
  const RunSummary sb = run(cb);

  CHECK(sa.points == 4);
  CHECK(sa.failures == 0);
  CHECK(sa.exit_code() == kExitOk);
  CHECK(read_text(sa.csv) == read_text(sb.csv));
  CHECK(read_text(sa.csv).rfind(kSweepSchema, 0) == 0);
  CHECK(sa.spot_check.rows.size() == 3);
  CHECK(sa.spot_check.passed());

  for (const auto& r : sa.records) {
    CHECK(r.ok());
    CHECK(r.lower_fwhm > 0.0);
    CHECK(r.omega > 0.0);
    CHECK(r.fock_used == 5);
  }
  for (std::size_t i = 1; i < sa.records.size(); ++i) CHECK(sa.records[i].omega > sa.records[i - 1].omega);

  const auto meta = nlohmann::json::parse(read_text(sa.metadata));
  CHECK(meta.at("schema") == kMetadataSchema);
  CHECK(meta.at("rows").size() == 4);
  CHECK(meta.at("variants").at(0).at("params").at("gamma_ph_asp") == 0.28);
  CHECK(meta.at("spot_check").at("passed") == true);

  // Figures depend on the CSV alone.
  REQUIRE(sa.plots.size() == 2);
  const std::string fwhm_svg = read_text(sa.plots[0]);
  const fs::path copy = scratch("replot") / "small.csv";
  fs::copy_file(sa.csv, copy);
  const auto replot = write_plots(copy);
  CHECK(read_text(replot[0]) == fwhm_svg);
  CHECK(fwhm_svg.find("<svg") == 0);

  // A tampered CSV row no longer matches its recomputation.
  std::string text = read_text(sa.csv);
  const auto row = text.find("\n0,base,") + 1;
  text.replace(text.find(',', text.find(',', row) + 1) + 1, 1, "9");
  write_text(sa.csv, text);
  const auto report = spot_check(sa.metadata, sa.csv, 4, 1);
  CHECK_FALSE(report.passed());
}

TEST_CASE("failed points are recorded and set the exit code") {
  const fs::path out = scratch("fail");
  RunConfig c = small_sweep(out);
  c.sweep.values = {0.0, 0.0, 0.0, 10.0};
  const RunSummary s = run(c);
  CHECK(s.points == 4);
  CHECK(s.failures == 3);
  CHECK(s.exit_code() == kExitNumerical);
  CHECK(s.records[0].status == PointStatus::numerical);
  CHECK(std::isnan(s.records[0].lower_fwhm));
  CHECK(s.records[3].ok());

  c.sweep.values = {0.0, 10.0, 12.0, 14.0, 16.0};
  CHECK(run(c).exit_code() == kExitOk);
}

TEST_CASE("spectrum protocol at zero drive has no incoherent emission") {
  const fs::path out = scratch("spectrum");
  const RunConfig c = parse_config("protocol = spectrum\ndelta_c = 42\ndrive_J = 0\nframe = displaced\nfock_dim = 4\n"
                                   "output_dir = " + out.string() + "\n");
  const RunSummary s = run(c);
  const auto meta = nlohmann::json::parse(read_text(s.metadata));
  CHECK(meta.at("incoherent_integral").get<double>() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(meta.at("coherent_amplitude").get<double>() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(s.spot_check.passed());
}

TEST_CASE("calibrate protocol from a linewidth file") {
  const fs::path out = scratch("calibrate");
  // Curve produced by the forward model itself, so the fit returns its rates.
  SystemParams p;
  p.delta_c = 42.0;
  ForwardModel model(p, {});
  std::vector<double> omega_sq;
  for (double w : {15.0, 25.0, 35.0, 45.0, 55.0, 65.0}) omega_sq.push_back(w * w);
  const auto fwhm = model.predict({0.15, 0.35}, omega_sq);
  LinewidthCurve curve;
  for (std::size_t i = 0; i < fwhm.size(); ++i) curve.points.push_back({omega_sq[i], fwhm[i], 0.05});
  write_text(out / "curve.csv", linewidth_csv(curve));

  const RunConfig c = parse_config("protocol = calibrate\ndelta_c = 42\ndata = " + (out / "curve.csv").string() +
                                   "\noutput_dir = " + out.string() + "\n");
  const RunSummary s = run(c);
  const auto meta = nlohmann::json::parse(read_text(s.metadata));
  CHECK(meta.at("fit").at("gamma_ph_ads").get<double>() == doctest::Approx(0.15).epsilon(1e-3));
  CHECK(meta.at("fit").at("gamma_ph_asp").get<double>() == doctest::Approx(0.35).epsilon(1e-3));
  CHECK(meta.at("sigma_defaulted") == false);
  CHECK(s.spot_check.passed());
  CHECK(read_text(s.csv).rfind(kCalibrationSchema, 0) == 0);
}

TEST_CASE("unwritable output directory is an I/O error") {
  RunConfig c = small_sweep("/proc/mollow-not-writable");
  c.sweep.values = {10.0};
  CHECK_THROWS_AS(run(c), IoError);
}
