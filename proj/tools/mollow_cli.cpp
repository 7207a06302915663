#include <CLI11.hpp>
#include <cmath>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "mollow/error.hpp"
#include "mollow/experiment.hpp"
#include "mollow/plot.hpp"

namespace {

using namespace mollow;

struct CommonOptions {
  std::string config;
  std::string out;
  std::string fock;
  std::optional<int> workers;
  std::optional<bool> plot;
  std::vector<std::string> set;
};

void add_common(CLI::App* cmd, CommonOptions& o, bool config_required) {
  auto* c = cmd->add_option("--config", o.config, "key = value configuration file");
  if (config_required) c->required();
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--fock", o.fock, "Fock truncation N, or auto for the doubling rule");
  cmd->add_option("--workers", o.workers, "concurrent sweep points")->check(CLI::PositiveNumber);
  cmd->add_flag("--plot,!--no-plot", o.plot, "write SVG figures derived from the CSV");
  cmd->add_option("--set", o.set, "extra key=value setting, applied after the config file");
}

RunConfig resolve(RunConfig base, const CommonOptions& o) {
  if (!o.config.empty()) base = load_config(o.config, base);
  if (!o.set.empty()) {
    std::string text;
    for (const auto& kv : o.set) text += kv + "\n";
    base = parse_config(text, base);
  }
  if (!o.out.empty()) base.output_dir = o.out;
  if (!o.fock.empty()) base = parse_config("fock_dim = " + o.fock + "\n", base);
  if (o.workers) base.workers = *o.workers;
  if (o.plot) base.plot = *o.plot;
  base.validate();
  return base;
}

int report(const RunSummary& s) {
  std::cout << "csv: " << s.csv.string() << "\n"
            << "metadata: " << s.metadata.string() << "\n";
  for (const auto& p : s.plots) std::cout << "plot: " << p.string() << "\n";
  std::cout << "points: " << s.points << ", failed: " << s.failures << "\n";
  std::cout << "spot-check:";
  for (std::size_t i = 0; i < s.spot_check.rows.size(); ++i) {
    std::cout << " row " << s.spot_check.rows[i] << (s.spot_check.matches[i] ? " ok" : " MISMATCH") << ";";
  }
  std::cout << "\n";
  if (!s.spot_check.passed()) std::cerr << "warning: spot-check recomputation differs from the CSV\n";
  if (s.exit_code() != kExitOk) std::cerr << "error: more than 20% of the sweep points failed\n";
  return s.exit_code();
}

int locate(const std::string& csv, const std::string& variant, double delta_cx) {
  const std::string text = read_text(csv);
  std::vector<SweepRecord> records;
  if (text.rfind(kSweepSchema, 0) == 0) {
    records = read_sweep_csv(csv);
  } else {
    // A bare linewidth curve is wrapped as successful sweep rows.
    const LinewidthCurve curve = import_experimental(csv);
    for (std::size_t i = 0; i < curve.points.size(); ++i) {
      SweepRecord r;
      r.index = i;
      r.variant = variant;
      r.omega = std::sqrt(curve.points[i].omega_sq);
      r.lower_fwhm = curve.points[i].fwhm;
      records.push_back(r);
    }
  }
  const TransitionReport t = transition_locator(records, delta_cx, variant);
  std::cout << "breakpoint_GHz2: " << (t.breakpoint ? format_value(*t.breakpoint) : std::string("null")) << "\n"
            << "crossing_GHz2: " << format_value(t.crossing) << "\n"
            << "slope_below: " << format_value(t.fit.slope_below) << "\n"
            << "slope_above: " << format_value(t.fit.slope_above) << "\n"
            << "p_value: " << format_value(t.fit.p_value) << "\n"
            << "single_line_r_squared: " << format_value(t.fit.single.r_squared) << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Driven quantum dot-cavity simulator: Mollow spectra, sideband linewidths and phonon-rate calibration"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  CommonOptions spectrum_opts;
  auto* spectrum = app.add_subcommand("spectrum", "emission spectrum at a single drive");
  add_common(spectrum, spectrum_opts, false);

  CommonOptions sweep_opts;
  auto* sweep = app.add_subcommand("sweep", "linewidth, intensity or ablation sweep from a config file");
  add_common(sweep, sweep_opts, true);

  CommonOptions calibrate_opts;
  std::string data;
  auto* calibrate = app.add_subcommand("calibrate", "fit the two phonon rates to a linewidth curve");
  add_common(calibrate, calibrate_opts, true);
  calibrate->add_option("--data", data, "linewidth CSV (omega_sq_GHz2,fwhm_GHz[,fwhm_sigma_GHz])");

  CommonOptions reproduce_opts;
  std::string preset;
  auto* reproduce = app.add_subcommand("reproduce", "run a built-in figure recipe");
  add_common(reproduce, reproduce_opts, false);
  reproduce->add_option("preset", preset, "figure recipe")->required()->check(CLI::IsMember(preset_names()));
  bool show = false;
  reproduce->add_flag("--show-config", show, "print the recipe's configuration and exit");

  std::string csv;
  std::string variant = "base";
  double delta_cx = 0.0;
  auto* locate_cmd = app.add_subcommand("locate-transition", "segmented-regression breakpoint of FWHM vs Omega^2");
  locate_cmd->add_option("csv", csv, "sweep or linewidth CSV")->required();
  locate_cmd->add_option("--variant", variant, "sweep variant to analyse");
  locate_cmd->add_option("--delta-cx", delta_cx, "dot-cavity detuning in GHz, for the reference crossing");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*spectrum) {
      RunConfig base;
      base.name = "spectrum";
      base.protocol = Protocol::spectrum;
      base = resolve(base, spectrum_opts);
      base.protocol = Protocol::spectrum;
      return report(run(base));
    }
    if (*sweep) {
      RunConfig config = resolve(RunConfig{}, sweep_opts);
      if (config.protocol == Protocol::spectrum || config.protocol == Protocol::calibrate) {
        throw ConfigError("sweep needs protocol linewidth_sweep, intensity_sweep or ablation");
      }
      return report(run(config));
    }
    if (*calibrate) {
      RunConfig base;
      base.name = "calibration";
      base.protocol = Protocol::calibrate;
      RunConfig config = resolve(base, calibrate_opts);
      config.protocol = Protocol::calibrate;
      if (!data.empty()) config.data = data;
      const RunSummary s = run(config);
      return report(s);
    }
    if (*reproduce) {
      if (show) {
        std::cout << preset_text(preset);
        return kExitOk;
      }
      RunConfig config = resolve(preset_config(preset), reproduce_opts);
      return report(run(config));
    }
    if (*locate_cmd) return locate(csv, variant, delta_cx);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const InvalidArgument& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kExitConfig;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kExitIo;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitOk;
}
