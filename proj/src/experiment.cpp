#include "mollow/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <json.hpp>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "mollow/error.hpp"
#include "mollow/parallel.hpp"
#include "mollow/plot.hpp"

namespace mollow {

using nlohmann::json;

namespace {

constexpr int kSpotCheckRows = 3;

json params_to_json(const SystemParams& p) {
  return {{"delta_c", p.delta_c},
          {"delta_x", p.delta_x},
          {"g", p.g},
          {"kappa", p.kappa},
          {"gamma", p.gamma},
          {"gamma_d", p.gamma_d},
          {"gamma_ph_ads", p.gamma_ph_ads},
          {"gamma_ph_asp", p.gamma_ph_asp},
          {"drive_J", p.drive_J},
          {"omega_direct", p.omega_direct},
          {"drive_target", to_string(p.drive_target)},
          {"fock_dim", p.fock_dim},
          {"frame", to_string(p.frame)},
          {"uncoupled", p.uncoupled}};
}

SystemParams params_from_json(const json& j) {
  SystemParams p;
  p.delta_c = j.at("delta_c").get<double>();
  p.delta_x = j.at("delta_x").get<double>();
  p.g = j.at("g").get<double>();
  p.kappa = j.at("kappa").get<double>();
  p.gamma = j.at("gamma").get<double>();
  p.gamma_d = j.at("gamma_d").get<double>();
  p.gamma_ph_ads = j.at("gamma_ph_ads").get<double>();
  p.gamma_ph_asp = j.at("gamma_ph_asp").get<double>();
  p.drive_J = j.at("drive_J").get<double>();
  p.omega_direct = j.at("omega_direct").get<double>();
  p.drive_target = drive_target_from_string(j.at("drive_target").get<std::string>());
  p.fock_dim = j.at("fock_dim").get<int>();
  p.frame = frame_from_string(j.at("frame").get<std::string>());
  p.uncoupled = j.at("uncoupled").get<bool>();
  return p;
}

json grid_to_json(const SpectrumGrid& g) {
  return {{"omega_min", g.omega_min}, {"omega_max", g.omega_max}, {"spacing", g.spacing}};
}

SpectrumGrid grid_from_json(const json& j) {
  return {j.at("omega_min").get<double>(), j.at("omega_max").get<double>(), j.at("spacing").get<double>()};
}

json optional_number(std::optional<double> v) { return v ? json(*v) : json(nullptr); }

double number_or_nan(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

std::string timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json metadata_header(const RunConfig& config) {
  return {{"schema", kMetadataSchema},
          {"tool", {{"name", "mollow"}, {"version", kToolVersion}}},
          {"created", timestamp()},
          {"name", config.name},
          {"protocol", to_string(config.protocol)},
          {"config", render_config(config)},
          {"seed", config.seed}};
}

void write_json(const std::filesystem::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

json read_json(const std::filesystem::path& path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::vector<std::string> csv_lines(const std::filesystem::path& csv) {
  std::istringstream in(read_text(csv));
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

// Distinct data rows drawn with a seeded generator; all rows when there are few.
std::vector<std::size_t> pick_rows(std::size_t available, int count, std::uint64_t seed) {
  std::vector<std::size_t> all(available);
  for (std::size_t i = 0; i < available; ++i) all[i] = i;
  if (available <= static_cast<std::size_t>(count)) return all;
  std::mt19937_64 rng(seed);
  for (int k = 0; k < count; ++k) {
    std::uniform_int_distribution<std::size_t> pick(static_cast<std::size_t>(k), available - 1);
    std::swap(all[static_cast<std::size_t>(k)], all[pick(rng)]);
  }
  all.resize(static_cast<std::size_t>(count));
  std::sort(all.begin(), all.end());
  return all;
}

json spot_check_json(const SpotCheckReport& report) {
  json j = {{"rows", report.rows}, {"passed", report.passed()}};
  std::vector<bool> m = report.matches;
  j["matches"] = m;
  return j;
}

}  // namespace

bool SpotCheckReport::passed() const {
  return std::all_of(matches.begin(), matches.end(), [](bool b) { return b; });
}

int RunSummary::exit_code() const {
  if (points > 0 && static_cast<double>(failures) > kFailureThreshold * static_cast<double>(points)) {
    return kExitNumerical;
  }
  return kExitOk;
}

double estimated_rabi(const SystemParams& p) {
  if (p.drive_target == DriveTarget::qubit) return std::abs(p.omega_direct);
  const Complex denom(p.delta_c, -p.kappa / 2.0);
  return 2.0 * p.g * std::abs(std::sqrt(p.kappa) * p.drive_J / denom);
}

SpectrumGrid resolve_grid(const RunConfig& config, double omega_reach) {
  const auto& g = config.grid;
  if (g.omega_min) return {*g.omega_min, *g.omega_max, g.spacing};
  const double reach = std::max(omega_reach, std::abs(config.params.delta_c)) + g.margin;
  const double half = g.spacing * std::ceil(reach / g.spacing);
  return {-half, half, g.spacing};
}

std::vector<std::pair<std::string, SystemParams>> protocol_variants(const RunConfig& config) {
  if (config.protocol != Protocol::ablation) return {{"base", config.params}};
  SystemParams none = config.params;
  none.gamma_d = 0.0;
  none.gamma_ph_ads = 0.0;
  none.gamma_ph_asp = 0.0;
  SystemParams dephasing = config.params;
  dephasing.gamma_ph_ads = 0.0;
  dephasing.gamma_ph_asp = 0.0;
  return {{"no_dephasing", none}, {"dephasing_only", dephasing}, {"full", config.params}};
}

PointOutcome evaluate_point(const PointSpec& spec) {
  PointOutcome out;
  SweepRecord& r = out.record;
  r.index = spec.index;
  r.variant = spec.variant;
  r.drive_J = spec.params.drive_J;
  r.omega_target = spec.omega_target;
  r.cavity_held = spec.held_cavity_area.has_value();
  try {
    SystemParams p = spec.params;
    SimulationSettings settings;
    settings.grid = spec.grid;
    settings.t_max = spec.t_max;
    settings.observable = default_observable(p);
    std::optional<double> hint;
    if (std::isfinite(spec.omega_target)) hint = -spec.omega_target;

    SimulatedSpectrum sim;
    if (spec.fock) {
      p.fock_dim = *spec.fock;
      sim = simulate_spectrum(p, settings);
      r.fock_used = *spec.fock;
      out.fock_history = {*spec.fock};
    } else {
      auto conv = converge_fock(p, settings, [&](const SpectrumTrace& t) {
        return fit_lower_sideband(t, hint).sideband.fwhm;
      });
      sim = std::move(conv.result);
      r.fock_used = conv.fock_used;
      out.fock_history = conv.fock_history;
    }
    out.t_max = sim.t_max;
    r.top_fock_population = sim.top_fock_population;

    const SidebandLinewidth low = fit_lower_sideband(sim.trace, hint);
    r.lower_center = low.sideband.center;
    r.lower_fwhm = low.sideband.fwhm;
    r.lower_converged = low.fit.converged;
    out.lower_iterations = low.fit.iterations;
    out.lower_gradient = low.fit.gradient_norm;
    // The filtered linewidth needs the grid to resolve the filter; otherwise it stays empty.
    const double filter = instrument_fwhm(InstrumentResponse::fabry_perot);
    if (sim.trace.spacing() <= filter / 4.0) {
      r.lower_fwhm_filtered = fit_lower_sideband(instrument_convolve(sim.trace, filter), hint).sideband.fwhm;
    }

    MollowFitOptions mo;
    mo.delta_c = p.delta_c;
    mo.kappa = p.kappa;
    mo.held_cavity_area = spec.held_cavity_area;
    mo.lower_hint = hint;
    if (std::isfinite(spec.omega_target)) mo.upper_hint = spec.omega_target;
    const MollowFit four = fit_mollow_four(sim.trace, mo);
    r.omega = extract_rabi(four);
    r.upper_center = four.upper().center;
    r.upper_fwhm = four.upper().fwhm;
    r.area_low = four.lower().area;
    r.area_high = four.upper().area;
    r.cavity_area = four.cavity().area;
    r.four_converged = four.fit.converged;
    out.four_iterations = four.fit.iterations;
    out.four_gradient = four.fit.gradient_norm;
  } catch (const InvalidArgument& e) {
    r.status = PointStatus::invalid;
    out.error = e.what();
  } catch (const std::exception& e) {
    r.status = PointStatus::numerical;
    out.error = e.what();
  }
  return out;
}

namespace {

json outcome_json(const PointSpec& spec, const PointOutcome& o) {
  return {{"index", spec.index},
          {"variant", spec.variant},
          {"drive_J", spec.params.drive_J},
          {"omega_target", std::isfinite(spec.omega_target) ? json(spec.omega_target) : json(nullptr)},
          {"fock_requested", spec.fock ? json(*spec.fock) : json("auto")},
          {"fock_used", o.record.fock_used},
          {"fock_history", o.fock_history},
          {"t_max", o.t_max},
          {"held_cavity_area", optional_number(spec.held_cavity_area)},
          {"status", to_string(o.record.status)},
          {"error", o.error},
          {"lower_fit", {{"iterations", o.lower_iterations}, {"gradient_norm", o.lower_gradient}}},
          {"four_fit", {{"iterations", o.four_iterations}, {"gradient_norm", o.four_gradient}}}};
}

// Cavity areas inside the resonance window are interpolated in Omega from
// the nearest rows outside it, or held at the single available neighbour.
std::vector<std::pair<std::size_t, double>> window_holds(const std::vector<PointOutcome>& outcomes,
                                                         const std::vector<std::size_t>& rows, double delta_c) {
  std::vector<std::size_t> usable;
  for (auto i : rows) {
    if (outcomes[i].record.ok() && std::isfinite(outcomes[i].record.omega)) usable.push_back(i);
  }
  std::sort(usable.begin(), usable.end(),
            [&](auto a, auto b) { return outcomes[a].record.omega < outcomes[b].record.omega; });
  auto inside = [&](std::size_t i) { return std::abs(outcomes[i].record.upper_center - delta_c) < kCavityWindow; };

  std::vector<std::pair<std::size_t, double>> holds;
  for (std::size_t k = 0; k < usable.size(); ++k) {
    if (!inside(usable[k])) continue;
    std::optional<std::size_t> below;
    std::optional<std::size_t> above;
    for (std::size_t m = k; m-- > 0;) {
      if (!inside(usable[m])) {
        below = usable[m];
        break;
      }
    }
    for (std::size_t m = k + 1; m < usable.size(); ++m) {
      if (!inside(usable[m])) {
        above = usable[m];
        break;
      }
    }
    const auto& rec = outcomes[usable[k]].record;
    double area = 0.0;
    if (below && above) {
      const auto& lo = outcomes[*below].record;
      const auto& hi = outcomes[*above].record;
      const double f = (rec.omega - lo.omega) / (hi.omega - lo.omega);
      area = lo.cavity_area + f * (hi.cavity_area - lo.cavity_area);
    } else if (below || above) {
      area = outcomes[below ? *below : *above].record.cavity_area;
    } else {
      continue;
    }
    holds.emplace_back(usable[k], std::max(area, 0.0));
  }
  return holds;
}

struct SweepPlan {
  std::vector<PointSpec> specs;
  json variants = json::array();
};

SweepPlan plan_sweep(const RunConfig& config) {
  SweepPlan plan;
  const auto variants = protocol_variants(config);
  const auto& values = config.sweep.values;

  double reach = 0.0;
  if (config.sweep.axis == SweepAxis::omega) {
    reach = *std::max_element(values.begin(), values.end());
  } else {
    for (double j : values) {
      SystemParams p = config.params;
      p.drive_J = j;
      reach = std::max(reach, 1.2 * estimated_rabi(p));
    }
  }
  const SpectrumGrid grid = resolve_grid(config, reach);

  for (const auto& [name, params] : variants) {
    json variant = {{"name", name}, {"params", params_to_json(params)}, {"drive_table", nullptr}};
    std::vector<double> drives = values;
    if (config.sweep.axis == SweepAxis::omega) {
      ForwardModelSettings fs;
      fs.fock_dim = config.fock.value_or(8);
      fs.frame = params.frame;
      fs.spacing = config.grid.spacing;
      fs.reference_rates = {params.gamma_ph_ads, params.gamma_ph_asp};
      fs.workers = config.workers;
      fs.table_size = 24;
      ForwardModel model(params, fs);
      const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
      model.prepare(*lo, *hi);
      for (auto& d : drives) d = model.drive_for(d);
      variant["drive_table"] = model.table();
      variant["drive_table_fock"] = fs.fock_dim;
    }
    plan.variants.push_back(variant);
    for (std::size_t i = 0; i < values.size(); ++i) {
      PointSpec spec;
      spec.index = plan.specs.size();
      spec.variant = name;
      spec.params = params;
      spec.params.drive_J = drives[i];
      if (config.sweep.axis == SweepAxis::omega) spec.omega_target = values[i];
      spec.fock = config.fock;
      spec.grid = grid;
      spec.t_max = config.grid.t_max;
      plan.specs.push_back(std::move(spec));
    }
  }
  return plan;
}

PointSpec spec_from_json(const json& meta, std::size_t row) {
  const json& r = meta.at("rows").at(row);
  const std::string variant = r.at("variant").get<std::string>();
  PointSpec spec;
  for (const auto& v : meta.at("variants")) {
    if (v.at("name").get<std::string>() == variant) spec.params = params_from_json(v.at("params"));
  }
  spec.index = r.at("index").get<std::size_t>();
  spec.variant = variant;
  spec.params.drive_J = r.at("drive_J").get<double>();
  spec.omega_target = number_or_nan(r.at("omega_target"));
  // Adaptive truncation is replayed at the truncation it settled on.
  spec.fock = r.at("fock_used").get<int>();
  spec.grid = grid_from_json(meta.at("grid"));
  spec.t_max = r.at("t_max").get<double>();
  if (!r.at("held_cavity_area").is_null()) spec.held_cavity_area = r.at("held_cavity_area").get<double>();
  return spec;
}

RunSummary run_sweep(const RunConfig& config) {
  SweepPlan plan = plan_sweep(config);
  std::vector<PointOutcome> outcomes(plan.specs.size());
  parallel_for(plan.specs.size(), config.workers, [&](std::size_t i) { outcomes[i] = evaluate_point(plan.specs[i]); });

  if (config.protocol == Protocol::intensity_sweep) {
    std::map<std::string, std::vector<std::size_t>> by_variant;
    for (const auto& s : plan.specs) by_variant[s.variant].push_back(s.index);
    std::vector<std::size_t> redo;
    for (const auto& [name, rows] : by_variant) {
      for (const auto& [i, area] : window_holds(outcomes, rows, plan.specs[rows.front()].params.delta_c)) {
        plan.specs[i].held_cavity_area = area;
        redo.push_back(i);
      }
    }
    parallel_for(redo.size(), config.workers,
                 [&](std::size_t k) { outcomes[redo[k]] = evaluate_point(plan.specs[redo[k]]); });
  }

  RunSummary summary;
  summary.csv = config.output_dir / (config.name + ".csv");
  summary.metadata = config.output_dir / (config.name + ".json");
  summary.points = outcomes.size();
  json rows = json::array();
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    summary.records.push_back(outcomes[i].record);
    if (!outcomes[i].record.ok()) ++summary.failures;
    rows.push_back(outcome_json(plan.specs[i], outcomes[i]));
  }

  json meta = metadata_header(config);
  meta["grid"] = grid_to_json(plan.specs.front().grid);
  meta["t_max_override"] = optional_number(config.grid.t_max);
  meta["sweep_axis"] = to_string(config.sweep.axis);
  meta["variants"] = plan.variants;
  meta["rows"] = rows;
  meta["summary"] = {{"points", summary.points},
                     {"failures", summary.failures},
                     {"failure_threshold", kFailureThreshold},
                     {"exit_code", summary.exit_code()}};
  if (config.protocol == Protocol::linewidth_sweep || config.protocol == Protocol::ablation) {
    json transitions = json::object();
    for (const auto& v : plan.variants) {
      const std::string name = v.at("name").get<std::string>();
      try {
        const auto t = transition_locator(summary.records, config.params.delta_cx(), name);
        transitions[name] = {{"breakpoint_GHz2", optional_number(t.breakpoint)},
                             {"crossing_GHz2", t.crossing},
                             {"best_breakpoint_GHz2", t.fit.breakpoint},
                             {"slope_below", t.fit.slope_below},
                             {"slope_above", t.fit.slope_above},
                             {"p_value", t.fit.p_value},
                             {"single_line_r_squared", t.fit.single.r_squared}};
      } catch (const Error& e) {
        transitions[name] = {{"error", e.what()}};
      }
    }
    meta["transition"] = transitions;
  }

  write_text(summary.csv, sweep_csv(summary.records));
  write_json(summary.metadata, meta);
  summary.spot_check = spot_check(summary.metadata, summary.csv, kSpotCheckRows, config.seed);
  meta["spot_check"] = spot_check_json(summary.spot_check);
  write_json(summary.metadata, meta);
  if (config.plot) summary.plots = write_plots(summary.csv);
  return summary;
}

std::string spectrum_csv(const SpectrumTrace& trace) {
  std::string out = std::string(kSpectrumSchema) + "\nomega_GHz,density\n";
  for (std::size_t i = 0; i < trace.size(); ++i) {
    out += format_value(trace.omega[i]) + "," + format_value(trace.values[i]) + "\n";
  }
  return out;
}

SimulatedSpectrum simulate_for_protocol(const SystemParams& p, const SimulationSettings& s, std::optional<int> fock,
                                        int& fock_used) {
  if (fock) {
    SystemParams q = p;
    q.fock_dim = *fock;
    fock_used = *fock;
    return simulate_spectrum(q, s);
  }
  // Without a guaranteed sideband the emitted power is the convergence observable.
  auto conv = converge_fock(p, s, [](const SpectrumTrace& t) { return t.integral(); });
  fock_used = conv.fock_used;
  return std::move(conv.result);
}

RunSummary run_spectrum(const RunConfig& config) {
  const SystemParams& p = config.params;
  SimulationSettings settings;
  settings.grid = resolve_grid(config, 1.2 * estimated_rabi(p));
  settings.t_max = config.grid.t_max;
  settings.observable = default_observable(p);
  int fock_used = 0;
  const SimulatedSpectrum sim = simulate_for_protocol(p, settings, config.fock, fock_used);

  RunSummary summary;
  summary.csv = config.output_dir / (config.name + ".csv");
  summary.metadata = config.output_dir / (config.name + ".json");
  summary.points = 1;
  json meta = metadata_header(config);
  meta["params"] = params_to_json(p);
  meta["grid"] = grid_to_json(settings.grid);
  meta["fock_used"] = fock_used;
  meta["t_max"] = sim.t_max;
  meta["observable"] = settings.observable == Observable::dot ? "dot" : "cavity";
  meta["coherent_amplitude"] = sim.trace.coherent_amplitude;
  meta["incoherent_integral"] = sim.trace.integral();
  meta["cavity_photons"] = sim.cavity_photons;
  meta["excited_population"] = sim.excited_population;
  meta["top_fock_population"] = sim.top_fock_population;
  meta["correlation_unresolved"] = sim.correlation.unresolved;
  meta["summary"] = {{"points", 1}, {"failures", 0}, {"exit_code", 0}};

  write_text(summary.csv, spectrum_csv(sim.trace));
  write_json(summary.metadata, meta);
  summary.spot_check = spot_check(summary.metadata, summary.csv, kSpotCheckRows, config.seed);
  meta["spot_check"] = spot_check_json(summary.spot_check);
  write_json(summary.metadata, meta);
  if (config.plot) summary.plots = write_plots(summary.csv);
  return summary;
}

ForwardModelSettings calibration_settings(const RunConfig& config) {
  ForwardModelSettings fs;
  fs.fock_dim = config.calibration_fock;
  fs.frame = Frame::displaced;
  fs.spacing = config.grid.spacing;
  fs.workers = config.workers;
  return fs;
}

json forward_settings_json(const ForwardModelSettings& fs) {
  return {{"fock_dim", fs.fock_dim},
          {"frame", to_string(fs.frame)},
          {"spacing", fs.spacing},
          {"oversample", fs.oversample},
          {"window_margin", fs.window_margin},
          {"reference_rates", {fs.reference_rates.first, fs.reference_rates.second}},
          {"table_size", fs.table_size}};
}

std::string calibration_csv(const LinewidthCurve& data, const PhononFitResult& fit) {
  std::string out = std::string(kCalibrationSchema) + "\nomega_sq_GHz2,fwhm_GHz,fwhm_sigma_GHz,predicted_GHz,residual\n";
  const auto sig = data.sigmas();
  for (std::size_t i = 0; i < data.points.size(); ++i) {
    const double pred = fit.curve_predicted.points[i].fwhm;
    out += format_value(data.points[i].omega_sq) + "," + format_value(data.points[i].fwhm) + "," +
           format_value(sig[i]) + "," + format_value(pred) + "," +
           format_value((pred - data.points[i].fwhm) / sig[i]) + "\n";
  }
  return out;
}

RunSummary run_calibration(const RunConfig& config) {
  const ForwardModelSettings fs = calibration_settings(config);
  ForwardModel model(config.params, fs);

  LinewidthCurve data;
  json source;
  if (config.data) {
    data = import_experimental(*config.data);
    source = {{"kind", "file"}, {"path", config.data->string()}};
  } else {
    if (config.sweep.axis != SweepAxis::omega) throw ConfigError("synthetic calibration data needs sweep_axis = omega");
    std::vector<double> omega_sq;
    for (double w : config.sweep.values) omega_sq.push_back(w * w);
    std::sort(omega_sq.begin(), omega_sq.end());
    const PhononRates truth{config.params.gamma_ph_ads, config.params.gamma_ph_asp};
    const auto clean = model.predict(truth, omega_sq);
    std::mt19937_64 rng(config.seed);
    std::normal_distribution<double> noise(0.0, config.noise);
    // The generator knows its noise model, so each point carries its true uncertainty.
    // Noiseless curves fall back to the default sigma.
    for (std::size_t i = 0; i < omega_sq.size(); ++i) {
      std::optional<double> sigma;
      if (config.noise > 0.0) sigma = config.noise * clean[i];
      data.points.push_back({omega_sq[i], clean[i] * (1.0 + noise(rng)), sigma});
    }
    source = {{"kind", "synthetic"},
              {"truth", {truth.first, truth.second}},
              {"noise", config.noise},
              {"seed", config.seed}};
  }
  data.delta_cx = config.params.delta_cx();
  data.fixed_params = config.params;
  data.validate();

  PhononFitOptions options;
  options.start = config.start;
  const PhononFitResult fit = fit_phonon_rates(data, model, options);

  RunSummary summary;
  summary.csv = config.output_dir / (config.name + ".csv");
  summary.metadata = config.output_dir / (config.name + ".json");
  summary.points = data.points.size();

  json meta = metadata_header(config);
  meta["params"] = params_to_json(config.params);
  meta["forward_model"] = forward_settings_json(fs);
  meta["forward_model"]["t_max"] = model.t_max();
  meta["forward_model"]["drive_table"] = model.table();
  meta["data"] = source;
  meta["data_points"] = json::array();
  for (const auto& pt : data.points) meta["data_points"].push_back({pt.omega_sq, pt.fwhm});
  meta["sigma_defaulted"] = data.sigma_defaulted();
  meta["default_sigma_fraction"] = kDefaultSigmaFraction;
  meta["fit"] = {{"gamma_ph_ads", fit.gamma_ph_ads},
                 {"gamma_ph_asp", fit.gamma_ph_asp},
                 {"sigma_ads", fit.sigma_ads},
                 {"sigma_asp", fit.sigma_asp},
                 {"correlation", fit.correlation},
                 {"residual_norm", fit.residual_norm},
                 {"converged", fit.converged},
                 {"clamped", fit.clamped},
                 {"iterations", fit.iterations},
                 {"objective_log", fit.objective_log},
                 {"start", {config.start.first, config.start.second}}};
  meta["evaluations"] = model.evaluations();
  meta["cache_hits"] = model.cache_hits();
  meta["summary"] = {{"points", summary.points}, {"failures", 0}, {"exit_code", 0}};

  write_text(summary.csv, calibration_csv(data, fit));
  write_json(summary.metadata, meta);
  summary.spot_check = spot_check(summary.metadata, summary.csv, kSpotCheckRows, config.seed);
  meta["spot_check"] = spot_check_json(summary.spot_check);
  write_json(summary.metadata, meta);
  if (config.plot) summary.plots = write_plots(summary.csv);
  return summary;
}

SpotCheckReport check_sweep(const json& meta, const std::vector<std::string>& lines, int count, std::uint64_t seed) {
  SpotCheckReport report;
  const std::size_t rows = meta.at("rows").size();
  for (auto row : pick_rows(rows, count, seed)) {
    const PointOutcome o = evaluate_point(spec_from_json(meta, row));
    report.rows.push_back(row);
    report.matches.push_back(row + 2 < lines.size() && sweep_csv_row(o.record) == lines[row + 2]);
  }
  return report;
}

SpotCheckReport check_spectrum(const json& meta, const std::vector<std::string>& lines, int count,
                               std::uint64_t seed) {
  SpotCheckReport report;
  const std::size_t rows = lines.size() > 2 ? lines.size() - 2 : 0;
  const auto picked = pick_rows(rows, count, seed);
  SimulationSettings s;
  s.grid = grid_from_json(meta.at("grid"));
  s.t_max = meta.at("t_max").get<double>();
  SystemParams p = params_from_json(meta.at("params"));
  p.fock_dim = meta.at("fock_used").get<int>();
  s.observable = default_observable(p);
  const SpectrumTrace trace = simulate_spectrum(p, s).trace;
  for (auto row : picked) {
    report.rows.push_back(row);
    const bool in_range = row < trace.size();
    report.matches.push_back(in_range && format_value(trace.omega[row]) + "," + format_value(trace.values[row]) ==
                                             lines[row + 2]);
  }
  return report;
}

SpotCheckReport check_calibration(const json& meta, const std::vector<std::string>& lines, int count,
                                  std::uint64_t seed) {
  SpotCheckReport report;
  const json& fm = meta.at("forward_model");
  ForwardModelSettings fs;
  fs.fock_dim = fm.at("fock_dim").get<int>();
  fs.frame = frame_from_string(fm.at("frame").get<std::string>());
  fs.spacing = fm.at("spacing").get<double>();
  fs.oversample = fm.at("oversample").get<double>();
  fs.window_margin = fm.at("window_margin").get<double>();
  fs.reference_rates = {fm.at("reference_rates").at(0).get<double>(), fm.at("reference_rates").at(1).get<double>()};
  fs.table_size = fm.at("table_size").get<int>();
  ForwardModel model(params_from_json(meta.at("params")), fs);

  const json& points = meta.at("data_points");
  std::vector<double> omega_sq;
  for (const auto& pt : points) omega_sq.push_back(pt.at(0).get<double>());
  model.prepare(std::sqrt(omega_sq.front()), std::sqrt(omega_sq.back()));
  const PhononRates rates{meta.at("fit").at("gamma_ph_ads").get<double>(),
                          meta.at("fit").at("gamma_ph_asp").get<double>()};
  for (auto row : pick_rows(omega_sq.size(), count, seed)) {
    const double omega = std::sqrt(omega_sq[row]);
    const double predicted = model.linewidth(rates, model.drive_for(omega), omega);
    report.rows.push_back(row);
    bool match = false;
    if (row + 2 < lines.size()) {
      std::vector<std::string> fields;
      std::stringstream ss(lines[row + 2]);
      std::string f;
      while (std::getline(ss, f, ',')) fields.push_back(f);
      match = fields.size() == 5 && fields[3] == format_value(predicted);
    }
    report.matches.push_back(match);
  }
  return report;
}

}  // namespace

SpotCheckReport spot_check(const std::filesystem::path& metadata, const std::filesystem::path& csv, int count,
                           std::uint64_t seed) {
  const json meta = read_json(metadata);
  const auto lines = csv_lines(csv);
  if (lines.empty()) throw ConfigError(csv.string() + ": empty file");
  try {
    if (lines.front() == kSweepSchema) return check_sweep(meta, lines, count, seed);
    if (lines.front() == kSpectrumSchema) return check_spectrum(meta, lines, count, seed);
    if (lines.front() == kCalibrationSchema) return check_calibration(meta, lines, count, seed);
  } catch (const json::exception& e) {
    throw ConfigError(metadata.string() + ": " + e.what());
  }
  throw ConfigError(csv.string() + ": unrecognized schema line");
}

RunSummary run(const RunConfig& config) {
  config.validate();
  switch (config.protocol) {
    case Protocol::spectrum: return run_spectrum(config);
    case Protocol::calibrate: return run_calibration(config);
    default: return run_sweep(config);
  }
}

}  // namespace mollow
