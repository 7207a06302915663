#include "mollow/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "mollow/error.hpp"

namespace mollow {

std::string to_string(Protocol protocol) {
  switch (protocol) {
    case Protocol::spectrum: return "spectrum";
    case Protocol::linewidth_sweep: return "linewidth_sweep";
    case Protocol::intensity_sweep: return "intensity_sweep";
    case Protocol::ablation: return "ablation";
    case Protocol::calibrate: return "calibrate";
  }
  return "unknown";
}

std::string to_string(SweepAxis axis) { return axis == SweepAxis::drive_J ? "drive_J" : "omega"; }

void RunConfig::validate() const {
  try {
    params.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  if (protocol != Protocol::spectrum && !(protocol == Protocol::calibrate && data) && sweep.values.empty()) throw ConfigError("the sweep has no points");
  for (double v : sweep.values) {
    if (!std::isfinite(v) || v < 0.0) throw ConfigError("sweep values must be finite and nonnegative");
    if (sweep.axis == SweepAxis::omega && v <= 0.0) throw ConfigError("target Rabi frequencies must be positive");
  }
  if (!(grid.spacing > 0.0)) throw ConfigError("omega_spacing must be positive");
  if (grid.omega_min.has_value() != grid.omega_max.has_value()) {
    throw ConfigError("omega_min and omega_max must be given together");
  }
  if (grid.omega_min && !(*grid.omega_max > *grid.omega_min)) throw ConfigError("omega_max must exceed omega_min");
  if (grid.t_max && !(*grid.t_max > 0.0)) throw ConfigError("t_max must be positive");
  if (fock && *fock < 2) throw ConfigError("fock_dim must be at least 2");
  if (workers < 1) throw ConfigError("workers must be at least 1");
  if (!(noise >= 0.0 && noise < 1.0)) throw ConfigError("noise must lie in [0, 1)");
  if (start.first < 0.0 || start.second < 0.0) throw ConfigError("starting phonon rates must be nonnegative");
  if (calibration_fock < 2) throw ConfigError("calibration_fock must be at least 2");
  if (name.empty() || name.find_first_of("/\\ ") != std::string::npos) {
    throw ConfigError("name must be a non-empty token without spaces or slashes");
  }
}

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_double(const std::string& text) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end || !std::isfinite(value)) throw ConfigError("expected a number, got '" + text + "'");
  return value;
}

long long parse_integer(const std::string& text) {
  long long value = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end) throw ConfigError("expected an integer, got '" + text + "'");
  return value;
}

bool parse_bool(const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ConfigError("expected true or false, got '" + text + "'");
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(trim(item)));
  if (out.empty()) throw ConfigError("expected a comma-separated list of numbers");
  return out;
}

Protocol protocol_from_string(const std::string& text) {
  for (auto p : {Protocol::spectrum, Protocol::linewidth_sweep, Protocol::intensity_sweep, Protocol::ablation,
                 Protocol::calibrate}) {
    if (to_string(p) == text) return p;
  }
  throw ConfigError("unknown protocol '" + text + "'");
}

// Range keys are collected first and expanded once the whole file is read.
struct RangeKeys {
  std::optional<double> start;
  std::optional<double> stop;
  std::optional<long long> count;
  bool squared = false;
  bool any() const { return start || stop || count; }
};

using Setter = std::function<void(RunConfig&, RangeKeys&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    auto number = [&t](const char* key, auto member) {
      t[key] = [member](RunConfig& c, RangeKeys&, const std::string& v) { c.params.*member = parse_double(v); };
    };
    number("delta_c", &SystemParams::delta_c);
    number("delta_x", &SystemParams::delta_x);
    number("g", &SystemParams::g);
    number("kappa", &SystemParams::kappa);
    number("gamma", &SystemParams::gamma);
    number("gamma_d", &SystemParams::gamma_d);
    number("gamma_ph_ads", &SystemParams::gamma_ph_ads);
    number("gamma_ph_asp", &SystemParams::gamma_ph_asp);
    number("drive_J", &SystemParams::drive_J);
    number("omega_direct", &SystemParams::omega_direct);
    t["drive_target"] = [](RunConfig& c, RangeKeys&, const std::string& v) {
      try {
        c.params.drive_target = drive_target_from_string(v);
      } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
      }
    };
    t["frame"] = [](RunConfig& c, RangeKeys&, const std::string& v) {
      try {
        c.params.frame = frame_from_string(v);
      } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
      }
    };
    t["uncoupled"] = [](RunConfig& c, RangeKeys&, const std::string& v) { c.params.uncoupled = parse_bool(v); };
    t["fock_dim"] = [](RunConfig& c, RangeKeys&, const std::string& v) {
      if (v == "auto") {
        c.fock.reset();
      } else {
        c.fock = static_cast<int>(parse_integer(v));
        c.params.fock_dim = *c.fock;
      }
    };
    t["name"] = [](RunConfig& c, RangeKeys&, const std::string& v) { c.name = v; };
    t["protocol"] = [](RunConfig& c, RangeKeys&, const std::string& v) { c.protocol = protocol_from_string(v); };
    t["sweep_axis"] = [](RunConfig& c, RangeKeys&, const std::string& v) {
      if (v == "drive_J") {
        c.sweep.axis = SweepAxis::drive_J;
      } else if (v == "omega") {
        c.sweep.axis = SweepAxis::omega;
      } else {
        throw ConfigError("sweep_axis must be drive_J or omega");
      }
    };
    t["sweep_values"] = [](RunConfig& c, RangeKeys&, const std::string& v) { c.sweep.values = parse_list(v); };
    t["sweep_start"] = [](RunConfig&, RangeKeys& r, const std::string& v) { r.start = parse_double(v); };
    t["sweep_stop"] = [](RunConfig&, RangeKeys& r, const std::string& v) { r.stop = parse_double(v); };
    t["sweep_count"] = [](RunConfig&, RangeKeys& r, const std::string& v) { r.count = parse_integer(v); };
    t["sweep_scale"] = [](RunConfig&, RangeKeys& r, const std::string& v) {
      if (v != "linear" && v != "squared") throw ConfigError("sweep_scale must be linear or squared");
      r.squared = v == "squared";
    };
    t["omega_min"] = [](RunConfig& c, RangeKeys&, const std::string& v) { c.grid.omega_min = parse_double(v); };
    t["omega_max"] = [](RunConfig& c, RangeKeys&, const std::string& v) { c.grid.omega_max = parse_double(v); };
    t["omega_spacing"] = [](RunConfig& c, RangeKeys&, const std::string& v) { c.grid.spacing = parse_double(v); };
    t["grid_margin"] = [](RunConfig& c, RangeKeys&, const std::string& v) { c.grid.margin = parse_double(v); };
    t["t_max"] = [](RunConfig& c, RangeKeys&, const std::string& v) { c.grid.t_max = parse_double(v); };
    t["workers"] = [](RunConfig& c, RangeKeys&, const std::string& v) {
      c.workers = static_cast<int>(parse_integer(v));
    };
    t["plot"] = [](RunConfig& c, RangeKeys&, const std::string& v) { c.plot = parse_bool(v); };
    t["output_dir"] = [](RunConfig& c, RangeKeys&, const std::string& v) { c.output_dir = v; };
    t["seed"] = [](RunConfig& c, RangeKeys&, const std::string& v) {
      const long long s = parse_integer(v);
      if (s < 0) throw ConfigError("seed must be nonnegative");
      c.seed = static_cast<std::uint64_t>(s);
    };
    t["data"] = [](RunConfig& c, RangeKeys&, const std::string& v) { c.data = std::filesystem::path(v); };
    t["noise"] = [](RunConfig& c, RangeKeys&, const std::string& v) { c.noise = parse_double(v); };
    t["start_ads"] = [](RunConfig& c, RangeKeys&, const std::string& v) { c.start.first = parse_double(v); };
    t["start_asp"] = [](RunConfig& c, RangeKeys&, const std::string& v) { c.start.second = parse_double(v); };
    t["calibration_fock"] = [](RunConfig& c, RangeKeys&, const std::string& v) {
      c.calibration_fock = static_cast<int>(parse_integer(v));
    };
    return t;
  }();
  return table;
}

std::vector<double> expand_range(const RangeKeys& r) {
  if (!(r.start && r.stop && r.count)) throw ConfigError("sweep_start, sweep_stop and sweep_count must be given together");
  if (*r.count < 1) throw ConfigError("sweep_count must be positive");
  if (*r.count == 1) return {*r.start};
  std::vector<double> out;
  const auto n = static_cast<double>(*r.count - 1);
  for (long long i = 0; i < *r.count; ++i) {
    const double f = static_cast<double>(i) / n;
    if (r.squared) {
      const double a = *r.start * *r.start;
      const double b = *r.stop * *r.stop;
      out.push_back(std::sqrt(a + (b - a) * f));
    } else {
      out.push_back(*r.start + (*r.stop - *r.start) * f);
    }
  }
  return out;
}

}  // namespace

RunConfig parse_config(const std::string& text, RunConfig config) {
  RangeKeys range;
  bool explicit_values = false;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = "line " + std::to_string(line_no) + ": ";
    if (eq == std::string::npos) throw ConfigError(where + "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError(where + "unknown key '" + key + "'");
    if (!seen.insert(key).second) throw ConfigError(where + "duplicate key '" + key + "'");
    if (value.empty()) throw ConfigError(where + "missing value for '" + key + "'");
    try {
      it->second(config, range, value);
    } catch (const ConfigError& e) {
      throw ConfigError(where + key + ": " + e.what());
    }
    explicit_values = explicit_values || key == "sweep_values";
  }
  if (range.any() || seen.count("sweep_scale")) {
    if (explicit_values) throw ConfigError("sweep_values cannot be combined with a sweep range");
    config.sweep.values = expand_range(range);
  }
  config.validate();
  return config;
}

RunConfig load_config(const std::filesystem::path& path, RunConfig defaults) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_config(buffer.str(), std::move(defaults));
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

namespace {

std::string exact(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

std::string render_config(const RunConfig& c) {
  std::ostringstream os;
  const auto& p = c.params;
  os << "name = " << c.name << "\n"
     << "protocol = " << to_string(c.protocol) << "\n"
     << "delta_c = " << exact(p.delta_c) << "\n"
     << "delta_x = " << exact(p.delta_x) << "\n"
     << "g = " << exact(p.g) << "\n"
     << "kappa = " << exact(p.kappa) << "\n"
     << "gamma = " << exact(p.gamma) << "\n"
     << "gamma_d = " << exact(p.gamma_d) << "\n"
     << "gamma_ph_ads = " << exact(p.gamma_ph_ads) << "\n"
     << "gamma_ph_asp = " << exact(p.gamma_ph_asp) << "\n"
     << "drive_J = " << exact(p.drive_J) << "\n"
     << "omega_direct = " << exact(p.omega_direct) << "\n"
     << "drive_target = " << to_string(p.drive_target) << "\n"
     << "frame = " << to_string(p.frame) << "\n"
     << "uncoupled = " << (p.uncoupled ? "true" : "false") << "\n"
     << "fock_dim = " << (c.fock ? std::to_string(*c.fock) : std::string("auto")) << "\n"
     << "sweep_axis = " << to_string(c.sweep.axis) << "\n";
  if (!c.sweep.values.empty()) {
    os << "sweep_values = ";
    for (std::size_t i = 0; i < c.sweep.values.size(); ++i) os << (i ? ", " : "") << exact(c.sweep.values[i]);
    os << "\n";
  }
  if (c.grid.omega_min) os << "omega_min = " << exact(*c.grid.omega_min) << "\n";
  if (c.grid.omega_max) os << "omega_max = " << exact(*c.grid.omega_max) << "\n";
  os << "omega_spacing = " << exact(c.grid.spacing) << "\n"
     << "grid_margin = " << exact(c.grid.margin) << "\n";
  if (c.grid.t_max) os << "t_max = " << exact(*c.grid.t_max) << "\n";
  os << "workers = " << c.workers << "\n"
     << "plot = " << (c.plot ? "true" : "false") << "\n"
     << "output_dir = " << c.output_dir.string() << "\n"
     << "seed = " << c.seed << "\n";
  if (c.data) os << "data = " << c.data->string() << "\n";
  os << "noise = " << exact(c.noise) << "\n"
     << "start_ads = " << exact(c.start.first) << "\n"
     << "start_asp = " << exact(c.start.second) << "\n"
     << "calibration_fock = " << c.calibration_fock << "\n";
  return os.str();
}

namespace {

// Figure recipes. Rates at 85 GHz are the values quoted for that detuning.
const std::map<std::string, std::string>& presets() {
  static const std::map<std::string, std::string> table{
      {"fig2b",
       "protocol = intensity_sweep\ndelta_c = 42\ngamma_ph_ads = 0.19\ngamma_ph_asp = 0.28\n"
       "sweep_start = 15\nsweep_stop = 70\nsweep_count = 12\n"},
      {"fig2d",
       "protocol = intensity_sweep\ndelta_c = 85\ngamma_ph_ads = 0.17\ngamma_ph_asp = 0.37\n"
       "sweep_start = 15\nsweep_stop = 75\nsweep_count = 13\n"},
      {"fig3b",
       "protocol = linewidth_sweep\ndelta_c = 42\ngamma_ph_ads = 0.19\ngamma_ph_asp = 0.28\n"
       "sweep_start = 15\nsweep_stop = 70\nsweep_count = 16\nsweep_scale = squared\n"},
      {"fig3c",
       "protocol = linewidth_sweep\ndelta_c = 85\ngamma_ph_ads = 0.17\ngamma_ph_asp = 0.37\n"
       "sweep_start = 15\nsweep_stop = 70\nsweep_count = 16\nsweep_scale = squared\n"},
      {"fig4a",
       "protocol = ablation\ndelta_c = 42\ngamma_ph_ads = 0.19\ngamma_ph_asp = 0.28\n"
       "sweep_start = 15\nsweep_stop = 70\nsweep_count = 16\nsweep_scale = squared\n"},
      {"fig4b",
       "protocol = ablation\ndelta_c = 85\ngamma_ph_ads = 0.17\ngamma_ph_asp = 0.37\n"
       "sweep_start = 15\nsweep_stop = 70\nsweep_count = 16\nsweep_scale = squared\n"},
  };
  return table;
}

}  // namespace

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [name, text] : presets()) out.push_back(name);
    return out;
  }();
  return names;
}

std::string preset_text(const std::string& name) {
  const auto it = presets().find(name);
  if (it == presets().end()) throw ConfigError("unknown preset '" + name + "'");
  return "name = " + name + "\n" + it->second +
         "g = 15.3\nkappa = 36\ngamma = 0.16\ngamma_d = 1\nframe = displaced\nfock_dim = 8\n"
         "sweep_axis = omega\nomega_spacing = 0.2\n";
}

RunConfig preset_config(const std::string& name) { return parse_config(preset_text(name)); }

}  // namespace mollow
