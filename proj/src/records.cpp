#include "mollow/records.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "mollow/error.hpp"

namespace mollow {

std::string to_string(PointStatus status) {
  switch (status) {
    case PointStatus::ok: return "ok";
    case PointStatus::numerical: return "numerical";
    case PointStatus::invalid: return "invalid";
  }
  return "unknown";
}

namespace {

PointStatus status_from_string(const std::string& text) {
  for (auto s : {PointStatus::ok, PointStatus::numerical, PointStatus::invalid}) {
    if (to_string(s) == text) return s;
  }
  throw ConfigError("unknown point status '" + text + "'");
}

const std::vector<std::string>& sweep_columns() {
  static const std::vector<std::string> cols{
      "index",           "variant",          "drive_J",        "omega_target_GHz",        "omega_GHz",
      "omega_sq_GHz2",   "lower_center_GHz", "lower_fwhm_GHz", "lower_fwhm_filtered_GHz", "upper_center_GHz",
      "upper_fwhm_GHz",  "area_low",         "area_high",      "area_ratio",              "cavity_area",
      "cavity_held",     "N_used",           "top_fock_population", "lower_converged",    "four_converged",
      "status"};
  return cols;
}

std::vector<std::string> split(const std::string& line, char sep = ',') {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, sep)) {
    if (!field.empty() && field.back() == '\r') field.pop_back();
    out.push_back(field);
  }
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_field(const std::string& text) {
  if (text.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw ConfigError("expected a number, got '" + text + "'");
  }
  if (used != text.size()) throw ConfigError("expected a number, got '" + text + "'");
  return v;
}

}  // namespace

std::string format_value(double value) {
  if (std::isnan(value)) return {};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", value);
  return buf;
}

std::string sweep_csv_header() {
  std::string out;
  for (const auto& c : sweep_columns()) out += (out.empty() ? "" : ",") + c;
  return out;
}

std::string sweep_csv_row(const SweepRecord& r) {
  std::ostringstream os;
  os << r.index << ',' << r.variant << ',' << format_value(r.drive_J) << ',' << format_value(r.omega_target) << ','
     << format_value(r.omega) << ',' << format_value(r.omega_sq()) << ',' << format_value(r.lower_center) << ','
     << format_value(r.lower_fwhm) << ',' << format_value(r.lower_fwhm_filtered) << ','
     << format_value(r.upper_center) << ',' << format_value(r.upper_fwhm) << ',' << format_value(r.area_low) << ','
     << format_value(r.area_high) << ',' << format_value(r.area_ratio()) << ',' << format_value(r.cavity_area) << ','
     << (r.cavity_held ? 1 : 0) << ',' << r.fock_used << ',' << format_value(r.top_fock_population) << ','
     << (r.lower_converged ? 1 : 0) << ',' << (r.four_converged ? 1 : 0) << ',' << to_string(r.status);
  return os.str();
}

std::string sweep_csv(const std::vector<SweepRecord>& records) {
  std::string out = std::string(kSweepSchema) + "\n" + sweep_csv_header() + "\n";
  for (const auto& r : records) out += sweep_csv_row(r) + "\n";
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  out.close();
  if (!out) throw IoError("failed writing " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::vector<SweepRecord> read_sweep_csv(const std::filesystem::path& path) {
  std::istringstream in(read_text(path));
  std::string line;
  int line_no = 0;
  auto where = [&] { return path.string() + ":" + std::to_string(line_no) + ": "; };
  if (!std::getline(in, line) || trim(line) != kSweepSchema) {
    line_no = 1;
    throw ConfigError(where() + "expected schema line '" + kSweepSchema + "'");
  }
  ++line_no;
  if (!std::getline(in, line) || trim(line) != sweep_csv_header()) {
    ++line_no;
    throw ConfigError(where() + "unexpected column header");
  }
  ++line_no;
  std::vector<SweepRecord> out;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto f = split(line);
    if (f.size() != sweep_columns().size()) throw ConfigError(where() + "wrong number of fields");
    try {
      SweepRecord r;
      r.index = static_cast<std::size_t>(std::stoul(f[0]));
      r.variant = f[1];
      r.drive_J = parse_field(f[2]);
      r.omega_target = parse_field(f[3]);
      r.omega = parse_field(f[4]);
      r.lower_center = parse_field(f[6]);
      r.lower_fwhm = parse_field(f[7]);
      r.lower_fwhm_filtered = parse_field(f[8]);
      r.upper_center = parse_field(f[9]);
      r.upper_fwhm = parse_field(f[10]);
      r.area_low = parse_field(f[11]);
      r.area_high = parse_field(f[12]);
      r.cavity_area = parse_field(f[14]);
      r.cavity_held = f[15] == "1";
      r.fock_used = std::stoi(f[16]);
      r.top_fock_population = parse_field(f[17]);
      r.lower_converged = f[18] == "1";
      r.four_converged = f[19] == "1";
      r.status = status_from_string(f[20]);
      out.push_back(std::move(r));
    } catch (const ConfigError& e) {
      throw ConfigError(where() + e.what());
    } catch (const std::exception&) {
      throw ConfigError(where() + "malformed row");
    }
  }
  return out;
}

LinewidthCurve parse_linewidth_csv(const std::string& text, const std::string& source) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  auto fail = [&](const std::string& msg) { throw ConfigError(source + ":" + std::to_string(line_no) + ": " + msg); };

  std::vector<std::string> header;
  while (header.empty() && std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    for (const auto& h : split(t)) header.push_back(trim(h));
  }
  if (header.empty()) fail("missing column header");
  const bool has_sigma = header.size() == 3;
  if (header.size() < 2 || header.size() > 3 || header[0] != "omega_sq_GHz2" || header[1] != "fwhm_GHz" ||
      (has_sigma && header[2] != "fwhm_sigma_GHz")) {
    fail("header must be omega_sq_GHz2,fwhm_GHz[,fwhm_sigma_GHz]");
  }

  LinewidthCurve curve;
  std::map<double, int> first_line;
  int previous_line = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto f = split(t);
    if (f.size() != header.size()) fail("expected " + std::to_string(header.size()) + " fields");
    LinewidthPoint pt;
    try {
      pt.omega_sq = parse_field(trim(f[0]));
      pt.fwhm = parse_field(trim(f[1]));
      if (has_sigma && !trim(f[2]).empty()) pt.fwhm_sigma = parse_field(trim(f[2]));
    } catch (const ConfigError& e) {
      fail(e.what());
    }
    if (!(std::isfinite(pt.omega_sq) && pt.omega_sq > 0.0)) fail("omega_sq must be positive");
    if (!(std::isfinite(pt.fwhm) && pt.fwhm > 0.0)) fail("fwhm must be positive");
    if (pt.fwhm_sigma && !(std::isfinite(*pt.fwhm_sigma) && *pt.fwhm_sigma > 0.0)) fail("fwhm_sigma must be positive");
    if (const auto it = first_line.find(pt.omega_sq); it != first_line.end()) {
      fail("omega_sq " + format_value(pt.omega_sq) + " duplicates line " + std::to_string(it->second));
    }
    if (!curve.points.empty() && !(pt.omega_sq > curve.points.back().omega_sq)) {
      fail("omega_sq decreases relative to line " + std::to_string(previous_line));
    }
    first_line.emplace(pt.omega_sq, line_no);
    previous_line = line_no;
    curve.points.push_back(pt);
  }
  if (curve.points.empty()) fail("no data rows");
  return curve;
}

LinewidthCurve import_experimental(const std::filesystem::path& path) {
  return parse_linewidth_csv(read_text(path), path.string());
}

std::string linewidth_csv(const LinewidthCurve& curve) {
  std::string out = std::string(kLinewidthSchema) + "\nomega_sq_GHz2,fwhm_GHz,fwhm_sigma_GHz\n";
  for (const auto& pt : curve.points) {
    out += format_value(pt.omega_sq) + "," + format_value(pt.fwhm) + "," +
           (pt.fwhm_sigma ? format_value(*pt.fwhm_sigma) : std::string()) + "\n";
  }
  return out;
}

LinewidthCurve curve_from_records(const std::vector<SweepRecord>& records, const std::string& variant) {
  std::vector<const SweepRecord*> rows;
  for (const auto& r : records) {
    if (r.variant == variant && r.ok() && std::isfinite(r.omega) && std::isfinite(r.lower_fwhm)) rows.push_back(&r);
  }
  std::sort(rows.begin(), rows.end(), [](const auto* a, const auto* b) { return a->omega_sq() < b->omega_sq(); });
  LinewidthCurve curve;
  for (const auto* r : rows) curve.points.push_back({r->omega_sq(), r->lower_fwhm, std::nullopt});
  return curve;
}

TransitionReport transition_locator(const std::vector<SweepRecord>& records, double delta_cx,
                                    const std::string& variant) {
  const LinewidthCurve curve = curve_from_records(records, variant);
  if (curve.points.size() < 6) throw InvalidArgument("transition_locator needs at least 6 successful points");
  const auto x = curve.omega_sq();
  const auto y = curve.fwhm();
  TransitionReport out;
  out.crossing = delta_cx * delta_cx;
  out.fit = fit_segmented(x, y);
  out.breakpoint = locate_breakpoint(x, y);
  return out;
}

}  // namespace mollow
