#pragma once

// casimir-lab command-line front end.
//
// Settings come from three layers: built-in defaults, a flat JSON config file
// (--config or $CASIMIR_LAB_CONFIG), then command-line flags. Every output
// starts with a provenance block and is written atomically.

#include <array>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "CLI11.hpp"
#include "casimir_lab/casimir_lab.hpp"
#include "json.hpp"

namespace casimir_lab::cli {

using nlohmann::json;

inline constexpr const char* kToolVersion = "1.0.0";

enum ExitCode : int { exit_ok = 0, exit_internal = 1, exit_config = 2, exit_convergence = 3, exit_data = 4 };

struct RunConfig {
  std::string command;
  // material
  std::string model = "drude";
  std::string preset = "au";
  std::optional<double> wp_ev;
  std::optional<double> gamma_ev;
  std::vector<std::array<double, 3>> oscillators;  // strength [eV^2], omega [eV], damping [eV]
  std::vector<std::array<double, 2>> core;         // C, omega [eV]
  bool include_dc = false;
  double sigma0 = 0.0;  // dc term coefficient [rad/s]
  // geometry and environment
  double radius_cm = 15.6;
  double temp_k = 300.0;
  std::optional<double> dmin;  // [m]
  std::optional<double> dmax;  // [m]
  int points = 20;
  bool log = false;
  std::string imperfections;
  // electrostatics and fit
  double vrms_mv = 0.0;
  double offset_pn = 0.0;
  std::string data;
  std::vector<std::string> models = {"drude", "plasma"};
  bool attractive_magnitudes = false;
  double sigma_sys_pn = 0.0;
  // entropy
  std::vector<double> temps = {1.0, 2.0, 5.0, 10.0, 50.0};
  double dT_frac = 0.1;
  double sep = 1e-6;  // [m]
  // masquerade
  std::string target = "drude";
  std::string candidate = "plasma";
  std::optional<double> verify_dmin;
  std::optional<double> verify_dmax;
  // patch window
  double lambda_um = 50.0;
  // output
  std::string out;
  std::string format = "csv";
  double tol = 1e-7;
};

// ---------------------------------------------------------------------------
// Parsing helpers

/// "700nm", "1.5um", "2 um" or a bare number in micrometres.
inline double parse_length(std::string s) {
  std::erase(s, ' ');
  double scale = units::um;
  if (s.ends_with("nm")) {
    scale = units::nm;
    s.resize(s.size() - 2);
  } else if (s.ends_with("um")) {
    s.resize(s.size() - 2);
  } else if (s.ends_with("m")) {
    throw ConfigError("unsupported length unit in '" + s + "' (use um or nm)");
  }
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) throw ConfigError("not a length: '" + s + "'");
  return v * scale;
}

inline double length_value(const json& v, const std::string& key) {
  if (v.is_number()) return v.get<double>() * units::um;
  if (v.is_string()) return parse_length(v.get<std::string>());
  throw ConfigError("'" + key + "' must be a length such as \"3um\"");
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::erase(item, ' ');
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

namespace detail {

template <class T>
T as(const json& v, const std::string& key) {
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config key '" + key + "' has the wrong type");
  }
}

inline std::vector<double> number_list(const json& v, const std::string& key) {
  if (v.is_array()) return as<std::vector<double>>(v, key);
  if (!v.is_string()) throw ConfigError("'" + key + "' must be a list of numbers");
  std::vector<double> out;
  for (const auto& item : split_list(v.get<std::string>())) {
    double x = 0.0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), x);
    if (ec != std::errc() || ptr != item.data() + item.size()) throw ConfigError("'" + key + "': not a number: " + item);
    out.push_back(x);
  }
  return out;
}

inline std::vector<std::string> string_list(const json& v, const std::string& key) {
  if (v.is_array()) return as<std::vector<std::string>>(v, key);
  return split_list(as<std::string>(v, key));
}

}  // namespace detail

/// Applies one settings layer. Unknown keys are errors.
inline void apply_settings(RunConfig& c, const json& layer) {
  using detail::as;
  if (!layer.is_object()) throw ConfigError("config must be a flat JSON object");
  for (const auto& [key, v] : layer.items()) {
    if (key == "model") c.model = as<std::string>(v, key);
    else if (key == "preset") c.preset = as<std::string>(v, key);
    else if (key == "wp") c.wp_ev = as<double>(v, key);
    else if (key == "gamma") c.gamma_ev = as<double>(v, key);
    else if (key == "oscillators") c.oscillators = as<std::vector<std::array<double, 3>>>(v, key);
    else if (key == "core") c.core = as<std::vector<std::array<double, 2>>>(v, key);
    else if (key == "include_dc") c.include_dc = as<bool>(v, key);
    else if (key == "sigma0") c.sigma0 = as<double>(v, key);
    else if (key == "radius") c.radius_cm = as<double>(v, key);
    else if (key == "temp") c.temp_k = as<double>(v, key);
    else if (key == "dmin") c.dmin = length_value(v, key);
    else if (key == "dmax") c.dmax = length_value(v, key);
    else if (key == "points") c.points = as<int>(v, key);
    else if (key == "log") c.log = as<bool>(v, key);
    else if (key == "imperfections") c.imperfections = as<std::string>(v, key);
    else if (key == "vrms") c.vrms_mv = as<double>(v, key);
    else if (key == "offset") c.offset_pn = as<double>(v, key);
    else if (key == "data") c.data = as<std::string>(v, key);
    else if (key == "models") c.models = detail::string_list(v, key);
    else if (key == "attractive_magnitudes") c.attractive_magnitudes = as<bool>(v, key);
    else if (key == "sigma_sys") c.sigma_sys_pn = as<double>(v, key);
    else if (key == "temps") c.temps = detail::number_list(v, key);
    else if (key == "dT") c.dT_frac = as<double>(v, key);
    else if (key == "sep") c.sep = length_value(v, key);
    else if (key == "target") c.target = as<std::string>(v, key);
    else if (key == "candidate") c.candidate = as<std::string>(v, key);
    else if (key == "verify_dmin") c.verify_dmin = length_value(v, key);
    else if (key == "verify_dmax") c.verify_dmax = length_value(v, key);
    else if (key == "lambda") c.lambda_um = as<double>(v, key);
    else if (key == "out") c.out = as<std::string>(v, key);
    else if (key == "format") c.format = as<std::string>(v, key);
    else if (key == "tol") c.tol = as<double>(v, key);
    else throw ConfigError("unknown config key '" + key + "'");
  }
}

inline json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file '" + path + "': " + e.what());
  }
}

/// Canonical JSON form of the resolved configuration (keys sorted).
inline json to_json(const RunConfig& c) {
  json j;
  j["command"] = c.command;
  j["model"] = c.model;
  j["preset"] = c.preset;
  j["wp"] = c.wp_ev ? json(*c.wp_ev) : json(nullptr);
  j["gamma"] = c.gamma_ev ? json(*c.gamma_ev) : json(nullptr);
  j["oscillators"] = c.oscillators;
  j["core"] = c.core;
  j["include_dc"] = c.include_dc;
  j["sigma0"] = c.sigma0;
  j["radius"] = c.radius_cm;
  j["temp"] = c.temp_k;
  j["dmin_um"] = c.dmin ? json(*c.dmin / units::um) : json(nullptr);
  j["dmax_um"] = c.dmax ? json(*c.dmax / units::um) : json(nullptr);
  j["points"] = c.points;
  j["log"] = c.log;
  j["imperfections"] = c.imperfections;
  j["vrms"] = c.vrms_mv;
  j["offset"] = c.offset_pn;
  j["data"] = c.data;
  j["models"] = c.models;
  j["attractive_magnitudes"] = c.attractive_magnitudes;
  j["sigma_sys"] = c.sigma_sys_pn;
  j["temps"] = c.temps;
  j["dT"] = c.dT_frac;
  j["sep_um"] = c.sep / units::um;
  j["target"] = c.target;
  j["candidate"] = c.candidate;
  j["verify_dmin_um"] = c.verify_dmin ? json(*c.verify_dmin / units::um) : json(nullptr);
  j["verify_dmax_um"] = c.verify_dmax ? json(*c.verify_dmax / units::um) : json(nullptr);
  j["lambda"] = c.lambda_um;
  j["format"] = c.format;
  j["tol"] = c.tol;
  return j;
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string config_hash(const RunConfig& c) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(to_json(c).dump())));
  return buf;
}

// ---------------------------------------------------------------------------
// Model construction and grids

inline double omega_p(const RunConfig& c) {
  if (c.preset != "au") throw ConfigError("unknown preset '" + c.preset + "' (available: au)");
  return convert_energy_to_angular_frequency(c.wp_ev.value_or(presets::au_omega_p_ev));
}

inline double damping(const RunConfig& c) {
  return convert_energy_to_angular_frequency(c.gamma_ev.value_or(presets::au_gamma_ev));
}

inline PermittivityModel build_model(const RunConfig& c, const std::string& name) {
  if (name == "drude") return Drude{omega_p(c), damping(c)};
  if (name == "plasma") return Plasma{omega_p(c)};
  if (name == "gplasma") {
    GeneralizedPlasma g{omega_p(c), {}};
    const double ev = constants::eV_to_rad_per_s;
    for (const auto& o : c.oscillators) g.oscillators.push_back({o[0] * ev * ev, o[1] * ev, o[2] * ev});
    return g;
  }
  if (name == "dielectric") {
    if (c.core.empty()) throw ConfigError("model 'dielectric' needs a 'core' oscillator table in the config");
    StaticPermittivityTable t;
    for (const auto& o : c.core) t.push_back({o[0], convert_energy_to_angular_frequency(o[1])});
    return DielectricCore{t, c.include_dc, c.sigma0};
  }
  throw ConfigError("unknown model '" + name + "' (drude, plasma, gplasma, dielectric)");
}

inline std::string describe_model(const RunConfig& c, const std::string& name) {
  char buf[160];
  const double wp = c.wp_ev.value_or(presets::au_omega_p_ev);
  if (name == "drude") {
    std::snprintf(buf, sizeof buf, "drude wp=%g eV gamma=%g eV", wp, c.gamma_ev.value_or(presets::au_gamma_ev));
  } else if (name == "plasma") {
    std::snprintf(buf, sizeof buf, "plasma wp=%g eV", wp);
  } else if (name == "gplasma") {
    std::snprintf(buf, sizeof buf, "gplasma wp=%g eV oscillators=%zu", wp, c.oscillators.size());
  } else {
    std::snprintf(buf, sizeof buf, "dielectric core_terms=%zu dc=%s", c.core.size(), c.include_dc ? "yes" : "no");
  }
  return buf;
}

inline std::vector<Separation> make_grid(double dmin, double dmax, int n, bool log) {
  if (n < 2) throw ConfigError("separation grid needs at least 2 points");
  if (!(dmin > 0.0) || !(dmin < dmax)) throw ConfigError("separation grid needs 0 < dmin < dmax");
  std::vector<Separation> g;
  for (int i = 0; i < n; ++i) {
    const double t = double(i) / (n - 1);
    const double d = log ? dmin * std::pow(dmax / dmin, t) : dmin + (dmax - dmin) * t;
    g.emplace_back(i == n - 1 ? dmax : d);
  }
  return g;
}

inline std::vector<Separation> grid_of(const RunConfig& c, double default_min, double default_max) {
  return make_grid(c.dmin.value_or(default_min), c.dmax.value_or(default_max), c.points, c.log);
}

inline void require_file(const std::string& path, const char* what) {
  if (!std::filesystem::exists(path)) throw ConfigError(std::string(what) + " file '" + path + "' does not exist");
}

inline void validate(const RunConfig& c) {
  if (c.format != "csv" && c.format != "json") throw ConfigError("format must be csv or json");
  if (!(c.tol > 0.0 && c.tol <= 1e-2)) throw ConfigError("tolerance must lie in (0, 1e-2]");
  if (!(c.radius_cm > 0.0)) throw ConfigError("radius must be positive");
  if (!(c.temp_k >= 0.0)) throw ConfigError("temperature must be non-negative");
  if (c.points < 2) throw ConfigError("separation grid needs at least 2 points");
  if (!(c.vrms_mv >= 0.0)) throw ConfigError("vrms must be non-negative");
  if (!c.data.empty()) require_file(c.data, "data");
  if (!c.imperfections.empty()) require_file(c.imperfections, "imperfections");
}

// ---------------------------------------------------------------------------
// Output

using Cell = std::variant<double, std::string>;

struct Report {
  std::vector<std::pair<std::string, std::string>> provenance;
  std::vector<std::pair<std::string, std::string>> summary;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  std::vector<std::string> warnings;
};

/// Shortest representation that reads back to the same double.
inline std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

inline std::string short_number(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

inline std::string render_csv(const Report& r) {
  std::string s;
  for (const auto& [k, v] : r.provenance) s += "# " + k + ": " + v + "\n";
  for (const auto& w : r.warnings) s += "# warning: " + w + "\n";
  for (const auto& [k, v] : r.summary) s += "# " + k + ": " + v + "\n";
  for (std::size_t i = 0; i < r.columns.size(); ++i) s += (i ? "," : "") + r.columns[i];
  s += "\n";
  for (const auto& row : r.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) s += ",";
      if (const double* x = std::get_if<double>(&row[i])) {
        s += format_number(*x);
      } else {
        s += std::get<std::string>(row[i]);
      }
    }
    s += "\n";
  }
  return s;
}

inline std::string render_json(const Report& r) {
  json j;
  j["provenance"] = json::object();
  for (const auto& [k, v] : r.provenance) j["provenance"][k] = v;
  j["summary"] = json::object();
  for (const auto& [k, v] : r.summary) j["summary"][k] = v;
  j["warnings"] = r.warnings;
  j["columns"] = r.columns;
  j["rows"] = json::array();
  for (const auto& row : r.rows) {
    json jr = json::array();
    for (const auto& cell : row) {
      if (const double* x = std::get_if<double>(&cell)) {
        jr.push_back(std::isfinite(*x) ? json(*x) : json(nullptr));
      } else {
        jr.push_back(std::get<std::string>(cell));
      }
    }
    j["rows"].push_back(jr);
  }
  return j.dump(2) + "\n";
}

/// Writes via a temporary sibling and rename, so readers never see a partial file.
inline void write_atomically(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw ConfigError("cannot write output file '" + path + "'");
    f << content;
    f.flush();
    if (!f) throw ConfigError("failed writing output file '" + path + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw ConfigError("cannot move output into place at '" + path + "'");
  }
}

inline Report make_report(const RunConfig& c, std::vector<std::string> model_names) {
  Report r;
  r.provenance.emplace_back("tool", std::string("casimir-lab ") + kToolVersion);
  r.provenance.emplace_back("command", c.command);
  r.provenance.emplace_back("config_hash", "fnv1a64:" + config_hash(c));
  for (const auto& name : model_names) r.provenance.emplace_back("model", describe_model(c, name));
  r.provenance.emplace_back("tolerance", "rel=" + short_number(c.tol));
  r.provenance.emplace_back("config", to_json(c).dump());
  return r;
}

// ---------------------------------------------------------------------------
// Subcommands

inline Report cmd_pressure(const RunConfig& c) {
  const auto drude = build_model(c, "drude");
  const auto plasma = build_model(c, "plasma");
  const Temperature T(c.temp_k);
  Report r = make_report(c, {"drude", "plasma"});
  r.summary.emplace_back("temperature_K", short_number(c.temp_k));
  r.columns = {"d_um", "P_drude_mPa", "P_plasma_mPa", "ratio"};
  for (const auto d : grid_of(c, 0.7 * units::um, 7.3 * units::um)) {
    const double pd = casimir_pressure(drude, {d, T, c.tol}).value;
    const double pp = casimir_pressure(plasma, {d, T, c.tol}).value;
    r.rows.push_back({d.um(), pd * 1e3, pp * 1e3, pd / pp});
  }
  return r;
}

inline Report cmd_force_curve(const RunConfig& c) {
  const auto model = build_model(c, c.model);
  const SphereGeometry g{c.radius_cm * units::cm, std::nullopt};
  const Temperature T(c.temp_k);
  const double v_rms = c.vrms_mv * units::mV;
  const double a = c.offset_pn * units::pN;
  std::vector<PfaPatch> patches;
  if (!c.imperfections.empty()) {
    const auto imps = load_imperfections(c.imperfections);
    patches = imperfection_patches(g, std::span<const Imperfection>(imps));
  }
  Report r = make_report(c, {c.model});
  r.summary.emplace_back("radius_cm", short_number(c.radius_cm));
  r.summary.emplace_back("temperature_K", short_number(c.temp_k));
  r.summary.emplace_back("vrms_mV", short_number(c.vrms_mv));
  r.summary.emplace_back("offset_pN", short_number(c.offset_pn));
  r.summary.emplace_back("geometry", patches.empty() ? "perfect lens, F_C = 2 pi R F(d)"
                                                     : "imperfect lens, F_C = 2 pi sum R_i F(d + D_i) over " +
                                                           std::to_string(patches.size()) + " patches");
  r.columns = {"d_um", "F_C_pN", "F_patch_pN", "F_offset_pN", "F_total_pN", "F_total_d_pN_um"};
  const LifshitzFreeEnergy fe{&model, T, c.tol};
  bool warned = false;
  for (const auto d : grid_of(c, 0.7 * units::um, 7.3 * units::um)) {
    if (!pfa_regime_ok(g, d) && !warned) {
      r.warnings.push_back("R/d <= 100: proximity-force approximation is outside its regime");
      warned = true;
    }
    const ForceValue fc = patches.empty() ? pfa_force(g, fe, d)
                                          : pfa_force_patches(g, std::span<const PfaPatch>(patches), fe, d);
    const ForceValue patch = patch_force(g.R, v_rms, d);
    const ForceValue total = total_force_model(d, fc, v_rms, a, g.R);
    r.rows.push_back({d.um(), fc.piconewtons(), patch.piconewtons(), -c.offset_pn, total.piconewtons(),
                      total.piconewtons() * d.um()});
  }
  return r;
}

inline Report cmd_fit(const RunConfig& c) {
  if (c.data.empty()) throw ConfigError("fit needs --data");
  auto data = load_dataset(c.data, {c.attractive_magnitudes});
  if (c.sigma_sys_pn > 0.0) data = with_systematic_error(data, c.sigma_sys_pn * units::pN);
  const double lo = c.dmin.value_or(0.0);
  const double hi = c.dmax.value_or(std::numeric_limits<double>::infinity());
  auto subset = data.subset(lo, hi);
  if (subset.size() < 3) {
    throw ConfigError("separation filter leaves " + std::to_string(subset.size()) +
                      " points; the two-parameter fit needs at least 3");
  }
  const SphereGeometry g{c.radius_cm * units::cm, std::nullopt};
  const Temperature T(c.temp_k);
  Report r = make_report(c, c.models);
  r.summary.emplace_back("points", std::to_string(subset.size()));
  if (c.dmin || c.dmax) {
    r.summary.emplace_back("filter_um", short_number(lo / units::um) + " .. " +
                                            (c.dmax ? short_number(hi / units::um) : std::string("inf")));
  }
  if (c.sigma_sys_pn > 0.0) r.summary.emplace_back("sigma_sys_pN", short_number(c.sigma_sys_pn));
  const auto rel = relative_errors(subset);
  double rmin = std::numeric_limits<double>::infinity();
  double rmax = 0.0;
  for (const auto& e : rel) {
    if (!e) {
      r.warnings.push_back("a data point has F = 0; its relative error is undefined");
      continue;
    }
    rmin = std::min(rmin, *e);
    rmax = std::max(rmax, *e);
  }
  if (rmax > 0.0) r.summary.emplace_back("relative_errors_percent", short_number(rmin) + " .. " + short_number(rmax));

  r.columns = {"model", "V_rms_mV", "a_pN", "chi2", "nu", "chi2_red", "Q", "negative_vrms2"};
  std::vector<std::pair<std::string, double>> qs;
  for (const auto& name : c.models) {
    const auto model = build_model(c, name);
    std::vector<double> casimir;
    for (const auto& p : subset.points) casimir.push_back(pfa_force(g, model, p.d, T, c.tol).newtons);
    const auto f = fit_two_param(subset, casimir, g.R);
    if (f.negative_vrms2) {
      r.warnings.push_back(name + ": fitted V_rms^2 is negative; V_rms is reported as -sqrt(-V_rms^2)");
    }
    r.rows.push_back({name, f.V_rms / units::mV, f.a / units::pN, f.chi2, double(f.nu), f.chi2_red, f.Q,
                      f.negative_vrms2 ? 1.0 : 0.0});
    qs.emplace_back(name, f.Q);
  }
  if (!qs.empty()) {
    std::string v;
    auto best = std::max_element(qs.begin(), qs.end(), [](auto& x, auto& y) { return x.second < y.second; });
    for (const auto& [name, q] : qs) v += (v.empty() ? "" : ", ") + name + " Q=" + short_number(q);
    if (qs.size() > 1) v += "; best: " + best->first;
    r.summary.emplace_back("verdict", v);
  }
  return r;
}

inline Report cmd_entropy(const RunConfig& c) {
  if (c.temps.empty()) throw ConfigError("entropy needs a temperature list");
  for (double t : c.temps) {
    if (!(t > 0.0)) throw ConfigError("entropy temperatures must be positive (central difference needs T > dT)");
  }
  if (!(c.dT_frac > 0.0 && c.dT_frac < 1.0)) throw ConfigError("dT must be a fraction of T in (0, 1)");
  const auto drude = build_model(c, "drude");
  const auto plasma = build_model(c, "plasma");
  const Separation d(c.sep);
  Report r = make_report(c, {"drude", "plasma"});
  r.summary.emplace_back("separation_um", short_number(d.um()));
  r.summary.emplace_back("units", "J/(K m^2)");
  r.columns = {"T_K", "S_drude", "S_drude_err", "S_plasma", "S_plasma_err", "status"};
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (double t : c.temps) {
    std::vector<Cell> row{t};
    std::string status = "ok";
    for (const auto* m : {&drude, &plasma}) {
      try {
        const auto s = entropy_per_area(*m, d, Temperature(t), c.dT_frac * t);
        row.insert(row.end(), {s.value, s.est_error});
      } catch (const ConvergenceError& e) {
        row.insert(row.end(), {nan, nan});
        status = std::string("unconverged ") + m->name();
      }
    }
    row.push_back(status);
    r.rows.push_back(std::move(row));
  }
  return r;
}

inline Report cmd_masquerade(const RunConfig& c) {
  const auto target = build_model(c, c.target);
  const auto candidate = build_model(c, c.candidate);
  const SphereGeometry g{c.radius_cm * units::cm, std::nullopt};
  const Temperature T(c.temp_k);
  const auto grid = grid_of(c, 0.7 * units::um, 3.0 * units::um);
  MasqueradeOptions opt;
  opt.rel_tol = c.tol;
  const auto res = find_masquerade(g, target, candidate, grid, T, opt);
  Report r = make_report(c, {c.target, c.candidate});
  r.summary.emplace_back("target", c.target + " (perfect lens)");
  r.summary.emplace_back("candidate", c.candidate + " (imperfect lens)");
  r.summary.emplace_back("best_R1_cm", short_number(res.best.R1 / units::cm));
  r.summary.emplace_back("best_D_um", short_number(res.best.D / units::um));
  r.summary.emplace_back("max_rel_dev", short_number(res.max_rel_dev));
  r.summary.emplace_back("verdict", to_string(res.verdict));
  r.columns = {"range", "d_um", "F_target_pN", "F_candidate_pN", "rel_dev"};
  auto emit = [&](const char* label, const std::vector<Separation>& ds, std::span<const double> dev) {
    for (std::size_t i = 0; i < ds.size(); ++i) {
      const double ft = pfa_force(g, target, ds[i], T, c.tol).piconewtons();
      r.rows.push_back({std::string(label), ds[i].um(), ft, ft * (1.0 + dev[i]), dev[i]});
    }
  };
  emit("search", grid, res.deviations);
  if (c.verify_dmin || c.verify_dmax) {
    if (!c.verify_dmin || !c.verify_dmax) throw ConfigError("verification range needs both --verify-dmin and --verify-dmax");
    const auto vgrid = make_grid(*c.verify_dmin, *c.verify_dmax, c.points, c.log);
    const auto dev = masquerade_deviations(g, res.best, target, candidate, vgrid, T, c.tol);
    double worst = 0.0;
    for (double e : dev) worst = std::max(worst, std::abs(e));
    r.summary.emplace_back("verify_max_rel_dev", short_number(worst));
    r.summary.emplace_back("verify_verdict", worst < opt.match_threshold ? "matched" : "not matched");
    emit("verify", vgrid, dev);
  }
  return r;
}

inline Report cmd_patch_window(const RunConfig& c) {
  const double R = c.radius_cm * units::cm;
  const double lambda = c.lambda_um * units::um;
  Report r = make_report(c, {});
  r.summary.emplace_back("lambda_um", short_number(c.lambda_um));
  r.columns = {"d_um", "r_eff_um", "lambda_lo_um", "lambda_hi_um", "lambda_geo_um", "lambda_inside"};
  bool all_inside = true;
  for (const auto d : grid_of(c, 0.7 * units::um, 7.3 * units::um)) {
    const auto w = patch_scale_window(R, d);
    all_inside = all_inside && w.contains(lambda);
    r.rows.push_back({d.um(), w.r_eff / units::um, w.lambda_lo / units::um, w.lambda_hi / units::um,
                      w.lambda_geo / units::um, w.contains(lambda) ? 1.0 : 0.0});
  }
  r.summary.emplace_back("lambda_inside_everywhere", all_inside ? "yes" : "no");
  return r;
}

// ---------------------------------------------------------------------------
// Entry point

struct Flags {
  std::optional<std::string> config, model, preset, dmin, dmax, data, imperfections, out, format, models, temps, sep,
      target, candidate, verify_dmin, verify_dmax;
  std::optional<double> wp, gamma, radius, temp, vrms, offset, tol, sigma_sys, dT, lambda;
  std::optional<int> points;
  bool log = false;
  bool attractive = false;

  json as_layer() const {
    json j = json::object();
    auto put = [&](const char* k, const auto& v) {
      if (v) j[k] = *v;
    };
    put("model", model);
    put("preset", preset);
    put("dmin", dmin);
    put("dmax", dmax);
    put("data", data);
    put("imperfections", imperfections);
    put("out", out);
    put("format", format);
    put("models", models);
    put("temps", temps);
    put("sep", sep);
    put("target", target);
    put("candidate", candidate);
    put("verify_dmin", verify_dmin);
    put("verify_dmax", verify_dmax);
    put("wp", wp);
    put("gamma", gamma);
    put("radius", radius);
    put("temp", temp);
    put("vrms", vrms);
    put("offset", offset);
    put("tol", tol);
    put("sigma_sys", sigma_sys);
    put("dT", dT);
    put("lambda", lambda);
    put("points", points);
    if (log) j["log"] = true;
    if (attractive) j["attractive_magnitudes"] = true;
    return j;
  }
};

inline void add_shared_flags(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config, "JSON config file (default: $CASIMIR_LAB_CONFIG)");
  sub->add_option("--model", f.model, "drude | plasma | gplasma | dielectric");
  sub->add_option("--preset", f.preset, "material preset (au)");
  sub->add_option("--wp", f.wp, "plasma frequency [eV]");
  sub->add_option("--gamma", f.gamma, "relaxation frequency [eV]");
  sub->add_option("--radius", f.radius, "lens curvature radius [cm]");
  sub->add_option("--temp", f.temp, "temperature [K]");
  sub->add_option("--dmin", f.dmin, "smallest separation, e.g. 0.7um or 700nm");
  sub->add_option("--dmax", f.dmax, "largest separation");
  sub->add_option("--points", f.points, "number of separations (>= 2)");
  sub->add_flag("--log", f.log, "logarithmic separation grid");
  sub->add_option("--data", f.data, "force dataset CSV (d_um,f_pn,sigma_pn)");
  sub->add_option("--imperfections", f.imperfections, "lens imperfection CSV (r1_cm,d_offset_um)");
  sub->add_option("--vrms", f.vrms, "patch voltage scale [mV]");
  sub->add_option("--offset", f.offset, "constant force offset a [pN]");
  sub->add_option("--out", f.out, "output path (default: stdout)");
  sub->add_option("--format", f.format, "csv | json");
  sub->add_option("--tol", f.tol, "relative tolerance of the Lifshitz evaluation");
}

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Casimir force calculator: Lifshitz theory, PFA geometry, electrostatics and fitting"};
  app.set_version_flag("--version", std::string("casimir-lab ") + kToolVersion);
  app.require_subcommand(1);
  Flags f;
  auto* pressure = app.add_subcommand("pressure", "plate-plate pressure, Drude vs plasma");
  auto* force = app.add_subcommand("force-curve", "lens-plate total force with breakdown");
  auto* fit = app.add_subcommand("fit", "two-parameter fit of a force dataset");
  auto* entropy = app.add_subcommand("entropy", "Casimir entropy per area at low temperature");
  auto* masq = app.add_subcommand("masquerade", "search lens imperfections that mimic another model");
  auto* window = app.add_subcommand("patch-window", "admissible patch sizes for the large-patch force");
  for (auto* s : {pressure, force, fit, entropy, masq, window}) add_shared_flags(s, f);
  fit->add_option("--models", f.models, "comma-separated models to fit (default drude,plasma)");
  fit->add_flag("--attractive-magnitudes", f.attractive, "force column holds magnitudes of attractive forces");
  fit->add_option("--sigma-sys", f.sigma_sys, "instrumental error added in quadrature [pN]");
  entropy->add_option("--temps", f.temps, "comma-separated temperatures [K]");
  entropy->add_option("--dT", f.dT, "finite-difference step as a fraction of T");
  entropy->add_option("--sep", f.sep, "separation, e.g. 1um");
  masq->add_option("--target", f.target, "model of the perfect lens (default drude)");
  masq->add_option("--candidate", f.candidate, "model of the imperfect lens (default plasma)");
  masq->add_option("--verify-dmin", f.verify_dmin, "check the best imperfection over a second range");
  masq->add_option("--verify-dmax", f.verify_dmax);
  window->add_option("--lambda", f.lambda, "patch size to test [um]");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_ok : exit_config;
  }

  try {
    RunConfig c;
    for (auto* s : app.get_subcommands()) c.command = s->get_name();
    std::optional<std::string> config_path = f.config;
    if (!config_path) {
      if (const char* env = std::getenv("CASIMIR_LAB_CONFIG"); env && *env) config_path = env;
    }
    if (config_path) apply_settings(c, load_config_file(*config_path));
    apply_settings(c, f.as_layer());
    validate(c);

    Report r;
    if (c.command == "pressure") r = cmd_pressure(c);
    else if (c.command == "force-curve") r = cmd_force_curve(c);
    else if (c.command == "fit") r = cmd_fit(c);
    else if (c.command == "entropy") r = cmd_entropy(c);
    else if (c.command == "masquerade") r = cmd_masquerade(c);
    else r = cmd_patch_window(c);

    for (const auto& w : r.warnings) err << "warning: " << w << "\n";
    const std::string text = c.format == "json" ? render_json(r) : render_csv(r);
    if (c.out.empty()) {
      out << text;
    } else {
      write_atomically(c.out, text);
    }
    return exit_ok;
  } catch (const ConvergenceError& e) {
    err << "error: not converged: " << e.what() << " (partial " << e.partial() << ", bound " << e.bound() << ")\n";
    return exit_convergence;
  } catch (const DataError& e) {
    err << "error: data: " << e.what() << "\n";
    return exit_data;
  } catch (const ConfigError& e) {
    err << "error: config: " << e.what() << "\n";
    return exit_config;
  } catch (const DomainError& e) {
    err << "error: invalid input: " << e.what() << "\n";
    return exit_config;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_internal;
  }
}

}  // namespace casimir_lab::cli
