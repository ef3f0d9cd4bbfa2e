#include "nanoqed/config.hpp"

#include <cmath>
#include <limits>
#include <set>

namespace nanoqed {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [k, v] : j.items())
    if (!ok.count(k)) throw ConfigError(where + ": unknown key '" + k + "'");
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

double number(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw ConfigError(where + ": missing '" + key + "'");
  const auto& v = j.at(key);
  if (v.is_string() && (v == "inf" || v == "infinity")) return kInf;
  if (!v.is_number()) throw ConfigError(where + ": '" + key + "' must be a number");
  return v.get<double>();
}

json length_out(double v) { return std::isinf(v) ? json("inf") : json(v); }

double preset_eps(const std::string& name) {
  if (name == "silica") return 1.45 * 1.45;
  if (name == "ingap") return 3.31 * 3.31;
  throw ConfigError("unknown medium preset '" + name + "' (known: silica, ingap)");
}

PlacementMode parse_mode(const std::string& s) {
  if (s == "ordered") return PlacementMode::Ordered;
  if (s == "disordered") return PlacementMode::Disordered;
  throw ConfigError("placement mode must be 'ordered' or 'disordered'");
}

std::string mode_name(PlacementMode m) { return m == PlacementMode::Ordered ? "ordered" : "disordered"; }

// Geometry in nanometres with every default filled in.
json resolve_geometry(const json& g) {
  const std::string type = get_or<std::string>(g, "type", "");
  json out;
  out["type"] = type;
  if (type == "cylinder") {
    check_keys(g, "geometry", {"type", "radius_nm", "length_nm"});
    out["radius_nm"] = number(g, "radius_nm", "geometry");
    out["length_nm"] = number(g, "length_nm", "geometry");
  } else if (type == "comb") {
    check_keys(g, "geometry", {"type", "period_nm", "tooth_height_nm", "tooth_width_nm", "backbone_width_nm",
                               "backbone_thickness_nm", "length_nm", "periods"});
    const double a = number(g, "period_nm", "geometry");
    out["period_nm"] = a;
    out["tooth_height_nm"] = get_or(g, "tooth_height_nm", 1.5 * a);
    out["tooth_width_nm"] = get_or(g, "tooth_width_nm", 0.5 * a);
    out["backbone_width_nm"] = get_or(g, "backbone_width_nm", a);
    out["backbone_thickness_nm"] = get_or(g, "backbone_thickness_nm", 1.5 * a);
    if (g.contains("length_nm") == g.contains("periods"))
      throw ConfigError("geometry: give exactly one of 'length_nm' and 'periods' for a comb");
    out["length_nm"] = g.contains("length_nm") ? number(g, "length_nm", "geometry") : a * get_or(g, "periods", 0);
  } else if (type == "slab") {
    check_keys(g, "geometry", {"type", "thickness_nm", "extent_y_nm", "extent_z_nm"});
    out["thickness_nm"] = length_out(number(g, "thickness_nm", "geometry"));
    out["extent_y_nm"] = length_out(number(g, "extent_y_nm", "geometry"));
    out["extent_z_nm"] = length_out(number(g, "extent_z_nm", "geometry"));
  } else if (type == "box") {
    check_keys(g, "geometry", {"type", "lo_nm", "hi_nm"});
    out["lo_nm"] = get_or<std::vector<double>>(g, "lo_nm", {});
    out["hi_nm"] = get_or<std::vector<double>>(g, "hi_nm", {});
    if (out["lo_nm"].size() != 3 || out["hi_nm"].size() != 3) throw ConfigError("geometry: box corners need 3 values");
  } else {
    throw ConfigError("geometry: type must be cylinder, comb, slab or box");
  }
  return out;
}

Geometry build_geometry(const json& g, const LengthScale& s) {
  const std::string type = g.at("type");
  auto L = [&](const char* k) { return s.to_internal(number(g, k, "geometry")); };
  Geometry out;
  if (type == "cylinder") {
    out = Cylinder{L("radius_nm"), L("length_nm")};
  } else if (type == "comb") {
    out = CombPCW{L("period_nm"), L("tooth_height_nm"), L("tooth_width_nm"), L("backbone_width_nm"),
                  L("backbone_thickness_nm"), L("length_nm")};
  } else if (type == "slab") {
    out = Slab{L("thickness_nm"), L("extent_y_nm"), L("extent_z_nm")};
  } else {
    const auto lo = g.at("lo_nm").get<std::vector<double>>();
    const auto hi = g.at("hi_nm").get<std::vector<double>>();
    out = Box{s.to_internal(Vec3(lo[0], lo[1], lo[2])), s.to_internal(Vec3(hi[0], hi[1], hi[2]))};
  }
  validate(out);
  return out;
}

std::vector<double> resolve_distances(const json& sweep) {
  if (sweep.contains("distances_nm")) {
    if (sweep.contains("from_nm") || sweep.contains("to_nm") || sweep.contains("points"))
      throw ConfigError("sweep: give either 'distances_nm' or a from/to/points range");
    auto d = get_or<std::vector<double>>(sweep, "distances_nm", {});
    if (d.empty()) throw ConfigError("sweep: empty distance list");
    return d;
  }
  const double from = number(sweep, "from_nm", "sweep");
  const double to = number(sweep, "to_nm", "sweep");
  const int n = get_or(sweep, "points", 0);
  const std::string spacing = get_or<std::string>(sweep, "spacing", "geometric");
  if (n < 1) throw ConfigError("sweep: points must be >= 1");
  if (!(from > 0.0) || !(to >= from)) throw ConfigError("sweep: need 0 < from_nm <= to_nm");
  std::vector<double> d(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double t = n == 1 ? 0.0 : static_cast<double>(i) / (n - 1);
    if (spacing == "geometric")
      d[i] = from * std::pow(to / from, t);
    else if (spacing == "linear")
      d[i] = from + (to - from) * t;
    else
      throw ConfigError("sweep: spacing must be 'geometric' or 'linear'");
  }
  return d;
}

json comb_preset(const std::string& scheme, double period, const std::string& site, double density) {
  return {{"scheme", scheme},
          {"geometry", {{"type", "comb"}, {"period_nm", period}, {"periods", 8}}},
          {"medium", {{"density", density}, {"preset", "ingap"}}},
          {"placement", {{"mode", "ordered"}, {"seed", 1}, {"realizations", 1}}},
          {"sweep", {{"site", site}, {"from_nm", 50.0}, {"to_nm", 800.0}, {"points", 16}}},
          // InGaP needs a small detuning, close to the collective medium modes;
          // without the scatterer linewidth those modes show up as gain.
          {"solver", {{"include_medium_linewidth", true}}},
          {"vdw", {{"enabled", true}}}};
}

json cylinder_preset(const std::string& scheme, double lambda_nm, double lengths, double density) {
  return {{"scheme", scheme},
          {"geometry", {{"type", "cylinder"}, {"radius_nm", 200.0}, {"length_nm", lengths * lambda_nm}}},
          {"medium", {{"density", density}, {"preset", "silica"}}},
          {"placement", {{"mode", "ordered"}, {"seed", 1}, {"realizations", 1}}},
          {"sweep", {{"site", "radial"}, {"from_nm", 250.0}, {"to_nm", 2000.0}, {"points", 24}}},
          {"vdw", {{"enabled", true}}}};
}

}  // namespace

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string version_string() { return std::string("nanoqed ") + NANOQED_VERSION + " (" + NANOQED_GIT_DESCRIBE + ")"; }

std::vector<std::string> preset_names() {
  return {"fig2-desk", "fig3-desk", "fig5-desk", "fig6-desk", "fig7-desk", "fig8-desk",
          "fig10",     "fig2-full", "fig3-full", "fig5-full"};
}

json preset_config(const std::string& name) {
  const double rb = schemes::rb87_f0_to_f1().lambda0_nm;
  const double cs = schemes::cs133_f5_to_f4().lambda0_nm;
  json j;
  if (name == "fig2-desk") j = cylinder_preset("rb87-f0-f1", rb, 2.0, 10.0);
  else if (name == "fig3-desk") j = cylinder_preset("cs133-f5-f4", cs, 2.0, 10.0);
  else if (name == "fig5-desk") j = comb_preset("cs133-f5-f4", 400.0, "behind-tooth", 6.0);
  else if (name == "fig6-desk") j = comb_preset("cs133-f5-f4", 400.0, "between-teeth", 6.0);
  else if (name == "fig7-desk") j = comb_preset("rb87-f3-f2", 370.0, "behind-tooth", 6.0);
  else if (name == "fig8-desk") j = comb_preset("rb87-f3-f2", 370.0, "between-teeth", 6.0);
  else if (name == "fig10") {
    j = cylinder_preset("rb87-f0-f1", rb, 2.0, 20.0);
    j["fit"] = {{"from", -50.0}, {"to", 50.0}, {"points", 201}};
  } else if (name == "fig2-full" || name == "fig3-full") {
    const bool cesium = name == "fig3-full";
    j = cylinder_preset(cesium ? "cs133-f5-f4" : "rb87-f0-f1", cesium ? cs : rb, 4.0, 20.0);
    j["solver"]["memory_budget_mb"] = 4096;
    j["long_running"] = true;
  } else if (name == "fig5-full") {
    j = comb_preset("cs133-f5-f4", 400.0, "behind-tooth", 20.0);
    j["solver"]["memory_budget_mb"] = 16384;
    j["long_running"] = true;
  } else {
    std::string known;
    for (const auto& n : preset_names()) known += " " + n;
    throw ConfigError("unknown preset '" + name + "' (known:" + known + ")");
  }
  j["preset"] = name;
  return j;
}

json merge_config(const json& base, const json& overlay) {
  json out = base;
  out.merge_patch(overlay);
  return out;
}

ExperimentConfig parse_config(const json& j) {
  check_keys(j, "config", {"preset", "long_running", "scheme", "geometry", "medium", "placement", "sweep", "solver",
                           "vdw", "fit", "converge", "oracle", "output"});
  ExperimentConfig c;
  c.preset = get_or<std::string>(j, "preset", "");
  c.long_running = get_or(j, "long_running", false);

  // Scheme: preset name or explicit quantum numbers.
  if (!j.contains("scheme")) throw ConfigError("config: missing 'scheme'");
  const json& s = j.at("scheme");
  if (s.is_string()) {
    c.scheme_name = s.get<std::string>();
    c.scheme = schemes::by_name(c.scheme_name);
  } else {
    check_keys(s, "scheme", {"name", "F_excited", "F_ground", "lambda0_nm", "gamma_inf_per_s"});
    c.scheme_name = get_or<std::string>(s, "name", "custom");
    c.scheme.F_excited = number(s, "F_excited", "scheme");
    c.scheme.F_ground = number(s, "F_ground", "scheme");
    c.scheme.lambda0_nm = number(s, "lambda0_nm", "scheme");
    c.scheme.gamma_inf_per_s = get_or(s, "gamma_inf_per_s", 1.0);
    c.scheme.label = c.scheme_name;
  }
  c.scheme.validate();
  const LengthScale scale = c.scale();

  if (!j.contains("geometry")) throw ConfigError("config: missing 'geometry'");
  c.geometry_nm = resolve_geometry(j.at("geometry"));
  c.geometry = build_geometry(c.geometry_nm, scale);

  const json m = get_or<json>(j, "medium", json::object());
  check_keys(m, "medium", {"density", "gamma_e", "target_eps", "refractive_index", "preset", "delta_M",
                           "calibrated_eps", "f0_sq"});
  const double density = number(m, "density", "medium");
  const double gamma_e = get_or(m, "gamma_e", 1.0);
  const int given = int(m.contains("target_eps")) + int(m.contains("refractive_index")) + int(m.contains("preset")) +
                    int(m.contains("delta_M"));
  if (given != 1) throw ConfigError("medium: give exactly one of target_eps, refractive_index, preset, delta_M");
  if (m.contains("delta_M")) {
    c.medium.n0 = density;
    c.medium.gamma_e = gamma_e;
    c.medium.f0_sq = 0.75 * gamma_e;
    c.medium.delta_M = number(m, "delta_M", "medium");
    c.medium.validate();
    const double achieved = permittivity(c.medium, 0.0).real();
    c.medium.target_eps = achieved;
    // A resolved file carries the calibration target; keep it exactly so the
    // configuration hash survives the round trip.
    if (m.contains("calibrated_eps")) {
      const double target = number(m, "calibrated_eps", "medium");
      if (std::abs(target - achieved) > 1e-6 * achieved)
        throw ConfigError("medium: calibrated_eps does not match delta_M (gives " + std::to_string(achieved) + ")");
      c.medium.target_eps = target;
    }
  } else {
    double eps = 0.0;
    if (m.contains("preset")) {
      c.medium_preset = m.at("preset").get<std::string>();
      eps = preset_eps(c.medium_preset);
    } else if (m.contains("refractive_index")) {
      const double n = number(m, "refractive_index", "medium");
      eps = n * n;
    } else {
      eps = number(m, "target_eps", "medium");
    }
    c.medium = calibrated_medium(density, gamma_e, eps);
  }

  const json p = get_or<json>(j, "placement", json::object());
  check_keys(p, "placement", {"mode", "seed", "realizations", "r_min_nm", "max_attempts_per_scatterer"});
  c.placement.mode = parse_mode(get_or<std::string>(p, "mode", "ordered"));
  c.seed = get_or<std::uint64_t>(p, "seed", 1);
  c.realizations = get_or(p, "realizations", 1);
  if (c.realizations < 1) throw ConfigError("placement: realizations must be >= 1");
  c.placement.r_min = scale.to_internal(get_or(p, "r_min_nm", scale.to_nm(0.1)));
  c.placement.max_attempts_per_scatterer = get_or(p, "max_attempts_per_scatterer", 2000);
  if (!(c.placement.r_min >= 0.0)) throw ConfigError("placement: r_min_nm must be >= 0");

  const json sw = get_or<json>(j, "sweep", json::object());
  check_keys(sw, "sweep", {"site", "distances_nm", "from_nm", "to_nm", "points", "spacing", "periods_nm"});
  const std::string default_site = std::holds_alternative<Cylinder>(c.geometry)  ? "radial"
                                   : std::holds_alternative<CombPCW>(c.geometry) ? "behind-tooth"
                                                                                 : "normal";
  c.site = parse_atom_site(get_or<std::string>(sw, "site", default_site));
  c.distances_nm = resolve_distances(sw);
  for (std::size_t i = 1; i < c.distances_nm.size(); ++i)
    if (!(c.distances_nm[i] > c.distances_nm[i - 1])) throw ConfigError("sweep: distances must increase strictly");
  c.periods_nm = get_or<std::vector<double>>(sw, "periods_nm", {});
  if (!c.periods_nm.empty() && !std::holds_alternative<CombPCW>(c.geometry))
    throw ConfigError("sweep: periods_nm needs a comb geometry");
  for (double a : c.periods_nm)
    if (!(a > 0.0)) throw ConfigError("sweep: periods must be positive");
  atom_site(c.geometry, c.site, scale.to_internal(c.distances_nm.front()));  // site/geometry compatibility

  const json so = get_or<json>(j, "solver", json::object());
  check_keys(so, "solver", {"cluster_tol", "include_medium_linewidth", "memory_budget_mb", "min_clearance_nm"});
  c.cluster_tol = get_or(so, "cluster_tol", c.placement.mode == PlacementMode::Disordered ? 1e-2 : 1e-3);
  c.include_medium_linewidth = get_or(so, "include_medium_linewidth", false);
  const double mb = get_or(so, "memory_budget_mb", 2048.0);
  if (!(mb > 0.0)) throw ConfigError("solver: memory_budget_mb must be positive");
  c.memory_budget = static_cast<std::size_t>(mb * 1024.0 * 1024.0);
  c.min_clearance_nm = get_or(so, "min_clearance_nm", 0.0);
  if (!(c.cluster_tol > 0.0)) throw ConfigError("solver: cluster_tol must be positive");

  const json v = get_or<json>(j, "vdw", json::object());
  check_keys(v, "vdw", {"enabled", "quad_tol"});
  c.vdw_enabled = get_or(v, "enabled", false);
  c.vdw_quad_tol = get_or(v, "quad_tol", 1e-6);

  const json f = get_or<json>(j, "fit", json::object());
  check_keys(f, "fit", {"from", "to", "points"});
  c.fit.from = get_or(f, "from", -50.0);
  c.fit.to = get_or(f, "to", 50.0);
  c.fit.points = get_or(f, "points", 201);
  if (c.fit.points < 2 || !(c.fit.to > c.fit.from)) throw ConfigError("fit: need from < to and points >= 2");

  const json cv = get_or<json>(j, "converge", json::object());
  check_keys(cv, "converge", {"densities", "modes", "trusted_min_nm"});
  c.converge.densities = get_or<std::vector<double>>(cv, "densities", {});
  if (cv.contains("modes")) {
    c.converge.modes.clear();
    for (const auto& name : cv.at("modes")) c.converge.modes.push_back(parse_mode(name.get<std::string>()));
  }
  double trusted = 0.0;
  if (const auto* cyl = std::get_if<Cylinder>(&c.geometry)) trusted = 1.25 * scale.to_nm(cyl->radius);
  c.converge.trusted_min_nm = get_or(cv, "trusted_min_nm", trusted);

  const json o = get_or<json>(j, "oracle", json::object());
  check_keys(o, "oracle", {"instances", "max_scatterers", "corrupt_sign"});
  c.oracle.instances = get_or(o, "instances", 30);
  c.oracle.max_scatterers = get_or(o, "max_scatterers", 50);
  c.oracle.corrupt_sign = get_or(o, "corrupt_sign", false);
  if (c.oracle.max_scatterers > 100 || c.oracle.max_scatterers < 0) throw ConfigError("oracle: N is capped at 100");
  if (c.oracle.instances < 1) throw ConfigError("oracle: need at least one instance");

  const json out = get_or<json>(j, "output", json::object());
  check_keys(out, "output", {"dir"});
  c.output_dir = get_or<std::string>(out, "dir", "");
  return c;
}

json ExperimentConfig::resolved() const {
  json j;
  if (!preset.empty()) j["preset"] = preset;
  j["long_running"] = long_running;
  j["scheme"] = {{"name", scheme_name},
                 {"F_excited", scheme.F_excited},
                 {"F_ground", scheme.F_ground},
                 {"lambda0_nm", scheme.lambda0_nm},
                 {"gamma_inf_per_s", scheme.gamma_inf_per_s}};
  j["geometry"] = geometry_nm;
  j["medium"] = {{"density", medium.n0},
                 {"gamma_e", medium.gamma_e},
                 {"delta_M", medium.delta_M},
                 {"f0_sq", medium.f0_sq},
                 {"calibrated_eps", medium.target_eps}};
  j["placement"] = {{"mode", mode_name(placement.mode)},
                    {"seed", seed},
                    {"realizations", realizations},
                    {"r_min_nm", scale().to_nm(placement.r_min)},
                    {"max_attempts_per_scatterer", placement.max_attempts_per_scatterer}};
  j["sweep"] = {{"site", atom_site_name(site)}, {"distances_nm", distances_nm}};
  if (!periods_nm.empty()) j["sweep"]["periods_nm"] = periods_nm;
  j["solver"] = {{"cluster_tol", cluster_tol},
                 {"include_medium_linewidth", include_medium_linewidth},
                 {"memory_budget_mb", static_cast<double>(memory_budget) / (1024.0 * 1024.0)},
                 {"min_clearance_nm", min_clearance_nm}};
  j["vdw"] = {{"enabled", vdw_enabled}, {"quad_tol", vdw_quad_tol}};
  j["fit"] = {{"from", fit.from}, {"to", fit.to}, {"points", fit.points}};
  json modes = json::array();
  for (auto m : converge.modes) modes.push_back(mode_name(m));
  j["converge"] = {{"densities", converge.densities}, {"modes", modes}, {"trusted_min_nm", converge.trusted_min_nm}};
  j["oracle"] = {{"instances", oracle.instances},
                 {"max_scatterers", oracle.max_scatterers},
                 {"corrupt_sign", oracle.corrupt_sign}};
  if (!output_dir.empty()) j["output"] = {{"dir", output_dir}};
  return j;
}

std::uint64_t ExperimentConfig::hash() const {
  json j = resolved();
  j.erase("output");
  const std::string text = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

ScanRequest make_scan_request(const ExperimentConfig& cfg, double period_nm) {
  const LengthScale s = cfg.scale();
  ScanRequest r;
  r.scheme = cfg.scheme;
  r.geometry = cfg.geometry;
  if (period_nm > 0.0) {
    const auto* comb = std::get_if<CombPCW>(&cfg.geometry);
    if (!comb) throw ConfigError("period override needs a comb geometry");
    r.geometry = scaled(cfg.geometry, s.to_internal(period_nm) / comb->period);
  }
  r.model = cfg.medium;
  r.placement = cfg.placement;
  r.seed = cfg.seed;
  r.realizations = cfg.realizations;
  r.site = cfg.site;
  for (double d : cfg.distances_nm) r.distances.push_back(s.to_internal(d));
  r.cluster_tol = cfg.cluster_tol;
  r.include_medium_linewidth = cfg.include_medium_linewidth;
  r.memory_budget = cfg.memory_budget;
  r.min_clearance = s.to_internal(cfg.min_clearance_nm);
  return r;
}

}  // namespace nanoqed
