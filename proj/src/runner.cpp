#include "nanoqed/runner.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <random>

#include "nanoqed/greens.hpp"
#include "nanoqed/reference.hpp"

namespace nanoqed {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10e", v);
  return buf;
}

void say(const RunOptions& opt, const std::string& msg) {
  if (opt.log) *opt.log << msg << '\n' << std::flush;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + path.string());
  f << text;
}

std::string provenance(const ExperimentConfig& cfg) {
  return "# " + version_string() + " config_hash=" + hex64(cfg.hash()) + "\n";
}

json sidecar_base(const ExperimentConfig& cfg, const std::string& command) {
  return {{"command", command}, {"version", version_string()}, {"config_hash", hex64(cfg.hash())},
          {"config", cfg.resolved()}};
}

std::string vdw_csv(const ExperimentConfig& cfg, const std::vector<double>& d, const std::vector<VdwResult>& v) {
  std::string s = provenance(cfg);
  s += "# static ground-state estimate; an upper bound for the surface attraction\n";
  s += "distance_nm,vdw_shift_over_gamma_inf,quad_error_estimate\n";
  for (std::size_t i = 0; i < d.size(); ++i) s += num(d[i]) + "," + num(v[i].shift) + "," + num(v[i].error_estimate) + "\n";
  return s;
}

VdwSpec vdw_spec(const ExperimentConfig& cfg, const Geometry& g) {
  VdwSpec spec;
  spec.eps = cfg.medium.target_eps;
  spec.dipole_sq_sum = ground_dipole_sq_sum(cfg.scheme);
  spec.geometry = g;
  spec.quad_tol = cfg.vdw_quad_tol;
  return spec;
}

std::string raw_csv(const ExperimentConfig& cfg, const ScanOutcome& o) {
  std::string s = provenance(cfg);
  s += "distance_nm,realization,label,multiplicity,gamma_over_gamma_inf,delta_over_gamma_inf,cluster_width\n";
  for (std::size_t i = 0; i < o.result.points.size(); ++i) {
    const auto& p = o.result.points[i];
    for (std::size_t r = 0; r < p.per_realization.size(); ++r)
      for (const auto& c : p.per_realization[r].clusters)
        s += num(o.distances_nm[i]) + "," + std::to_string(r) + "," + (c.label ? std::to_string(*c.label) : "") + "," +
             std::to_string(c.multiplicity) + "," + num(c.gamma) + "," + num(c.delta) + "," + num(c.width) + "\n";
  }
  return s;
}

ScanOutcome run_one_scan(const ExperimentConfig& cfg, const RunOptions& opt, double period_nm,
                         const std::filesystem::path& dir) {
  ScanOutcome out;
  out.period_nm = period_nm;
  ScanRequest req = make_scan_request(cfg, period_nm);
  const LengthScale s = cfg.scale();

  // Points that cannot be placed are recorded and skipped.
  std::vector<double> keep;
  for (std::size_t i = 0; i < req.distances.size(); ++i) {
    try {
      const Vec3 a = atom_site(req.geometry, req.site, req.distances[i]);
      const double c = clearance(req.geometry, a);
      if (!(c > 0.0) || c < req.min_clearance) throw ConfigError("atom closer to the body than min_clearance_nm");
      keep.push_back(req.distances[i]);
      out.distances_nm.push_back(cfg.distances_nm[i]);
    } catch (const ConfigError& e) {
      out.failures.push_back({cfg.distances_nm[i], e.what()});
    }
  }
  if (!out.failures.empty() && opt.strict)
    throw ConfigError("scan: " + std::to_string(out.failures.size()) + " distance(s) rejected: " + out.failures[0].reason);
  if (keep.empty()) throw ConfigError("scan: no valid distances");
  req.distances = keep;

  say(opt, "scan: " + geometry_name(req.geometry) + ", " + std::to_string(req.distances.size()) + " distances, " +
               std::to_string(req.realizations) + " realization(s)");
  out.result = scan(req);

  for (const auto& p : out.result.points)
    if (p.min_decay_eigenvalue < 0.0) ++out.gain_points;
  if (out.gain_points > 0 && opt.strict)
    throw NumericalError("scan: negative decay eigenvalue at " + std::to_string(out.gain_points) + " point(s)");

  if (cfg.vdw_enabled) {
    std::vector<Vec3> pos;
    for (double d : req.distances) pos.push_back(atom_site(req.geometry, req.site, d));
    out.vdw = vdw_profile(vdw_spec(cfg, req.geometry), pos);
    write_file(dir / "vdw.csv", vdw_csv(cfg, out.distances_nm, out.vdw));
  }

  write_file(dir / "spectrum.csv", spectrum_csv(cfg, out));
  write_file(dir / "spectrum_raw.csv", raw_csv(cfg, out));

  json side = sidecar_base(cfg, "scan");
  side["period_nm"] = period_nm > 0.0 ? json(period_nm) : json(nullptr);
  side["reduced_wavelength_nm"] = s.reduced_wavelength_nm();
  json reals = json::array();
  for (std::size_t r = 0; r < out.result.realizations.size(); ++r) {
    const auto& info = out.result.realizations[r];
    reals.push_back({{"index", r},
                     {"seed", realization_seed(cfg.seed, static_cast<int>(r))},
                     {"n_scatterers", info.n_scatterers},
                     {"rcond", info.rcond},
                     {"seconds", info.seconds}});
  }
  side["realizations"] = reals;
  json points = json::array();
  for (std::size_t i = 0; i < out.result.points.size(); ++i) {
    const auto& p = out.result.points[i];
    bool low_conf = false;
    for (const auto& sp : p.per_realization)
      for (const auto& c : sp.clusters) low_conf = low_conf || c.low_confidence;
    points.push_back({{"distance_nm", out.distances_nm[i]},
                      {"label_fallback", p.label_fallback},
                      {"low_confidence_label", low_conf},
                      {"min_decay_eigenvalue", p.min_decay_eigenvalue},
                      {"gain", p.min_decay_eigenvalue < 0.0}});
  }
  side["points"] = points;
  json fails = json::array();
  for (const auto& f : out.failures) fails.push_back({{"distance_nm", f.distance_nm}, {"reason", f.reason}});
  side["failures"] = fails;
  write_file(dir / "spectrum.json", side.dump(2) + "\n");
  return out;
}

double trace_gamma(const Eigen::VectorXcd& ev) {
  double g = 0.0;
  for (Eigen::Index k = 0; k < ev.size(); ++k) g += -2.0 * ev(k).imag();
  return g / static_cast<double>(ev.size());
}

}  // namespace

std::string spectrum_csv(const ExperimentConfig& cfg, const ScanOutcome& o) {
  std::string s = provenance(cfg);
  s += "distance_nm,label,multiplicity,gamma_over_gamma_inf,delta_over_gamma_inf,stderr_gamma,stderr_delta,"
       "n_realizations\n";
  for (std::size_t i = 0; i < o.result.points.size(); ++i)
    for (const auto& c : o.result.points[i].clusters)
      s += num(o.distances_nm[i]) + "," + (c.label ? std::to_string(*c.label) : "") + "," +
           std::to_string(c.multiplicity) + "," + num(c.gamma) + "," + num(c.delta) + "," + num(c.stderr_gamma) + "," +
           num(c.stderr_delta) + "," + std::to_string(c.n_realizations) + "\n";
  return s;
}

FitReport cmd_fit(const ExperimentConfig& cfg, const RunOptions& opt) {
  FitReport rep;
  rep.delta_M = cfg.medium.delta_M;
  rep.eps_at_resonance = permittivity(cfg.medium, 0.0).real();
  for (int i = 0; i < cfg.fit.points; ++i)
    rep.omega.push_back(cfg.fit.from + (cfg.fit.to - cfg.fit.from) * i / (cfg.fit.points - 1));
  rep.eps = permittivity_scan(cfg.medium, rep.omega);

  std::string csv = provenance(cfg);
  csv += "omega_over_gamma_inf,eps_real,eps_imag\n";
  for (std::size_t i = 0; i < rep.omega.size(); ++i)
    csv += num(rep.omega[i]) + "," + num(rep.eps[i].real()) + "," + num(rep.eps[i].imag()) + "\n";
  write_file(opt.out_dir / "fit.csv", csv);

  json side = sidecar_base(cfg, "fit");
  side["delta_M"] = rep.delta_M;
  side["eps_at_resonance"] = rep.eps_at_resonance;
  write_file(opt.out_dir / "fit.json", side.dump(2) + "\n");
  say(opt, "fit: density " + num(cfg.medium.n0) + " target eps " + num(cfg.medium.target_eps) + " -> delta_M " +
               num(rep.delta_M));
  return rep;
}

std::vector<ScanOutcome> cmd_scan(const ExperimentConfig& cfg, const RunOptions& opt) {
  std::vector<ScanOutcome> all;
  if (cfg.periods_nm.empty()) {
    all.push_back(run_one_scan(cfg, opt, 0.0, opt.out_dir));
  } else {
    for (double a : cfg.periods_nm) {
      char name[64];
      std::snprintf(name, sizeof name, "period_%.1f", a);
      all.push_back(run_one_scan(cfg, opt, a, opt.out_dir / name));
    }
  }
  return all;
}

OracleReport cmd_oracle(const ExperimentConfig& cfg, const RunOptions& opt) {
  OracleReport rep;
  const std::vector<std::string> names{"rb87-f0-f1", "rb87-f3-f2", "cs133-f5-f4", "v-atom"};
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const double sign = cfg.oracle.corrupt_sign ? -1.0 : 1.0;

  auto fast_sigma = [&](const DipoleTable& dip, const DipoleCloud& cloud, const Vec3& atom, bool lw) {
    if (cloud.size() == 0) return self_energy_from_response(dip, CMat3::Zero(), sign);
    const MediumResolvent res(cloud, lw);
    const Vec3 atoms[1] = {atom};
    return self_energy_from_response(dip, res.response(atoms)[0], sign);
  };
  // Measured against the medium's contribution alone; the free-atom -i/2 part
  // would otherwise dominate the norm and hide errors in the elimination.
  auto rel = [](const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
    const Eigen::MatrixXcd free = cplx(0.0, -0.5) * Eigen::MatrixXcd::Identity(b.rows(), b.cols());
    const double scale = (b - free).norm();
    return scale > 0.0 ? (a - b).norm() / scale : (a - b).norm();
  };

  for (int inst = 0; inst < cfg.oracle.instances; ++inst) {
    const TransitionScheme scheme = schemes::by_name(names[inst % names.size()]);
    const DipoleTable dip(scheme);
    OracleCase oc;
    oc.scheme = names[inst % names.size()];
    DipoleCloud cloud;
    cloud.model.n0 = 1.0;
    cloud.model.delta_M = 20.0 + 280.0 * U(rng);
    const bool lw = U(rng) < 0.5;
    const int n = inst == 0 ? 0 : 1 + static_cast<int>(U(rng) * cfg.oracle.max_scatterers) % cfg.oracle.max_scatterers;
    const double side = std::cbrt(static_cast<double>(std::max(n, 1))) + 0.5;
    while (static_cast<int>(cloud.positions.size()) < n) {
      const Vec3 p(side * U(rng), side * U(rng), side * U(rng));
      bool ok = true;
      for (const auto& q : cloud.positions) ok = ok && (p - q).norm() > 0.3;
      if (ok) cloud.positions.push_back(p);
    }
    const Vec3 atom(side + 0.3 + 1.7 * U(rng), side * U(rng), side * U(rng));
    oc.n_scatterers = n;
    const Eigen::MatrixXcd fast = fast_sigma(dip, cloud, atom, lw);
    if (n == 0) {
      oc.kind = "free-atom";
      const Eigen::MatrixXcd exact = Eigen::MatrixXcd::Identity(dip.n_excited(), dip.n_excited()) * cplx(0.0, -0.5);
      oc.rel_error = rel(fast, exact);
    } else {
      oc.kind = "random";
      oc.rel_error = rel(fast, reference::full_resolvent_self_energy(scheme, cloud, atom, lw));
    }
    oc.pass = oc.rel_error < rep.tolerance;
    rep.cases.push_back(oc);
  }

  // Two-body closed form: Rb tripod with one scatterer on the z axis.
  for (double r : {0.7, 1.9, 4.3}) {
    const TransitionScheme scheme = schemes::rb87_f0_to_f1();
    const DipoleTable dip(scheme);
    DipoleCloud cloud;
    cloud.model.n0 = 1.0;
    cloud.model.delta_M = 57.0;
    cloud.positions = {Vec3(0.0, 0.0, r)};
    const cplx h0 = hankel1(0, r), h2 = hankel1(2, r);
    const cplx dxx = -(kI * (2.0 / 3.0) * h0 - kI * h2 / 3.0);
    const cplx dzz = -(kI * (2.0 / 3.0) * h0 + kI * (2.0 / 3.0) * h2);
    Eigen::MatrixXcd exact(1, 1);
    exact(0, 0) = cplx(0.0, -0.5) - 3.0 / (16.0 * cloud.model.delta_M) * (2.0 * dxx * dxx + dzz * dzz);
    OracleCase oc;
    oc.scheme = "rb87-f0-f1";
    oc.kind = "two-body";
    oc.n_scatterers = 1;
    oc.rel_error = rel(fast_sigma(dip, cloud, Vec3::Zero(), false), exact);
    oc.pass = oc.rel_error < rep.tolerance;
    rep.cases.push_back(oc);
  }

  rep.pass = true;
  json cases = json::array();
  for (const auto& c : rep.cases) {
    rep.max_rel_error = std::max(rep.max_rel_error, c.rel_error);
    rep.pass = rep.pass && c.pass;
    cases.push_back({{"scheme", c.scheme}, {"kind", c.kind}, {"n_scatterers", c.n_scatterers},
                     {"rel_error", c.rel_error}, {"pass", c.pass}});
  }
  json side = sidecar_base(cfg, "oracle");
  side["tolerance"] = rep.tolerance;
  side["max_rel_error"] = rep.max_rel_error;
  side["pass"] = rep.pass;
  side["cases"] = cases;
  write_file(opt.out_dir / "oracle.json", side.dump(2) + "\n");
  say(opt, std::string("oracle: ") + (rep.pass ? "PASS" : "FAIL") + " max_rel_error=" + num(rep.max_rel_error) +
               " over " + std::to_string(rep.cases.size()) + " cases");
  return rep;
}

ConvergeReport cmd_converge(const ExperimentConfig& cfg, const RunOptions& opt) {
  if (cfg.converge.densities.size() < 2) throw ConfigError("converge: need at least two densities");
  ConvergeReport rep;
  rep.distances_nm = cfg.distances_nm;

  for (PlacementMode mode : cfg.converge.modes) {
    for (double density : cfg.converge.densities) {
      ExperimentConfig c = cfg;
      c.medium = calibrated_medium(density, cfg.medium.gamma_e, cfg.medium.target_eps);
      c.placement.mode = mode;
      if (mode == PlacementMode::Ordered) c.realizations = 1;
      say(opt, "converge: " + std::string(mode == PlacementMode::Ordered ? "ordered" : "disordered") + " density " +
                   num(density) + " delta_M " + num(c.medium.delta_M));
      const ScanResult r = scan(make_scan_request(c));
      ConvergeCurve curve{mode, density, c.medium.delta_M, {}, {}};
      for (const auto& p : r.points) {
        std::vector<double> g;
        for (const auto& sp : p.per_realization) g.push_back(trace_gamma(sp.eigenvalues));
        double mean = 0.0;
        for (double x : g) mean += x;
        mean /= static_cast<double>(g.size());
        double var = 0.0;
        for (double x : g) var += (x - mean) * (x - mean);
        curve.mean_gamma.push_back(mean);
        curve.stderr_gamma.push_back(g.size() > 1 ? std::sqrt(var / (g.size() - 1) / g.size()) : 0.0);
      }
      rep.curves.push_back(std::move(curve));
    }
  }

  for (std::size_t a = 0; a < rep.curves.size(); ++a)
    for (std::size_t b = a + 1; b < rep.curves.size(); ++b) {
      const bool same_mode = rep.curves[a].mode == rep.curves[b].mode;
      const bool same_density = rep.curves[a].density == rep.curves[b].density;
      if (!same_mode && !same_density) continue;
      double dev = 0.0;
      for (std::size_t i = 0; i < rep.distances_nm.size(); ++i) {
        if (rep.distances_nm[i] < cfg.converge.trusted_min_nm) continue;
        const double ga = rep.curves[a].mean_gamma[i], gb = rep.curves[b].mean_gamma[i];
        dev = std::max(dev, std::abs(ga - gb) / std::abs(gb));
      }
      rep.pairs.push_back({a, b, dev});
    }

  auto mode_name = [](PlacementMode m) { return m == PlacementMode::Ordered ? "ordered" : "disordered"; };
  std::string csv = provenance(cfg);
  csv += "mode,density,delta_M,distance_nm,gamma_over_gamma_inf,stderr_gamma\n";
  for (const auto& c : rep.curves)
    for (std::size_t i = 0; i < rep.distances_nm.size(); ++i)
      csv += std::string(mode_name(c.mode)) + "," + num(c.density) + "," + num(c.delta_M) + "," +
             num(rep.distances_nm[i]) + "," + num(c.mean_gamma[i]) + "," + num(c.stderr_gamma[i]) + "\n";
  write_file(opt.out_dir / "converge.csv", csv);

  std::string sum = provenance(cfg);
  sum += "mode_a,density_a,mode_b,density_b,max_rel_deviation\n";
  for (const auto& p : rep.pairs)
    sum += std::string(mode_name(rep.curves[p.a].mode)) + "," + num(rep.curves[p.a].density) + "," +
           mode_name(rep.curves[p.b].mode) + "," + num(rep.curves[p.b].density) + "," + num(p.max_rel_deviation) + "\n";
  write_file(opt.out_dir / "converge_summary.csv", sum);

  json side = sidecar_base(cfg, "converge");
  side["trusted_min_nm"] = cfg.converge.trusted_min_nm;
  write_file(opt.out_dir / "converge.json", side.dump(2) + "\n");
  return rep;
}

VdwProfile cmd_vdw(const ExperimentConfig& cfg, const RunOptions& opt) {
  VdwProfile prof;
  const ScanRequest req = make_scan_request(cfg);
  std::vector<Vec3> pos;
  for (std::size_t i = 0; i < req.distances.size(); ++i) {
    pos.push_back(atom_site(req.geometry, req.site, req.distances[i]));
    prof.distances_nm.push_back(cfg.distances_nm[i]);
  }
  prof.values = vdw_profile(vdw_spec(cfg, req.geometry), pos);
  write_file(opt.out_dir / "vdw.csv", vdw_csv(cfg, prof.distances_nm, prof.values));
  json side = sidecar_base(cfg, "vdw");
  side["dipole_sq_sum"] = ground_dipole_sq_sum(cfg.scheme);
  side["eps"] = cfg.medium.target_eps;
  write_file(opt.out_dir / "vdw.json", side.dump(2) + "\n");
  say(opt, "vdw: " + std::to_string(pos.size()) + " positions");
  return prof;
}

}  // namespace nanoqed
