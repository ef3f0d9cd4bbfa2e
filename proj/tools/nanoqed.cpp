// Command-line front end: fit, scan, oracle, converge, vdw.

#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <omp.h>

#include "nanoqed/runner.hpp"

namespace {

using namespace nanoqed;

struct Common {
  std::string config_path;
  std::string preset;
  std::optional<std::uint64_t> seed;
  int threads = 0;
  std::string out;
  bool strict = false;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config_path, "JSON configuration file")->check(CLI::ExistingFile);
  app->add_option("--preset", c.preset, "named preset; a --config document is merged on top");
  app->add_option("--seed", c.seed, "master seed (overrides the configuration)");
  app->add_option("--threads", c.threads, "worker threads")->check(CLI::PositiveNumber);
  app->add_option("--out", c.out, "output directory");
  app->add_flag("--strict", c.strict, "treat skipped points and gain as failures");
}

ExperimentConfig load(const Common& c, const std::string& fallback_preset, const json& extra = json::object()) {
  json doc = json::object();
  const std::string preset = c.preset.empty() ? fallback_preset : c.preset;
  if (!preset.empty()) doc = preset_config(preset);
  if (!c.config_path.empty()) {
    std::ifstream f(c.config_path);
    json user;
    try {
      user = json::parse(f);
    } catch (const json::parse_error& e) {
      throw ConfigError(std::string("cannot parse ") + c.config_path + ": " + e.what());
    }
    doc = merge_config(doc, user);
  }
  if (preset.empty() && c.config_path.empty()) throw ConfigError("give --config or --preset");
  if (c.seed) doc["placement"]["seed"] = *c.seed;
  doc = merge_config(doc, extra);
  return parse_config(doc);
}

RunOptions options(const Common& c, const ExperimentConfig& cfg) {
  if (c.threads > 0) omp_set_num_threads(c.threads);
  RunOptions o;
  o.out_dir = !c.out.empty() ? c.out : (!cfg.output_dir.empty() ? cfg.output_dir : ".");
  o.strict = c.strict;
  o.log = &std::cerr;
  if (cfg.long_running) std::cerr << "note: preset '" << cfg.preset << "' is long-running at paper scale\n";
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Excitation spectrum of an atom near a dielectric nanostructure"};
  app.require_subcommand(1);
  app.set_version_flag("--version", version_string());

  Common fit_c, scan_c, oracle_c, conv_c, vdw_c;
  auto* fit = app.add_subcommand("fit", "calibrate the medium and scan its permittivity");
  add_common(fit, fit_c);
  auto* scan_cmd = app.add_subcommand("scan", "distance sweep of the excited-state spectrum");
  add_common(scan_cmd, scan_c);
  auto* oracle = app.add_subcommand("oracle", "check the fast solver against brute force");
  add_common(oracle, oracle_c);
  bool corrupt = false;
  int instances = 0;
  oracle->add_flag("--corrupt-sign", corrupt, "flip one coupling sign (negative control)");
  oracle->add_option("--instances", instances, "number of random instances")->check(CLI::PositiveNumber);
  auto* conv = app.add_subcommand("converge", "compare densities calibrated to the same permittivity");
  add_common(conv, conv_c);
  std::vector<double> densities;
  conv->add_option("--densities", densities, "scatterer densities")->delimiter(',');
  auto* vdw = app.add_subcommand("vdw", "static ground-state shift along the sweep");
  add_common(vdw, vdw_c);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*fit) {
      const auto cfg = load(fit_c, "");
      const auto rep = cmd_fit(cfg, options(fit_c, cfg));
      std::printf("delta_M = %.6f Gamma_inf (density %.4g, eps %.6g)\n", rep.delta_M, cfg.medium.n0,
                  rep.eps_at_resonance);
    } else if (*scan_cmd) {
      const auto cfg = load(scan_c, "");
      const auto outs = cmd_scan(cfg, options(scan_c, cfg));
      for (const auto& o : outs) {
        std::printf("scan: %zu points written", o.distances_nm.size());
        if (o.period_nm > 0) std::printf(" (period %.1f nm)", o.period_nm);
        if (!o.failures.empty()) std::printf(", %zu skipped", o.failures.size());
        if (o.gain_points) std::printf(", %d with gain", o.gain_points);
        std::printf("\n");
      }
    } else if (*oracle) {
      json extra = json::object();
      if (corrupt) extra["oracle"]["corrupt_sign"] = true;
      if (instances > 0) extra["oracle"]["instances"] = instances;
      const auto cfg = load(oracle_c, "fig2-desk", extra);
      const auto rep = cmd_oracle(cfg, options(oracle_c, cfg));
      for (const auto& c : rep.cases)
        std::printf("%-5s %-10s %-12s N=%-3d rel_error=%.3e\n", c.pass ? "PASS" : "FAIL", c.kind.c_str(),
                    c.scheme.c_str(), c.n_scatterers, c.rel_error);
      if (!rep.pass) throw OracleFailure("oracle mismatch, max relative error " + std::to_string(rep.max_rel_error));
    } else if (*conv) {
      json extra = json::object();
      if (!densities.empty()) extra["converge"]["densities"] = densities;
      const auto cfg = load(conv_c, "", extra);
      const auto rep = cmd_converge(cfg, options(conv_c, cfg));
      for (const auto& p : rep.pairs)
        std::printf("densities %g vs %g: max relative deviation %.4e\n", rep.curves[p.a].density,
                    rep.curves[p.b].density, p.max_rel_deviation);
    } else if (*vdw) {
      const auto cfg = load(vdw_c, "");
      const auto prof = cmd_vdw(cfg, options(vdw_c, cfg));
      std::printf("vdw: %zu positions written\n", prof.values.size());
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const OracleFailure& e) {
    std::cerr << "oracle failure: " << e.what() << '\n';
    return 3;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
