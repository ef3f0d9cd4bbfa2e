#include <doctest.h>

#include <omp.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "nanoqed/runner.hpp"

using namespace nanoqed;
namespace fs = std::filesystem;

namespace {

json tiny_scan() {
  return {{"scheme", "rb87-f3-f2"},
          {"geometry", {{"type", "cylinder"}, {"radius_nm", 120.0}, {"length_nm", 500.0}}},
          {"medium", {{"density", 4.0}, {"preset", "silica"}}},
          {"placement", {{"mode", "disordered"}, {"seed", 5}, {"realizations", 3}}},
          {"sweep", {{"site", "radial"}, {"distances_nm", {160.0, 220.0, 400.0}}}}};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("nanoqed_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(NANOQED_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("every preset parses and survives a round trip") {
  for (const auto& name : preset_names()) {
    CAPTURE(name);
    const auto cfg = parse_config(preset_config(name));
    const auto again = parse_config(cfg.resolved());
    CHECK(again.hash() == cfg.hash());
    CHECK(again.resolved() == cfg.resolved());
    CHECK(cfg.medium.delta_M >= 20.0);
  }
  CHECK_THROWS_AS(preset_config("fig99"), ConfigError);
}

TEST_CASE("output directory does not enter the hash") {
  auto j = preset_config("fig2-desk");
  const auto a = parse_config(j).hash();
  j["output"] = {{"dir", "/somewhere/else"}};
  CHECK(parse_config(j).hash() == a);
  j["placement"]["seed"] = 2;
  CHECK(parse_config(j).hash() != a);
}

TEST_CASE("configuration is validated strictly") {
  auto j = tiny_scan();
  j["sweep"]["typo"] = 1;
  CHECK_THROWS_AS(parse_config(j), ConfigError);

  j = tiny_scan();
  j["medium"] = {{"density", 4.0}, {"preset", "silica"}, {"target_eps", 2.0}};
  CHECK_THROWS_AS(parse_config(j), ConfigError);
  j["medium"] = {{"density", 4.0}};
  CHECK_THROWS_AS(parse_config(j), ConfigError);
  j["medium"] = {{"density", 4.0}, {"target_eps", 1.0}};
  CHECK_THROWS_AS(parse_config(j), ConfigError);
  j["medium"] = {{"density", 4.0}, {"refractive_index", 1.45}};
  CHECK(parse_config(j).medium.target_eps == doctest::Approx(1.45 * 1.45));

  j = tiny_scan();
  j["scheme"] = "k39";
  CHECK_THROWS_AS(parse_config(j), ConfigError);
  j = tiny_scan();
  j["sweep"]["distances_nm"] = {400.0, 160.0};
  CHECK_THROWS_AS(parse_config(j), ConfigError);
}

TEST_CASE("calibrated detuning sits near the Lorentz-Lorenz estimate") {
  // The estimate ignores the radiative terms, which matter more at the small
  // detunings a high-index medium needs.
  for (const auto& [name, tol] : {std::pair{"fig2-desk", 0.02}, std::pair{"fig5-desk", 0.05}}) {
    const auto cfg = parse_config(preset_config(name));
    const double eps = cfg.medium.target_eps;
    const double seed = std::numbers::pi * cfg.medium.n0 * cfg.medium.gamma_e * (eps + 2) / (eps - 1);
    CHECK(std::abs(cfg.medium.delta_M - seed) < tol * seed);
    CHECK(permittivity(cfg.medium, 0.0).real() == doctest::Approx(eps).epsilon(1e-6));
  }
}

TEST_CASE("converge needs two densities") {
  auto j = tiny_scan();
  j["converge"] = {{"densities", {4.0}}};
  const auto cfg = parse_config(j);
  RunOptions opt;
  opt.out_dir = scratch("converge");
  CHECK_THROWS_AS(cmd_converge(cfg, opt), ConfigError);
}

TEST_CASE("scan refuses clouds beyond the memory budget") {
  auto j = preset_config("fig2-full");
  j["solver"]["memory_budget_mb"] = 16;
  RunOptions opt;
  opt.out_dir = scratch("budget");
  CHECK_THROWS_AS(cmd_scan(parse_config(j), opt), ConfigError);
}

TEST_CASE("spectrum files and their byte-level determinism") {
  const auto cfg = parse_config(tiny_scan());
  RunOptions opt;
  const int saved = omp_get_max_threads();
  const fs::path one = scratch("one");
  opt.out_dir = one;
  omp_set_num_threads(1);
  const auto a = cmd_scan(cfg, opt);
  opt.out_dir = scratch("many");
  omp_set_num_threads(3);
  const auto b = cmd_scan(cfg, opt);
  omp_set_num_threads(saved);

  const std::string csv = slurp(one / "spectrum.csv");
  CHECK(csv == slurp(opt.out_dir / "spectrum.csv"));
  CHECK(spectrum_csv(cfg, a[0]) == spectrum_csv(cfg, b[0]));
  CHECK(csv.rfind("# nanoqed ", 0) == 0);
  CHECK(csv.find("config_hash=" + hex64(cfg.hash())) != std::string::npos);
  CHECK(csv.find("\ndistance_nm,label,multiplicity,gamma_over_gamma_inf,delta_over_gamma_inf,stderr_gamma") !=
        std::string::npos);

  const auto sidecar = json::parse(slurp(opt.out_dir / "spectrum.json"));
  CHECK(parse_config(sidecar.at("config")).hash() == cfg.hash());
  CHECK(sidecar.at("realizations").size() == 3);
  CHECK(fs::exists(opt.out_dir / "spectrum_raw.csv"));
  REQUIRE(a.size() == 1);
  CHECK(a[0].distances_nm.size() == 3);
  CHECK(a[0].failures.empty());
}

TEST_CASE("fit writes the permittivity curve") {
  auto j = tiny_scan();
  j["fit"] = {{"from", -10.0}, {"to", 10.0}, {"points", 21}};
  const auto cfg = parse_config(j);
  RunOptions opt;
  opt.out_dir = scratch("fit");
  const auto rep = cmd_fit(cfg, opt);
  CHECK(rep.omega.size() == 21);
  CHECK(rep.eps_at_resonance == doctest::Approx(1.45 * 1.45).epsilon(1e-6));
  CHECK(fs::exists(opt.out_dir / "fit.csv"));
  CHECK(fs::exists(opt.out_dir / "fit.json"));
}

TEST_CASE("command-line exit codes") {
  const fs::path out = scratch("cli");
  CHECK(run_cli("oracle --instances 3 --out " + out.string()) == 0);
  CHECK(run_cli("oracle --instances 3 --corrupt-sign --out " + out.string()) == 3);
  CHECK(run_cli("scan --preset nonexistent --out " + out.string()) == 1);
  CHECK(run_cli("scan --bogus-flag") == 1);
  CHECK(run_cli("") == 1);
  CHECK(run_cli("--version") == 0);
}
