#pragma once

// Experiment configuration: JSON in nanometres, resolved into internal units
// with every derived quantity (medium detuning, distance grid, defaults)
// written back so a run can be reproduced from its sidecar alone.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nanoqed/angular.hpp"
#include "nanoqed/geometry.hpp"
#include "nanoqed/medium.hpp"
#include "nanoqed/spectrum.hpp"

namespace nanoqed {

using json = nlohmann::json;

struct FitWindow {
  double from = -50.0;  // (omega - omega_0) / Gamma_inf
  double to = 50.0;
  int points = 201;
};

struct ConvergeSettings {
  std::vector<double> densities;
  std::vector<PlacementMode> modes{PlacementMode::Ordered};
  double trusted_min_nm = 0.0;  // resolved: 1.25 a for cylinders, 0 otherwise
};

struct OracleSettings {
  int instances = 30;
  int max_scatterers = 50;
  bool corrupt_sign = false;
};

struct ExperimentConfig {
  std::string preset;  // empty when built from a file only
  std::string output_dir;  // not part of the hash
  bool long_running = false;

  std::string scheme_name;
  TransitionScheme scheme;
  json geometry_nm;
  Geometry geometry;  // internal units

  std::string medium_preset;
  MediumModel medium;  // calibrated, internal units

  PlacementSpec placement;  // r_min in internal units
  std::uint64_t seed = 1;
  int realizations = 1;

  AtomSite site = AtomSite::Radial;
  std::vector<double> distances_nm;
  std::vector<double> periods_nm;  // comb period scan; empty = single period

  double cluster_tol = 1e-3;
  bool include_medium_linewidth = false;
  std::size_t memory_budget = kDefaultMemoryBudget;
  double min_clearance_nm = 0.0;

  bool vdw_enabled = false;
  double vdw_quad_tol = 1e-6;

  FitWindow fit;
  ConvergeSettings converge;
  OracleSettings oracle;

  LengthScale scale() const { return LengthScale(scheme.lambda0_nm); }

  /// Fully resolved configuration; round-trips through parse_config.
  json resolved() const;
  /// FNV-1a 64 of the resolved configuration's canonical dump.
  std::uint64_t hash() const;
};

/// Parses and resolves a configuration. Unknown keys are rejected.
ExperimentConfig parse_config(const json& j);

/// Raw preset document; ConfigError for unknown names.
json preset_config(const std::string& name);
std::vector<std::string> preset_names();

/// Preset (optional) with a user document merged on top.
json merge_config(const json& base, const json& overlay);

/// Distance sweep in internal units for the given comb period (0 keeps the
/// configured geometry).
ScanRequest make_scan_request(const ExperimentConfig& cfg, double period_nm = 0.0);

std::string hex64(std::uint64_t v);
std::string version_string();

}  // namespace nanoqed
