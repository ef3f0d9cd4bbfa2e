#pragma once

// Subcommand drivers behind the command-line tool. Each writes its CSV/JSON
// files into the output directory and returns an in-memory report, so tests
// can drive them without a process boundary.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "nanoqed/config.hpp"
#include "nanoqed/vdw.hpp"

namespace nanoqed {

/// Oracle mismatch; maps to its own exit code.
class OracleFailure : public Error {
 public:
  using Error::Error;
};

struct RunOptions {
  std::filesystem::path out_dir = ".";
  bool strict = false;
  std::ostream* log = nullptr;  // progress messages; null for silence
};

struct FitReport {
  double delta_M = 0.0;
  double eps_at_resonance = 0.0;
  std::vector<double> omega;
  std::vector<cplx> eps;
};

FitReport cmd_fit(const ExperimentConfig& cfg, const RunOptions& opt);

struct PointFailure {
  double distance_nm;
  std::string reason;
};

struct ScanOutcome {
  double period_nm = 0.0;  // 0 when no period scan
  std::vector<double> distances_nm;  // the points that ran
  ScanResult result;
  std::vector<VdwResult> vdw;
  std::vector<PointFailure> failures;
  int gain_points = 0;  // points whose decay matrix had a negative eigenvalue
};

/// One outcome per comb period (a single one without a period scan). Files go
/// to out_dir, or out_dir/period_<nm> for a period scan.
std::vector<ScanOutcome> cmd_scan(const ExperimentConfig& cfg, const RunOptions& opt);

/// Spectrum CSV bytes: provenance comment, header, one row per (distance, cluster).
std::string spectrum_csv(const ExperimentConfig& cfg, const ScanOutcome& outcome);

struct OracleCase {
  std::string scheme;
  std::string kind;  // "random", "free-atom" or "two-body"
  int n_scatterers = 0;
  double rel_error = 0.0;
  bool pass = false;
};

struct OracleReport {
  std::vector<OracleCase> cases;
  double max_rel_error = 0.0;
  double tolerance = 1e-10;
  bool pass = false;
};

/// Fast path against the full-resolvent inverse and the two-body closed form.
OracleReport cmd_oracle(const ExperimentConfig& cfg, const RunOptions& opt);

struct ConvergeCurve {
  PlacementMode mode;
  double density;
  double delta_M;
  std::vector<double> mean_gamma;  // multiplicity-weighted over clusters
  std::vector<double> stderr_gamma;
};

struct ConvergePair {
  std::size_t a, b;  // indices into curves
  double max_rel_deviation;
};

struct ConvergeReport {
  std::vector<double> distances_nm;
  std::vector<ConvergeCurve> curves;
  std::vector<ConvergePair> pairs;
};

/// Needs at least two densities; each is calibrated to the configured eps.
ConvergeReport cmd_converge(const ExperimentConfig& cfg, const RunOptions& opt);

struct VdwProfile {
  std::vector<double> distances_nm;
  std::vector<VdwResult> values;
};

VdwProfile cmd_vdw(const ExperimentConfig& cfg, const RunOptions& opt);

}  // namespace nanoqed
