#pragma once

// Self-energy of the reference atom's excited manifold and its spectrum.
//
// The single-excitation resolvent couples the n_e excited sublevels of the atom
// to 3N medium excitations per ground sublevel m. The medium block does not
// depend on m, so eliminating it gives
//   Sigma_{nn'} = -i/2 delta_{nn'} + sum_m d_{nm} . T . d_{mn'},
//   T = K^T A0^{-1} K,
// where K (3N x 3) couples the atom to the scatterers. One factorization of A0
// serves every atom position and every ground sublevel.

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "nanoqed/angular.hpp"
#include "nanoqed/geometry.hpp"
#include "nanoqed/medium.hpp"

namespace nanoqed {

inline constexpr std::size_t kDefaultMemoryBudget = std::size_t{2} << 30;

/// Bytes of one dense medium block for N scatterers: 16 (3N)^2.
std::size_t medium_block_bytes(std::size_t n_scatterers);

struct MediumBlock {
  Eigen::MatrixXcd matrix;
  bool includes_linewidth = false;
};

/// A0 = -delta_M I - Sigma^(ab), optionally with +i Gamma_e / 2 on the diagonal.
/// Throws ConfigError if N == 0 or the block would exceed the memory budget.
MediumBlock assemble_medium_block(const DipoleCloud& cloud, bool include_medium_linewidth,
                                  std::size_t memory_budget = kDefaultMemoryBudget);

/// K for several atom positions side by side (3N x 3P).
Eigen::MatrixXcd assemble_coupling_block(const DipoleCloud& cloud, std::span<const Vec3> atoms);

/// LU factorization of A0, reused for every atom position.
class MediumResolvent {
 public:
  MediumResolvent(const DipoleCloud& cloud, bool include_medium_linewidth,
                  std::size_t memory_budget = kDefaultMemoryBudget);
  ~MediumResolvent();
  MediumResolvent(MediumResolvent&&) noexcept;
  MediumResolvent& operator=(MediumResolvent&&) noexcept;

  /// Response tensor T = K^T A0^{-1} K at each atom position.
  std::vector<CMat3> response(std::span<const Vec3> atoms) const;
  /// Reciprocal condition estimate of A0.
  double rcond() const { return rcond_; }
  std::size_t size() const { return positions_.size(); }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::vector<Vec3> positions_;
  double f0_ = 0.0;
  double rcond_ = 0.0;
};

struct SelfEnergyMatrix {
  Eigen::MatrixXcd sigma;
  Vec3 atom_position = Vec3::Zero();
  int realization_index = 0;
  double rcond = 1.0;
};

/// Sigma from the response tensor. `coupling_sign` = -1 corrupts one coupling
/// leg; it exists only as a negative control for the oracle check.
Eigen::MatrixXcd self_energy_from_response(const DipoleTable& dipoles, const CMat3& T, double coupling_sign = 1.0);

/// One-shot Schur-complement self-energy at a single atom position.
SelfEnergyMatrix self_energy(const TransitionScheme& scheme, const DipoleCloud& cloud, const Vec3& atom_position,
                             bool include_medium_linewidth = false,
                             std::size_t memory_budget = kDefaultMemoryBudget);

/// Smallest eigenvalue of the decay matrix i (Sigma - Sigma^dagger); negative
/// values indicate gain.
double min_decay_eigenvalue(const Eigen::MatrixXcd& sigma);

struct Cluster {
  double delta = 0.0;
  double gamma = 0.0;
  int multiplicity = 0;
  double width = 0.0;
  std::optional<int> label;
  bool low_confidence = false;
  std::vector<int> members;
};

struct SpectrumPoint {
  double distance = 0.0;
  Eigen::VectorXcd eigenvalues;
  Eigen::MatrixXcd eigenvectors;  // columns; not orthogonalized
  std::vector<Cluster> clusters;  // by gamma, descending
  std::vector<int> eigen_labels;  // |M| of each eigenvector, -1 if unlabelled
};

/// Greedy grouping: eigenvalues are visited by decreasing decay rate and each
/// seeds a group of all unassigned eigenvalues within `tol` of it.
std::vector<std::vector<int>> cluster_eigenvalues(std::span<const cplx> values, double tol);

/// General (non-Hermitian) eigendecomposition with Delta = Re, Gamma = -2 Im.
SpectrumPoint diagonalize(const SelfEnergyMatrix& sigma, double cluster_tol = 1e-3);

/// Labels each eigenvector and cluster by the dominant |M| about `axis`.
/// A cluster spanning the whole manifold (free atom) stays unlabelled.
void assign_symmetry_labels(SpectrumPoint& point, double F_excited, const Vec3& axis);

struct ScanRequest {
  TransitionScheme scheme;
  Geometry geometry;  // internal units
  MediumModel model;
  PlacementSpec placement;
  std::uint64_t seed = 1;
  int realizations = 1;
  AtomSite site = AtomSite::Radial;
  std::vector<double> distances;  // internal units, ascending
  double cluster_tol = 1e-3;
  bool include_medium_linewidth = false;
  std::size_t memory_budget = kDefaultMemoryBudget;
  double min_clearance = 0.0;  // internal units
  /// Skip the medium entirely (free-atom reference).
  bool empty_medium = false;
};

struct AveragedCluster {
  std::optional<int> label;
  int multiplicity = 0;
  double gamma = 0.0;
  double delta = 0.0;
  double stderr_gamma = 0.0;
  double stderr_delta = 0.0;
  int n_realizations = 0;
};

struct ScanPoint {
  double distance = 0.0;
  Vec3 atom = Vec3::Zero();
  std::vector<AveragedCluster> clusters;
  bool label_fallback = false;
  double min_decay_eigenvalue = 0.0;
  std::vector<SpectrumPoint> per_realization;
};

struct RealizationInfo {
  std::size_t n_scatterers = 0;
  double rcond = 1.0;
  double seconds = 0.0;
};

struct ScanResult {
  std::vector<ScanPoint> points;
  std::vector<RealizationInfo> realizations;
};

/// Distance sweep: one factorization per realization, eigenvalues averaged
/// across realizations by (label, rank within label). Realizations run in
/// parallel; the result does not depend on the thread count.
ScanResult scan(const ScanRequest& request);

}  // namespace nanoqed
