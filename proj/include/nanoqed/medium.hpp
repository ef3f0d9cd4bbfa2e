#pragma once

// Artificial dielectric built from V-type point scatterers: self-consistent
// permittivity, calibration of the detuning, and scatterer placement.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "nanoqed/core.hpp"
#include "nanoqed/geometry.hpp"

namespace nanoqed {

/// Medium parameters. Density is per cubic reduced wavelength; delta_M and
/// gamma_e in units of Gamma_inf; f0_sq in internal units (Gamma_e = 4/3 f0^2).
struct MediumModel {
  double n0 = 0.0;
  double delta_M = 0.0;
  double f0_sq = 0.75;
  double gamma_e = 1.0;
  double target_eps = 0.0;

  /// Requires n0 > 0, gamma_e > 0 and delta_M >= 20 gamma_e.
  void validate() const;
};

/// Gamma_e = (4/3) f0^2 (omega_M / omega_0)^3.
double gamma_e_from_dipole(double f0_sq, double omega_ratio = 1.0);

/// Coefficients (s^0 .. s^3) of the cubic in s = sqrt(eps) for the frequency
/// offset omega (from omega_0, units of Gamma_inf).
std::array<cplx, 4> permittivity_cubic(const MediumModel& m, double omega);

/// All three roots s of the cubic.
std::array<cplx, 3> permittivity_roots(const MediumModel& m, double omega);

/// eps(omega) on the causal branch, reached by continuation from a far-detuned
/// anchor where eps ~ 1. Throws NumericalError if no admissible root exists.
cplx permittivity(const MediumModel& m, double omega);

/// eps along a frequency scan, continuing the branch point to point.
std::vector<cplx> permittivity_scan(const MediumModel& m, std::span<const double> omegas);

/// delta_M such that Re eps(omega_0) = target_eps within 1e-6 relative.
double fit_detuning(double n0, double gamma_e, double target_eps);

/// Calibrated model with f0^2 chosen so the medium linewidth equals gamma_e.
MediumModel calibrated_medium(double n0, double gamma_e, double target_eps);

enum class PlacementMode { Ordered, Disordered };

struct PlacementSpec {
  PlacementMode mode = PlacementMode::Ordered;
  double r_min = 0.1;  // exclusion radius for disordered clouds, internal units
  int max_attempts_per_scatterer = 2000;
};

struct DipoleCloud {
  std::vector<Vec3> positions;
  MediumModel model;
  PlacementMode placement = PlacementMode::Ordered;
  std::uint64_t seed = 0;
  int realization_index = 0;

  std::size_t size() const { return positions.size(); }
};

/// Seed of one realization's private RNG stream.
std::uint64_t realization_seed(std::uint64_t master_seed, int realization_index);

/// Ordered: cubic lattice of spacing n0^(-1/3) through the origin, clipped to the
/// body. Disordered: round(n0 V) uniform points with hard-core exclusion r_min.
/// Deterministic in (geometry, model, placement, seed, realization_index).
DipoleCloud generate_cloud(const Geometry& geom, const MediumModel& model, const PlacementSpec& placement,
                           std::uint64_t seed, int realization_index = 0);

}  // namespace nanoqed
