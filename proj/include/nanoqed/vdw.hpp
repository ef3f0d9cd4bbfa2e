#pragma once

// Static ground-state shift of the reference atom near a dielectric body,
//   Delta(r) = -(3 / 4 pi) (eps - 1)/(eps + 2) S  int_V d^3r' |r - r'|^-6,
// with S = sum_n |d_nm|^2. It is an upper-bound estimate, not a microscopic
// result. The volume integral is done around the atom: along each direction
// the radial part is exact, so only a smooth-ish 2D angular integral remains.

#include <vector>

#include "nanoqed/angular.hpp"
#include "nanoqed/geometry.hpp"

namespace nanoqed {

struct VdwSpec {
  double eps = 0.0;
  double dipole_sq_sum = 0.0;
  Geometry geometry;
  double quad_tol = 1e-8;

  void validate() const;
};

struct VdwResult {
  double shift = 0.0;
  double error_estimate = 0.0;
};

struct InverseSixthIntegral {
  double value = 0.0;
  double error_estimate = 0.0;
};

/// int_V |r - r'|^-6 d^3r' for a point strictly outside the body.
InverseSixthIntegral inverse_sixth_integral(const Geometry& g, const Vec3& position, double rel_tol);

/// Throws ConfigError if the position is inside or on the surface.
VdwResult vdw_shift(const VdwSpec& spec, const Vec3& position);

/// Image-charge attraction of a flat surface at distance z.
double image_potential_flat(double eps, double dipole_sq_sum, double z);

/// sum_n |d_nm|^2 for the ground manifold, checked to be m independent.
double ground_dipole_sq_sum(const TransitionScheme& scheme);

/// Shift at several positions. The serial variant is the reference.
std::vector<VdwResult> vdw_profile(const VdwSpec& spec, const std::vector<Vec3>& positions);
std::vector<VdwResult> vdw_profile_serial(const VdwSpec& spec, const std::vector<Vec3>& positions);

}  // namespace nanoqed
