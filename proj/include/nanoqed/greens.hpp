#pragma once

// Vacuum dyadic propagator of the electric field between two point dipoles.

#include "nanoqed/core.hpp"

namespace nanoqed {

/// Spherical Hankel function of the first kind, L in {0, 2}, x > 0.
cplx hankel1(int L, double x);

struct GreenTensor {
  CMat3 matrix;
  Vec3 separation;
  double wavenumber;
};

/// D_{mu nu}(R) = -k^3 { (2i/3) h0(kR) delta + (R R / R^2 - delta/3) i h2(kR) },
/// R = r_to - r_from. The interaction energy of two dipoles is d1 . D . d2.
/// Throws ConfigError for coincident points or k <= 0.
GreenTensor green_tensor(const Vec3& r_from, const Vec3& r_to, double k);

/// Unchecked hot-path variant for separation R (|R| > 0) at k = 1.
inline CMat3 green_matrix_unit_k(const Vec3& R) {
  const double r = R.norm();
  const double inv = 1.0 / r;
  const cplx e = std::exp(kI * r);
  const cplx h0 = -kI * e * inv;
  const cplx h2 = kI * e * inv * (1.0 + 3.0 * kI * inv - 3.0 * inv * inv);
  const cplx diag = -(kI * (2.0 / 3.0) * h0 - kI * h2 / 3.0);
  const cplx dyad = -kI * h2 * (inv * inv);
  CMat3 D = dyad * (R * R.transpose()).cast<cplx>();
  D.diagonal().array() += diag;
  return D;
}

}  // namespace nanoqed
