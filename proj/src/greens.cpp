#include "nanoqed/greens.hpp"

#include <cmath>
#include <string>

namespace nanoqed {

cplx hankel1(int L, double x) {
  if (!(x > 0.0)) throw ConfigError("hankel1: argument must be positive, got " + std::to_string(x));
  const cplx e = std::exp(kI * x);
  switch (L) {
    case 0:
      return -kI * e / x;
    case 2:
      return (kI / x) * e * (1.0 + 3.0 * kI / x - 3.0 / (x * x));
    default:
      throw ConfigError("hankel1: only L = 0 and L = 2 are supported");
  }
}

GreenTensor green_tensor(const Vec3& r_from, const Vec3& r_to, double k) {
  if (!(k > 0.0)) throw ConfigError("green_tensor: wavenumber must be positive");
  const Vec3 R = r_to - r_from;
  const double r = R.norm();
  if (!(r > 0.0))
    throw ConfigError("green_tensor: coincident points; self-action is handled by the free decay term");
  const double x = k * r;
  const cplx h0 = hankel1(0, x);
  const cplx h2 = hankel1(2, x);
  const double k3 = k * k * k;

  CMat3 D = (-k3 * kI * h2 / (r * r)) * (R * R.transpose()).cast<cplx>();
  D.diagonal().array() += -k3 * (kI * (2.0 / 3.0) * h0 - kI * h2 / 3.0);
  return {D, R, k};
}

}  // namespace nanoqed
