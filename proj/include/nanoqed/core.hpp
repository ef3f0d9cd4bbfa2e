#pragma once

// Shared vocabulary types and the error hierarchy.
//
// Internal unit system: hbar = c = 1 and the reference wavenumber k0 = 1, so
// lengths are measured in reduced wavelengths (lambda0 / 2pi) and every energy
// or rate is measured in units of the free-atom linewidth Gamma_inf.

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace nanoqed {

using cplx = std::complex<double>;
using Vec3 = Eigen::Vector3d;
using CVec3 = Eigen::Vector3cd;
using CMat3 = Eigen::Matrix3cd;

inline constexpr cplx kI{0.0, 1.0};

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid input: bad configuration, violated precondition, unknown preset.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure failed (singular solve, no causal root, ...).
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Converts between nanometres and reduced-wavelength units of one transition.
class LengthScale {
 public:
  explicit LengthScale(double lambda0_nm) : reduced_nm_(lambda0_nm / (2.0 * std::numbers::pi)) {
    if (!(lambda0_nm > 0.0)) throw ConfigError("wavelength must be positive");
  }

  double to_internal(double nm) const { return nm / reduced_nm_; }
  double to_nm(double internal) const { return internal * reduced_nm_; }
  Vec3 to_internal(const Vec3& nm) const { return nm / reduced_nm_; }
  Vec3 to_nm(const Vec3& internal) const { return internal * reduced_nm_; }
  double reduced_wavelength_nm() const { return reduced_nm_; }

 private:
  double reduced_nm_;
};

}  // namespace nanoqed
