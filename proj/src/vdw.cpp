#include "nanoqed/vdw.hpp"

#include <cmath>
#include <exception>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace nanoqed {

namespace {

using boost::math::quadrature::gauss_kronrod;
constexpr unsigned kMaxDepth = 18;

// Radial integral of t^2 * t^-6 over the body along one direction.
double radial(const Geometry& g, const Vec3& o, const Vec3& dir) {
  double sum = 0.0;
  for (const auto& [t_in, t_out] : ray_segments(g, o, dir)) {
    const double a = 1.0 / (t_in * t_in * t_in);
    const double b = std::isinf(t_out) ? 0.0 : 1.0 / (t_out * t_out * t_out);
    sum += (a - b) / 3.0;
  }
  return sum;
}

}  // namespace

void VdwSpec::validate() const {
  if (!(eps > 1.0)) throw ConfigError("vdw: eps must exceed 1");
  if (!(dipole_sq_sum > 0.0)) throw ConfigError("vdw: dipole sum must be positive");
  if (!(quad_tol > 0.0 && quad_tol < 1.0)) throw ConfigError("vdw: quad_tol must be in (0, 1)");
  nanoqed::validate(geometry);
}

InverseSixthIntegral inverse_sixth_integral(const Geometry& g, const Vec3& o, double rel_tol) {
  if (!(clearance(g, o) > 0.0)) throw ConfigError("vdw: position is inside or on the dielectric surface");
  // Polar axis along x, the outward normal at every supported atom site. The
  // pole then sits on the nearest surface patch, where the integrand peaks.
  double inner_error_sum = 0.0;
  std::size_t inner_calls = 0;
  auto over_phi = [&](double u) {
    const double s = std::sqrt(std::max(0.0, 1.0 - u * u));
    auto f = [&](double phi) { return radial(g, o, Vec3(u, s * std::cos(phi), s * std::sin(phi))); };
    double total = 0.0;
    constexpr double q = std::numbers::pi / 2;
    for (int k = 0; k < 4; ++k) {
      double err = 0.0;
      total += gauss_kronrod<double, 15>::integrate(f, k * q, (k + 1) * q, kMaxDepth, rel_tol * 0.1, &err);
      inner_error_sum += err;
    }
    ++inner_calls;
    return total;
  };
  InverseSixthIntegral out;
  for (const auto& [a, b] : {std::pair{-1.0, 0.0}, std::pair{0.0, 1.0}}) {
    double err = 0.0;
    out.value += gauss_kronrod<double, 15>::integrate(over_phi, a, b, kMaxDepth, rel_tol, &err);
    out.error_estimate += err;
  }
  // Inner errors enter through an outer integral over an interval of length 2;
  // their mean over the outer nodes stands in for that integral.
  if (inner_calls > 0) out.error_estimate += 2.0 * inner_error_sum / static_cast<double>(inner_calls);
  return out;
}

VdwResult vdw_shift(const VdwSpec& spec, const Vec3& position) {
  spec.validate();
  const auto integral = inverse_sixth_integral(spec.geometry, position, spec.quad_tol);
  const double prefactor = -(3.0 / (4.0 * std::numbers::pi)) * (spec.eps - 1.0) / (spec.eps + 2.0) * spec.dipole_sq_sum;
  return {prefactor * integral.value, std::abs(prefactor) * integral.error_estimate};
}

double image_potential_flat(double eps, double dipole_sq_sum, double z) {
  if (!(z > 0.0)) throw ConfigError("image potential: z must be positive");
  return -(eps - 1.0) / (eps + 1.0) * dipole_sq_sum / (12.0 * z * z * z);
}

double ground_dipole_sq_sum(const TransitionScheme& scheme) {
  const DipoleTable table(scheme);
  const double s = table.ground_sum(0);
  for (int m = 1; m < table.n_ground(); ++m)
    if (std::abs(table.ground_sum(m) - s) > 1e-12) throw NumericalError("ground dipole sum depends on m");
  return s;
}

std::vector<VdwResult> vdw_profile(const VdwSpec& spec, const std::vector<Vec3>& positions) {
  spec.validate();
  std::vector<VdwResult> out(positions.size());
  std::vector<std::exception_ptr> errors(positions.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::size_t i = 0; i < positions.size(); ++i) {
    try {
      out[i] = vdw_shift(spec, positions[i]);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

std::vector<VdwResult> vdw_profile_serial(const VdwSpec& spec, const std::vector<Vec3>& positions) {
  std::vector<VdwResult> out;
  out.reserve(positions.size());
  for (const auto& p : positions) out.push_back(vdw_shift(spec, p));
  return out;
}

}  // namespace nanoqed
