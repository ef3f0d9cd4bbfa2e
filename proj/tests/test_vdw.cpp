#include <doctest.h>

#include <cmath>
#include <numbers>

#include "nanoqed/vdw.hpp"

using namespace nanoqed;

namespace {

constexpr double kPi = std::numbers::pi;

// Midpoint rule over a box, the crudest possible independent evaluation.
double grid_integral(const Box& b, const Vec3& o, int n) {
  const Vec3 h = (b.hi - b.lo) / n;
  double s = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const Vec3 p = b.lo + Vec3((i + 0.5) * h.x(), (j + 0.5) * h.y(), (k + 0.5) * h.z());
        s += std::pow((p - o).squaredNorm(), -3);
      }
  return s * h.prod();
}

VdwSpec spec_for(const Geometry& g, double eps = 2.1) {
  VdwSpec s;
  s.eps = eps;
  s.dipole_sq_sum = 0.75;
  s.geometry = g;
  s.quad_tol = 1e-6;
  return s;
}

}  // namespace

TEST_CASE("half-space integral is pi / (6 z^3)") {
  const Geometry half = Slab{INFINITY, INFINITY, INFINITY};
  for (double z : {0.05, 0.4, 2.0}) {
    const auto r = inverse_sixth_integral(half, Vec3(z, 0, 0), 1e-8);
    CHECK(r.value == doctest::Approx(kPi / (6 * z * z * z)).epsilon(1e-6));
  }
}

TEST_CASE("box integral against a brute-force grid") {
  const Box b{Vec3(-1.0, -0.6, -0.8), Vec3(0.0, 0.7, 0.5)};
  const Vec3 o(0.9, 0.1, -0.2);
  const double grid = grid_integral(b, o, 120);
  CHECK(inverse_sixth_integral(b, o, 1e-6).value == doctest::Approx(grid).epsilon(1e-3));
}

TEST_CASE("close to a dilute body the shift approaches the image potential") {
  // In the eps -> 1 limit both reduce to (eps - 1) S / (24 z^3).
  const double eps = 1.0 + 1e-5, z = 0.3;
  const auto shift = vdw_shift(spec_for(Slab{INFINITY, INFINITY, INFINITY}, eps), Vec3(z, 0, 0)).shift;
  const double image = image_potential_flat(eps, 0.75, z);
  CHECK(shift == doctest::Approx(image).epsilon(1e-4));
  CHECK(shift == doctest::Approx(-(eps - 1) * 0.75 / (24 * z * z * z)).epsilon(1e-4));
}

TEST_CASE("ratio to the image potential for a half-space") {
  for (double eps : {1.5, 2.1, 4.0, 11.0}) {
    const Geometry half = Slab{INFINITY, INFINITY, INFINITY};
    const double z = 0.7;
    const double ratio = image_potential_flat(eps, 0.75, z) / vdw_shift(spec_for(half, eps), Vec3(z, 0, 0)).shift;
    CHECK(ratio == doctest::Approx(2 * (eps + 2) / (3 * (eps + 1))).epsilon(1e-6));
  }
}

TEST_CASE("scaling, additivity and monotonicity") {
  // Doubling every length divides the integral by 8.
  const Box b{Vec3(-0.5, -1.0, -1.5), Vec3(0.0, 1.0, 1.5)};
  const Box b2{2 * b.lo, 2 * b.hi};
  const Vec3 o(0.6, 0.2, 0.1);
  const double i1 = inverse_sixth_integral(b, o, 1e-7).value;
  CHECK(inverse_sixth_integral(b2, 2 * o, 1e-7).value == doctest::Approx(i1 / 8).epsilon(1e-7));

  // Splitting the box along z gives two parts that add up.
  const Box lower{b.lo, Vec3(b.hi.x(), b.hi.y(), 0.3)};
  const Box upper{Vec3(b.lo.x(), b.lo.y(), 0.3), b.hi};
  const double parts = inverse_sixth_integral(lower, o, 1e-7).value + inverse_sixth_integral(upper, o, 1e-7).value;
  CHECK(parts == doctest::Approx(i1).epsilon(1e-5));

  // The shift is negative and weakens with distance.
  const Geometry cyl = Cylinder{1.0, 6.0};
  double last = -INFINITY;
  for (double x : {1.05, 1.2, 1.6, 2.5, 4.0}) {
    const double s = vdw_shift(spec_for(cyl), Vec3(x, 0, 0)).shift;
    CHECK(s < 0.0);
    CHECK(s > last);
    last = s;
  }
}

TEST_CASE("error estimate bounds the change between tolerances") {
  const Geometry comb = CombPCW{2.0, 1.5, 1.0, 1.0, 1.5, 14.0};
  const Vec3 o(0.4, 0.0, 1.0);
  const auto loose = inverse_sixth_integral(comb, o, 1e-4);
  const auto tight = inverse_sixth_integral(comb, o, 1e-7);
  CHECK(std::abs(loose.value - tight.value) <= loose.error_estimate + 1e-12 * tight.value);
  CHECK(loose.error_estimate >= 0.0);
}

TEST_CASE("positions on or inside the body are rejected") {
  const auto spec = spec_for(Cylinder{1.0, 4.0});
  CHECK_THROWS_AS(vdw_shift(spec, Vec3(0.5, 0, 0)), ConfigError);
  CHECK_THROWS_AS(vdw_shift(spec, Vec3(1.0, 0, 0)), ConfigError);
  auto bad = spec;
  bad.eps = 1.0;
  CHECK_THROWS_AS(vdw_shift(bad, Vec3(2, 0, 0)), ConfigError);
  CHECK_THROWS_AS(image_potential_flat(2.0, 0.75, 0.0), ConfigError);
}

TEST_CASE("parallel profile equals the serial one") {
  const auto spec = spec_for(Cylinder{1.0, 4.0});
  std::vector<Vec3> pos;
  for (int i = 0; i < 6; ++i) pos.emplace_back(1.1 + 0.5 * i, 0.0, 0.0);
  const auto a = vdw_profile(spec, pos);
  const auto b = vdw_profile_serial(spec, pos);
  for (std::size_t i = 0; i < pos.size(); ++i) {
    CHECK(a[i].shift == b[i].shift);
    CHECK(a[i].error_estimate == b[i].error_estimate);
  }
  pos.emplace_back(0.0, 0.0, 0.0);
  CHECK_THROWS_AS(vdw_profile(spec, pos), ConfigError);
}

TEST_CASE("ground-state dipole sums") {
  CHECK(ground_dipole_sq_sum(schemes::rb87_f0_to_f1()) == doctest::Approx(0.25));
  CHECK(ground_dipole_sq_sum(schemes::cs133_f5_to_f4()) == doctest::Approx(11.0 / 9.0 * 0.75));
  CHECK(ground_dipole_sq_sum(schemes::rb87_f3_to_f2()) == doctest::Approx(7.0 / 5.0 * 0.75));
}
