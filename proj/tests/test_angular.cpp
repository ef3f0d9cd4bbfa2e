#include <doctest.h>

#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>

#include "nanoqed/angular.hpp"

using namespace nanoqed;
using boost::multiprecision::cpp_int;
using boost::multiprecision::cpp_rational;

namespace {

cpp_int factorial(int n) {
  cpp_int f = 1;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

// Exact 3j symbol as sign * sqrt(rational), arguments doubled.
double exact_3j(int tj1, int tj2, int tj3, int tm1, int tm2, int tm3) {
  if (tm1 + tm2 + tm3 != 0) return 0.0;
  if (tj3 < std::abs(tj1 - tj2) || tj3 > tj1 + tj2 || (tj1 + tj2 + tj3) % 2) return 0.0;
  if (std::abs(tm1) > tj1 || std::abs(tm2) > tj2 || std::abs(tm3) > tj3) return 0.0;
  auto h = [](int twice) { return twice / 2; };  // exact for the even sums below
  const cpp_rational tri(factorial(h(tj1 + tj2 - tj3)) * factorial(h(tj1 - tj2 + tj3)) * factorial(h(-tj1 + tj2 + tj3)),
                         factorial(h(tj1 + tj2 + tj3) + 1));
  const cpp_int pre = factorial(h(tj1 + tm1)) * factorial(h(tj1 - tm1)) * factorial(h(tj2 + tm2)) *
                      factorial(h(tj2 - tm2)) * factorial(h(tj3 + tm3)) * factorial(h(tj3 - tm3));
  cpp_rational sum = 0;
  for (int k = 0; k <= 100; ++k) {
    const int a = h(tj1 + tj2 - tj3) - k, b = h(tj1 - tm1) - k, c = h(tj2 + tm2) - k;
    const int d = h(tj3 - tj2 + tm1) + k, e = h(tj3 - tj1 - tm2) + k;
    if (a < 0 || b < 0 || c < 0) break;
    if (d < 0 || e < 0) continue;
    const cpp_rational term(1, factorial(k) * factorial(a) * factorial(b) * factorial(c) * factorial(d) * factorial(e));
    sum += (k % 2 ? -term : term);
  }
  const cpp_rational sq = tri * cpp_rational(pre) * sum * sum;
  const int phase = ((tj1 - tj2 - tm3) / 2) % 2 == 0 ? 1 : -1;
  const double mag = std::sqrt(static_cast<double>(sq));
  return phase * (sum < 0 ? -mag : mag);
}

const std::vector<TransitionScheme> kSchemes{schemes::rb87_f0_to_f1(), schemes::rb87_f3_to_f2(),
                                             schemes::cs133_f5_to_f4(), schemes::medium_v_atom()};

}  // namespace

TEST_CASE("3j symbols agree with exact rational arithmetic") {
  int checked = 0;
  for (int tj1 = 0; tj1 <= 10; ++tj1)
    for (int tj2 = 0; tj2 <= 4; ++tj2)
      for (int tj3 = std::abs(tj1 - tj2); tj3 <= tj1 + tj2; tj3 += 2)
        for (int tm1 = -tj1; tm1 <= tj1; tm1 += 2)
          for (int tm2 = -tj2; tm2 <= tj2; tm2 += 2) {
            const int tm3 = -tm1 - tm2;
            if (std::abs(tm3) > tj3) continue;
            const double got = wigner3j(tj1 / 2.0, tj2 / 2.0, tj3 / 2.0, tm1 / 2.0, tm2 / 2.0, tm3 / 2.0);
            const double want = exact_3j(tj1, tj2, tj3, tm1, tm2, tm3);
            CHECK(got == doctest::Approx(want).epsilon(1e-13));
            ++checked;
          }
  CHECK(checked > 1000);
}

TEST_CASE("3j tabulated values") {
  CHECK(wigner3j(1, 1, 0, 1, -1, 0) == doctest::Approx(1.0 / std::sqrt(3.0)));
  CHECK(wigner3j(0.5, 0.5, 1, 0.5, -0.5, 0) == doctest::Approx(1.0 / std::sqrt(6.0)));
  CHECK(wigner3j(1, 1, 1, 1, -1, 0) == doctest::Approx(1.0 / std::sqrt(6.0)));
  CHECK(wigner3j(2, 1, 1, 0, 0, 0) == doctest::Approx(std::sqrt(2.0 / 15.0)));
  CHECK(wigner3j(1, 1, 1, 0, 0, 0) == 0.0);         // odd sum of j with all m = 0
  CHECK(wigner3j(1, 1, 3, 0, 0, 0) == 0.0);         // triangle violated
  CHECK(wigner3j(1, 1, 1, 1, 1, 0) == 0.0);         // m sum nonzero
  CHECK_THROWS_AS(wigner3j(1, 1, 1, 2, -2, 0), ConfigError);
  CHECK_THROWS_AS(wigner3j(0.3, 1, 1, 0, 0, 0), ConfigError);
}

TEST_CASE("3j orthogonality") {
  const double j1 = 3, j2 = 1;
  for (double j3 = 2; j3 <= 4; ++j3)
    for (double j3p = 2; j3p <= 4; ++j3p)
      for (double m3 = -2; m3 <= 2; ++m3) {
        double s = 0;
        for (double m1 = -j1; m1 <= j1; ++m1)
          for (double m2 = -j2; m2 <= j2; ++m2)
            s += (2 * j3 + 1) * wigner3j(j1, j2, j3, m1, m2, m3) * wigner3j(j1, j2, j3p, m1, m2, m3);
        CHECK(s == doctest::Approx(j3 == j3p ? 1.0 : 0.0));
      }
}

TEST_CASE("scheme validation") {
  for (const auto& s : kSchemes) CHECK_NOTHROW(s.validate());
  TransitionScheme bad{2.0, 0.0};
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = {0.0, 0.0};
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = {1.5, 1.0};
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  CHECK_THROWS_AS(schemes::by_name("k39"), ConfigError);
  CHECK(schemes::cs133_f5_to_f4().n_excited() == 11);
  CHECK(schemes::cs133_f5_to_f4().n_ground() == 9);
}

TEST_CASE("dipole sum rules") {
  for (const auto& s : kSchemes) {
    CAPTURE(s.label);
    const DipoleTable t(s);
    for (int n = 0; n < t.n_excited(); ++n) CHECK(t.excited_sum(n) == doctest::Approx(0.75).epsilon(1e-14));
    const double ratio = (2 * s.F_excited + 1) / (2 * s.F_ground + 1);
    for (int m = 0; m < t.n_ground(); ++m) CHECK(t.ground_sum(m) == doctest::Approx(0.75 * ratio).epsilon(1e-14));

    // Excited sublevels stay orthogonal through the ground manifold, and the
    // full manifold radiates isotropically.
    CMat3 acc = CMat3::Zero();
    for (int n = 0; n < t.n_excited(); ++n)
      for (int np = 0; np < t.n_excited(); ++np) {
        cplx overlap = 0.0;
        for (int m = 0; m < t.n_ground(); ++m)
          overlap += t.excited_to_ground(n, m).dot(t.excited_to_ground(np, m));
        CHECK(std::abs(overlap - (n == np ? 0.75 : 0.0)) < 1e-14);
      }
    for (int n = 0; n < t.n_excited(); ++n)
      for (int m = 0; m < t.n_ground(); ++m)
        acc += t.excited_to_ground(n, m) * t.excited_to_ground(n, m).adjoint();
    CHECK((acc - 0.25 * t.n_excited() * CMat3::Identity()).norm() < 1e-13);
  }
}

TEST_CASE("dipole selection rules") {
  const auto elems = dipole_matrix(schemes::rb87_f3_to_f2());
  for (const auto& e : elems) {
    CHECK(std::abs(e.m_excited - e.m_ground - e.q) < 1e-12);
    CHECK(e.value != 0.0);
  }
  double total = 0;
  for (const auto& e : elems) total += e.value * e.value;
  CHECK(total == doctest::Approx(0.75 * 7));
}

TEST_CASE("spherical basis round trip") {
  const CVec3 v(cplx(0.3, -1.2), cplx(2.0, 0.5), cplx(-0.7, 0.1));
  CHECK((cartesian_to_spherical(spherical_to_cartesian(v)) - v).norm() < 1e-14);
  // q = 0 maps onto z.
  CHECK((spherical_to_cartesian(CVec3(0, 1, 0)) - CVec3(0, 0, 1)).norm() < 1e-15);
  // Norm preserved (unitary change of basis).
  CHECK(spherical_to_cartesian(v).norm() == doctest::Approx(v.norm()));
}

TEST_CASE("angular momentum projection") {
  for (double F : {1.0, 3.0, 5.0}) {
    const Vec3 axis = Vec3(0.3, -0.8, 0.5).normalized();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(angular_momentum_projection(F, axis));
    for (int i = 0; i < es.eigenvalues().size(); ++i) CHECK(es.eigenvalues()(i) == doctest::Approx(-F + i));
    const auto Fx = angular_momentum_projection(F, Vec3::UnitX());
    const auto Fy = angular_momentum_projection(F, Vec3::UnitY());
    const auto Fz = angular_momentum_projection(F, Vec3::UnitZ());
    CHECK(((Fx * Fy - Fy * Fx) - kI * Fz).norm() < 1e-12);
    const Eigen::MatrixXcd casimir = Fx * Fx + Fy * Fy + Fz * Fz;
    CHECK((casimir - F * (F + 1) * Eigen::MatrixXcd::Identity(casimir.rows(), casimir.cols())).norm() < 1e-12);
  }
}
