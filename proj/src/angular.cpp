#include "nanoqed/angular.hpp"

#include <cmath>
#include <numbers>

namespace nanoqed {

namespace {

constexpr int kMaxFactorial = 120;

const std::array<long double, kMaxFactorial + 1>& factorials() {
  static const auto table = [] {
    std::array<long double, kMaxFactorial + 1> t{};
    t[0] = 1.0L;
    for (int i = 1; i <= kMaxFactorial; ++i) t[i] = t[i - 1] * i;
    return t;
  }();
  return table;
}

long double fact(int n) { return factorials().at(static_cast<std::size_t>(n)); }

int twice(double x) { return static_cast<int>(std::lround(2.0 * x)); }

bool triangle(int tj1, int tj2, int tj3) {
  if (tj3 < std::abs(tj1 - tj2) || tj3 > tj1 + tj2) return false;
  return (tj1 + tj2 + tj3) % 2 == 0;
}

}  // namespace

bool is_half_integer(double x) { return std::abs(2.0 * x - std::round(2.0 * x)) < 1e-9; }

void TransitionScheme::validate() const {
  if (!is_half_integer(F_excited) || !is_half_integer(F_ground) || F_excited < 0 || F_ground < 0)
    throw ConfigError("angular momenta must be non-negative half-integers");
  if (std::abs(F_excited - F_ground) > 1.0 + 1e-9 || (F_excited == 0.0 && F_ground == 0.0))
    throw ConfigError("|F_excited - F_ground| must be <= 1 and not 0 -> 0");
  if (!is_half_integer(F_excited - F_ground) || twice(F_excited - F_ground) % 2 != 0)
    throw ConfigError("F_excited - F_ground must be an integer");
  if (!(lambda0_nm > 0.0)) throw ConfigError("lambda0 must be positive");
  if (!(gamma_inf_per_s > 0.0)) throw ConfigError("gamma_inf must be positive");
}

namespace schemes {

TransitionScheme rb87_f0_to_f1() { return {0.0, 1.0, 780.241, 3.8117e7, "Rb87-D2-F0-to-F1"}; }
TransitionScheme rb87_f3_to_f2() { return {3.0, 2.0, 780.241, 3.8117e7, "Rb87-D2-F3-to-F2"}; }
TransitionScheme cs133_f5_to_f4() { return {5.0, 4.0, 852.347, 3.2815e7, "Cs133-D2-F5-to-F4"}; }
TransitionScheme medium_v_atom(double lambda0_nm) { return {1.0, 0.0, lambda0_nm, 3.8117e7, "V-atom-J1-to-J0"}; }

TransitionScheme by_name(const std::string& name) {
  if (name == "rb87-f0-f1") return rb87_f0_to_f1();
  if (name == "rb87-f3-f2") return rb87_f3_to_f2();
  if (name == "cs133-f5-f4") return cs133_f5_to_f4();
  if (name == "v-atom") return medium_v_atom();
  throw ConfigError("unknown transition scheme '" + name + "'");
}

}  // namespace schemes

double wigner3j(double j1, double j2, double j3, double m1, double m2, double m3) {
  for (double v : {j1, j2, j3, m1, m2, m3})
    if (!is_half_integer(v)) throw ConfigError("wigner3j: arguments must be half-integers");
  if (j1 < 0 || j2 < 0 || j3 < 0) throw ConfigError("wigner3j: j must be non-negative");
  if (std::abs(m1) > j1 + 1e-9 || std::abs(m2) > j2 + 1e-9 || std::abs(m3) > j3 + 1e-9)
    throw ConfigError("wigner3j: |m| exceeds j");

  const int tj1 = twice(j1), tj2 = twice(j2), tj3 = twice(j3);
  const int tm1 = twice(m1), tm2 = twice(m2), tm3 = twice(m3);
  if (tm1 + tm2 + tm3 != 0) return 0.0;
  if (!triangle(tj1, tj2, tj3)) return 0.0;
  if ((tj1 + tm1) % 2 || (tj2 + tm2) % 2 || (tj3 + tm3) % 2) return 0.0;
  if ((tj1 + tj2 + tj3) / 2 + 1 > kMaxFactorial) throw ConfigError("wigner3j: j too large");

  // All quantities below are integers once halved.
  const int a = (tj1 + tj2 - tj3) / 2;
  const int b = (tj1 - tj2 + tj3) / 2;
  const int c = (-tj1 + tj2 + tj3) / 2;
  const int s = (tj1 + tj2 + tj3) / 2;

  const long double delta = fact(a) * fact(b) * fact(c) / fact(s + 1);
  const long double norm = fact((tj1 + tm1) / 2) * fact((tj1 - tm1) / 2) * fact((tj2 + tm2) / 2) *
                           fact((tj2 - tm2) / 2) * fact((tj3 + tm3) / 2) * fact((tj3 - tm3) / 2);

  const int t1 = (tj3 - tj2 + tm1) / 2;  // k + t1 >= 0
  const int t2 = (tj3 - tj1 - tm2) / 2;  // k + t2 >= 0
  const int t3 = a;                      // k <= t3
  const int t4 = (tj1 - tm1) / 2;        // k <= t4
  const int t5 = (tj2 + tm2) / 2;        // k <= t5
  const int kmin = std::max({0, -t1, -t2});
  const int kmax = std::min({t3, t4, t5});

  long double sum = 0.0L;
  for (int k = kmin; k <= kmax; ++k) {
    const long double term =
        1.0L / (fact(k) * fact(k + t1) * fact(k + t2) * fact(t3 - k) * fact(t4 - k) * fact(t5 - k));
    sum += (k % 2 == 0) ? term : -term;
  }

  const int phase = (tj1 - tj2 - tm3) / 2;
  const long double value = std::sqrt(delta * norm) * sum;
  return static_cast<double>((phase % 2 == 0) ? value : -value);
}

std::vector<DipoleElement> dipole_matrix(const TransitionScheme& scheme) {
  scheme.validate();
  const double Fe = scheme.F_excited;
  const double Fg = scheme.F_ground;
  const double reduced = std::sqrt(0.75 * (2.0 * Fe + 1.0));

  std::vector<DipoleElement> table;
  for (int i = 0; i < scheme.n_excited(); ++i) {
    const double me = -Fe + i;
    for (int q = -1; q <= 1; ++q) {
      const double mg = me - q;
      if (std::abs(mg) > Fg + 1e-9) continue;
      const double w = wigner3j(Fe, 1.0, Fg, -me, q, mg);
      if (w == 0.0) continue;
      const bool odd = static_cast<int>(std::lround(Fe - me)) % 2 != 0;
      table.push_back({me, mg, q, (odd ? -1.0 : 1.0) * w * reduced});
    }
  }
  return table;
}

namespace {

// Rows are e_q^* for q = -1, 0, +1.
Eigen::Matrix3cd spherical_basis_conj() {
  const double r = 1.0 / std::numbers::sqrt2;
  Eigen::Matrix3cd e;
  // e_{-1} = (x - iy)/sqrt2  ->  conj = (x + iy)/sqrt2
  e.row(0) << r, kI * r, 0.0;
  e.row(1) << 0.0, 0.0, 1.0;
  // e_{+1} = -(x + iy)/sqrt2 ->  conj = -(x - iy)/sqrt2
  e.row(2) << -r, kI * r, 0.0;
  return e;
}

}  // namespace

CVec3 spherical_to_cartesian(const CVec3& v) {
  static const Eigen::Matrix3cd e = spherical_basis_conj();
  return e.transpose() * v;
}

CVec3 cartesian_to_spherical(const CVec3& v) {
  // v_q = e_q . v, the rows of conj(e_q^*).
  static const Eigen::Matrix3cd e = spherical_basis_conj().conjugate();
  return e * v;
}

DipoleTable::DipoleTable(const TransitionScheme& scheme)
    : n_e_(scheme.n_excited()), n_g_(scheme.n_ground()),
      vectors_(static_cast<std::size_t>(n_e_ * n_g_), CVec3::Zero()) {
  for (const auto& el : dipole_matrix(scheme)) {
    const int n = static_cast<int>(std::lround(el.m_excited + scheme.F_excited));
    const int m = static_cast<int>(std::lround(el.m_ground + scheme.F_ground));
    CVec3 sph = CVec3::Zero();
    sph(el.q + 1) = el.value;
    vectors_[n * n_g_ + m] += spherical_to_cartesian(sph);
  }
}

double DipoleTable::ground_sum(int m) const {
  double s = 0.0;
  for (int n = 0; n < n_e_; ++n) s += excited_to_ground(n, m).squaredNorm();
  return s;
}

double DipoleTable::excited_sum(int n) const {
  double s = 0.0;
  for (int m = 0; m < n_g_; ++m) s += excited_to_ground(n, m).squaredNorm();
  return s;
}

Eigen::MatrixXcd angular_momentum_projection(double F, const Vec3& axis) {
  const int dim = static_cast<int>(2.0 * F + 1.5);
  Eigen::MatrixXcd Fz = Eigen::MatrixXcd::Zero(dim, dim);
  Eigen::MatrixXcd Fplus = Eigen::MatrixXcd::Zero(dim, dim);
  for (int i = 0; i < dim; ++i) {
    const double m = -F + i;
    Fz(i, i) = m;
    if (i + 1 < dim) Fplus(i + 1, i) = std::sqrt(F * (F + 1.0) - m * (m + 1.0));
  }
  const Eigen::MatrixXcd Fminus = Fplus.adjoint();
  const Eigen::MatrixXcd Fx = 0.5 * (Fplus + Fminus);
  const Eigen::MatrixXcd Fy = -0.5 * kI * (Fplus - Fminus);
  const Vec3 a = axis.normalized();
  return a.x() * Fx + a.y() * Fy + a.z() * Fz;
}

}  // namespace nanoqed
