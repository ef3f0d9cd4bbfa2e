#pragma once

// Angular-momentum algebra for closed F -> F0 dipole transitions.

#include <array>
#include <string>
#include <vector>

#include "nanoqed/core.hpp"

namespace nanoqed {

/// A closed transition of the reference atom. Energies produced by the
/// library are expressed in units of gamma_inf.
struct TransitionScheme {
  double F_excited = 0.0;
  double F_ground = 0.0;
  double lambda0_nm = 780.241;
  double gamma_inf_per_s = 3.8117e7;
  std::string label;

  int n_excited() const { return static_cast<int>(2.0 * F_excited + 1.5); }
  int n_ground() const { return static_cast<int>(2.0 * F_ground + 1.5); }

  /// Throws ConfigError unless F values are half-integers linked by a dipole step.
  void validate() const;
};

namespace schemes {
TransitionScheme rb87_f0_to_f1();
TransitionScheme rb87_f3_to_f2();
TransitionScheme cs133_f5_to_f4();
/// J = 1 -> J = 0 scatterer of the artificial medium (lambda0 is the reference's).
TransitionScheme medium_v_atom(double lambda0_nm = 780.241);
/// Looks up a preset by name ("rb87-f0-f1", "rb87-f3-f2", "cs133-f5-f4", "v-atom").
TransitionScheme by_name(const std::string& name);
}  // namespace schemes

/// Nonzero <F_e m_e| d_q |F_g m_g> in units where sum over q, m_g of |d|^2 is 3/4.
struct DipoleElement {
  double m_excited;
  double m_ground;
  int q;
  double value;
};

bool is_half_integer(double x);

/// Wigner 3j symbol by the Racah sum. Returns 0 when selection rules fail;
/// throws ConfigError for inputs that are not half-integers or |m| > j.
double wigner3j(double j1, double j2, double j3, double m1, double m2, double m3);

std::vector<DipoleElement> dipole_matrix(const TransitionScheme& scheme);

/// Sum_q v_q e_q^*, with e_{+1} = -(x + iy)/sqrt2, e_0 = z, e_{-1} = (x - iy)/sqrt2.
/// Input order is (q = -1, 0, +1).
CVec3 spherical_to_cartesian(const CVec3& v_spherical);
CVec3 cartesian_to_spherical(const CVec3& v_cartesian);

/// Cartesian dipole vectors <n|d|m> for all excited n and ground m. Sublevels
/// are indexed from the lowest projection: index i <-> m = -F + i.
class DipoleTable {
 public:
  explicit DipoleTable(const TransitionScheme& scheme);

  int n_excited() const { return n_e_; }
  int n_ground() const { return n_g_; }
  const CVec3& excited_to_ground(int n, int m) const { return vectors_[n * n_g_ + m]; }

  /// Sum over excited n of |d_nm|^2 for ground sublevel m.
  double ground_sum(int m) const;
  /// Sum over ground m of |d_nm|^2 for excited sublevel n (3/4 for a closed line).
  double excited_sum(int n) const;

 private:
  int n_e_;
  int n_g_;
  std::vector<CVec3> vectors_;
};

/// Matrix of a . F in the |F, M_z> basis (M_z ascending).
Eigen::MatrixXcd angular_momentum_projection(double F, const Vec3& axis);

}  // namespace nanoqed
