#include "nanoqed/reference.hpp"

#include "nanoqed/greens.hpp"

namespace nanoqed::reference {

Eigen::MatrixXcd full_resolvent_self_energy(const TransitionScheme& scheme, const DipoleCloud& cloud,
                                            const Vec3& atom_position, bool include_medium_linewidth,
                                            Eigen::Index max_dimension) {
  const DipoleTable dip(scheme);
  const Eigen::Index ne = dip.n_excited();
  const Eigen::Index ng = dip.n_ground();
  const auto n = static_cast<Eigen::Index>(cloud.size());
  const Eigen::Index dim = ne + ng * 3 * n;
  if (dim > max_dimension) throw ConfigError("reference resolvent too large");

  const double f0_sq = cloud.model.f0_sq;
  const double f0 = std::sqrt(f0_sq);
  cplx diag(-cloud.model.delta_M, 0.0);
  if (include_medium_linewidth) diag += kI * (cloud.model.gamma_e / 2.0);

  std::vector<CMat3> atom_to(cloud.size());
  for (std::size_t a = 0; a < cloud.size(); ++a)
    atom_to[a] = green_tensor(cloud.positions[a], atom_position, 1.0).matrix;

  Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(dim, dim);
  M.topLeftCorner(ne, ne).diagonal().setConstant(cplx(0.0, 0.5));

  auto row = [&](Eigen::Index m, Eigen::Index a, int e) { return ne + (m * n + a) * 3 + e; };
  for (Eigen::Index m = 0; m < ng; ++m) {
    for (Eigen::Index a = 0; a < n; ++a) {
      for (Eigen::Index k = 0; k < ne; ++k) {
        const CVec3& v = dip.excited_to_ground(static_cast<int>(k), static_cast<int>(m));
        for (int e = 0; e < 3; ++e) {
          cplx up = 0.0, down = 0.0;
          for (int mu = 0; mu < 3; ++mu) {
            up += v(mu) * atom_to[a](mu, e);
            down += atom_to[a](e, mu) * std::conj(v(mu));
          }
          M(k, row(m, a, e)) = -f0 * up;
          M(row(m, a, e), k) = -f0 * down;
        }
      }
      for (Eigen::Index b = 0; b < n; ++b) {
        const CMat3 block = a == b ? CMat3(diag * CMat3::Identity())
                                   : CMat3(-f0_sq * green_tensor(cloud.positions[b], cloud.positions[a], 1.0).matrix);
        for (int e = 0; e < 3; ++e)
          for (int e2 = 0; e2 < 3; ++e2) M(row(m, a, e), row(m, b, e2)) = block(e, e2);
      }
    }
  }

  // Only the first n_e columns of M^{-1} are needed.
  const Eigen::MatrixXcd cols = M.partialPivLu().solve(Eigen::MatrixXcd::Identity(dim, ne));
  return -cols.topRows(ne).inverse();
}

}  // namespace nanoqed::reference
