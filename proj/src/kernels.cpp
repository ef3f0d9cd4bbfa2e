#include "nanoqed/kernels.hpp"

#include "nanoqed/greens.hpp"

namespace nanoqed::kernels {

namespace {

inline void medium_row(std::span<const Vec3> pos, double f0_sq, cplx diagonal, Eigen::Ref<Eigen::MatrixXcd>& A,
                       Eigen::Index a) {
  A.block<3, 3>(3 * a, 3 * a) = diagonal * CMat3::Identity();
  for (Eigen::Index b = 0; b < a; ++b) {
    const CMat3 blk = -f0_sq * green_matrix_unit_k(pos[a] - pos[b]);
    A.block<3, 3>(3 * a, 3 * b) = blk;
    A.block<3, 3>(3 * b, 3 * a) = blk.transpose();
  }
}

inline void coupling_row(std::span<const Vec3> pos, double f0, std::span<const Vec3> atoms,
                         Eigen::Ref<Eigen::MatrixXcd>& K, Eigen::Index a) {
  for (std::size_t p = 0; p < atoms.size(); ++p)
    K.block<3, 3>(3 * a, 3 * static_cast<Eigen::Index>(p)) = f0 * green_matrix_unit_k(atoms[p] - pos[a]);
}

void check_shape(const Eigen::Ref<Eigen::MatrixXcd>& M, Eigen::Index rows, Eigen::Index cols) {
  if (M.rows() != rows || M.cols() != cols) throw ConfigError("kernel output has the wrong shape");
}

}  // namespace

void fill_medium_block(std::span<const Vec3> pos, double f0_sq, cplx diagonal, Eigen::Ref<Eigen::MatrixXcd> A) {
  const auto n = static_cast<Eigen::Index>(pos.size());
  check_shape(A, 3 * n, 3 * n);
#pragma omp parallel for schedule(dynamic, 8)
  for (Eigen::Index a = 0; a < n; ++a) medium_row(pos, f0_sq, diagonal, A, a);
}

void fill_medium_block_serial(std::span<const Vec3> pos, double f0_sq, cplx diagonal,
                              Eigen::Ref<Eigen::MatrixXcd> A) {
  const auto n = static_cast<Eigen::Index>(pos.size());
  check_shape(A, 3 * n, 3 * n);
  for (Eigen::Index a = 0; a < n; ++a) medium_row(pos, f0_sq, diagonal, A, a);
}

void fill_coupling_block(std::span<const Vec3> pos, double f0, std::span<const Vec3> atoms,
                         Eigen::Ref<Eigen::MatrixXcd> K) {
  const auto n = static_cast<Eigen::Index>(pos.size());
  check_shape(K, 3 * n, 3 * static_cast<Eigen::Index>(atoms.size()));
#pragma omp parallel for schedule(static)
  for (Eigen::Index a = 0; a < n; ++a) coupling_row(pos, f0, atoms, K, a);
}

void fill_coupling_block_serial(std::span<const Vec3> pos, double f0, std::span<const Vec3> atoms,
                                Eigen::Ref<Eigen::MatrixXcd> K) {
  const auto n = static_cast<Eigen::Index>(pos.size());
  check_shape(K, 3 * n, 3 * static_cast<Eigen::Index>(atoms.size()));
  for (Eigen::Index a = 0; a < n; ++a) coupling_row(pos, f0, atoms, K, a);
}

}  // namespace nanoqed::kernels
