#pragma once

// Dense assembly kernels. Each parallel kernel has a serial twin that is kept
// as the reference implementation for tests and benchmarks; both compute every
// matrix element with identical arithmetic, so their outputs agree bit for bit.

#include <span>

#include "nanoqed/core.hpp"

namespace nanoqed::kernels {

/// A[(a,e),(b,e')] = diagonal * delta_ab delta_ee' - f0_sq * D_ee'(r_a - r_b) for a != b.
/// A must be 3N x 3N.
void fill_medium_block(std::span<const Vec3> positions, double f0_sq, cplx diagonal, Eigen::Ref<Eigen::MatrixXcd> A);
void fill_medium_block_serial(std::span<const Vec3> positions, double f0_sq, cplx diagonal,
                              Eigen::Ref<Eigen::MatrixXcd> A);

/// K[(a,e), 3p + nu] = f0 * D_{e nu}(atom_p - r_a). K must be 3N x 3P.
void fill_coupling_block(std::span<const Vec3> positions, double f0, std::span<const Vec3> atoms,
                         Eigen::Ref<Eigen::MatrixXcd> K);
void fill_coupling_block_serial(std::span<const Vec3> positions, double f0, std::span<const Vec3> atoms,
                                Eigen::Ref<Eigen::MatrixXcd> K);

}  // namespace nanoqed::kernels
