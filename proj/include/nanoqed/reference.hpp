#pragma once

// Brute-force self-energy from the full single-excitation resolvent. It builds
// the (n_e + 3 N n_g)-dimensional matrix explicitly and inverts it, so it is
// only practical for small clouds. It shares no assembly code with the
// production path and serves as its oracle.

#include "nanoqed/angular.hpp"
#include "nanoqed/medium.hpp"

namespace nanoqed::reference {

/// Sigma = -(top-left block of M^{-1})^{-1}. Dimension limit guards memory.
Eigen::MatrixXcd full_resolvent_self_energy(const TransitionScheme& scheme, const DipoleCloud& cloud,
                                            const Vec3& atom_position, bool include_medium_linewidth = false,
                                            Eigen::Index max_dimension = 4000);

}  // namespace nanoqed::reference
