#include "nanoqed/medium.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <unordered_map>

#include <boost/math/tools/toms748_solve.hpp>

namespace nanoqed {

namespace {

constexpr double kPi = std::numbers::pi;

// Passive index: s in the closed first quadrant. Inside the band where eps is
// negative the physical root is purely imaginary (an evanescent medium).
bool admissible(cplx s) {
  const double tol = 1e-10 * std::abs(s);
  return s != 0.0 && s.real() >= -tol && s.imag() >= -tol;
}

std::string describe_roots(const std::array<cplx, 3>& roots) {
  std::ostringstream os;
  os.precision(10);
  for (const auto& s : roots) os << " s=" << s << " (eps=" << s * s << ")";
  return os.str();
}

cplx polish(const std::array<cplx, 4>& c, cplx s) {
  for (int it = 0; it < 3; ++it) {
    const cplx p = ((c[3] * s + c[2]) * s + c[1]) * s + c[0];
    const cplx dp = (3.0 * c[3] * s + 2.0 * c[2]) * s + c[1];
    if (std::abs(dp) == 0.0) break;
    s -= p / dp;
  }
  return s;
}

// Root of the cubic at omega nearest to `previous`.
cplx track(const MediumModel& m, double omega, cplx previous) {
  const auto roots = permittivity_roots(m, omega);
  return *std::min_element(roots.begin(), roots.end(),
                           [&](cplx a, cplx b) { return std::abs(a - previous) < std::abs(b - previous); });
}

cplx select_admissible(const MediumModel& m, double omega, cplx tracked) {
  if (admissible(tracked)) return tracked;
  const auto roots = permittivity_roots(m, omega);
  cplx best{};
  double best_d = std::numeric_limits<double>::infinity();
  for (const auto& s : roots) {
    if (admissible(s) && std::abs(s - tracked) < best_d) {
      best = s;
      best_d = std::abs(s - tracked);
    }
  }
  if (!std::isfinite(best_d)) {
    std::ostringstream os;
    os << "permittivity: no causal root at omega=" << omega << ":" << describe_roots(roots);
    throw NumericalError(os.str());
  }
  return best;
}

double coupling_strength(const MediumModel& m) { return 4.0 * kPi / 3.0 * m.n0 * m.f0_sq; }

// Continue the branch from s_from at omega_from to omega_to in steps that are
// small compared with the local distance to the medium resonance.
cplx continue_branch(const MediumModel& m, double omega_from, cplx s_from, double omega_to) {
  const double g = m.gamma_e / 2.0;
  double w = omega_from;
  cplx s = s_from;
  int guard = 0;
  while (w != omega_to && guard++ < 100000) {
    const double local = std::abs(w - m.delta_M) + g;
    const double step = std::min(std::abs(omega_to - w), 0.05 * local);
    w = (omega_to > w) ? std::min(w + step, omega_to) : std::max(w - step, omega_to);
    s = track(m, w, s);
  }
  return s;
}

}  // namespace

void MediumModel::validate() const {
  if (!(n0 > 0.0)) throw ConfigError("medium density must be positive");
  if (!(gamma_e > 0.0)) throw ConfigError("medium linewidth must be positive");
  if (!(f0_sq > 0.0)) throw ConfigError("medium dipole must be positive");
  if (!(delta_M >= 20.0 * gamma_e))
    throw ConfigError("medium detuning " + std::to_string(delta_M) + " violates delta_M >= 20 gamma_e");
}

double gamma_e_from_dipole(double f0_sq, double omega_ratio) {
  if (!(f0_sq > 0.0) || !(omega_ratio > 0.0)) throw ConfigError("gamma_e_from_dipole: inputs must be positive");
  return 4.0 / 3.0 * f0_sq * omega_ratio * omega_ratio * omega_ratio;
}

std::array<cplx, 4> permittivity_cubic(const MediumModel& m, double omega) {
  // eps (x + beta) = x - 2 beta with x = Delta + i s g, eps = s^2.
  const double delta = omega - m.delta_M;
  const double beta = coupling_strength(m);
  const double g = m.gamma_e / 2.0;
  return {cplx(-(delta - 2.0 * beta), 0.0), cplx(0.0, -g), cplx(delta + beta, 0.0), cplx(0.0, g)};
}

std::array<cplx, 3> permittivity_roots(const MediumModel& m, double omega) {
  const auto c = permittivity_cubic(m, omega);
  if (std::abs(c[3]) == 0.0) throw NumericalError("permittivity: cubic degenerates for zero linewidth");
  Eigen::Matrix3cd companion = Eigen::Matrix3cd::Zero();
  companion(0, 0) = -c[2] / c[3];
  companion(0, 1) = -c[1] / c[3];
  companion(0, 2) = -c[0] / c[3];
  companion(1, 0) = 1.0;
  companion(2, 1) = 1.0;
  Eigen::ComplexEigenSolver<Eigen::Matrix3cd> es(companion, false);
  if (es.info() != Eigen::Success) throw NumericalError("permittivity: cubic root solver failed");
  std::array<cplx, 3> roots{};
  for (int i = 0; i < 3; ++i) roots[i] = polish(c, es.eigenvalues()(i));
  return roots;
}

cplx permittivity(const MediumModel& m, double omega) {
  const double delta = omega - m.delta_M;
  const double side = (delta > 0.0) ? 1.0 : -1.0;
  const double anchor = 1e6 * (coupling_strength(m) + m.gamma_e + std::abs(delta) + 1.0);
  const double w0 = m.delta_M + side * anchor;
  const cplx s0 = track(m, w0, cplx(1.0, 0.0));
  // Geometric approach to the target keeps the step relative to |Delta|.
  double offset = anchor;
  cplx s = s0;
  const double floor_offset = 1e-3 * (std::abs(delta) + m.gamma_e);
  while (offset > floor_offset + std::abs(delta)) {
    offset = std::max(offset * 0.85, std::abs(delta));
    s = track(m, m.delta_M + side * offset, s);
    if (offset == std::abs(delta)) break;
  }
  s = continue_branch(m, m.delta_M + side * offset, s, omega);
  s = select_admissible(m, omega, s);
  return s * s;
}

std::vector<cplx> permittivity_scan(const MediumModel& m, std::span<const double> omegas) {
  std::vector<cplx> out;
  out.reserve(omegas.size());
  if (omegas.empty()) return out;
  cplx eps = permittivity(m, omegas[0]);
  cplx s = std::sqrt(eps);
  out.push_back(eps);
  for (std::size_t i = 1; i < omegas.size(); ++i) {
    s = continue_branch(m, omegas[i - 1], s, omegas[i]);
    s = select_admissible(m, omegas[i], s);
    out.push_back(s * s);
  }
  return out;
}

double fit_detuning(double n0, double gamma_e, double target_eps) {
  if (!(target_eps > 1.0)) throw ConfigError("fit_detuning: target permittivity must exceed 1");
  if (!(n0 > 0.0) || !(gamma_e > 0.0)) throw ConfigError("fit_detuning: density and linewidth must be positive");

  MediumModel m;
  m.n0 = n0;
  m.gamma_e = gamma_e;
  m.f0_sq = 0.75 * gamma_e;
  const double beta = coupling_strength(m);
  const double seed = beta * (target_eps + 2.0) / (target_eps - 1.0);

  auto residual = [&](double delta) {
    m.delta_M = delta;
    return permittivity(m, 0.0).real() - target_eps;
  };

  double lo = beta + 0.5 * (seed - beta);
  double hi = 2.0 * seed;
  double flo = residual(lo);
  double fhi = residual(hi);
  for (int i = 0; i < 60 && flo <= 0.0; ++i) {
    lo = beta + 0.5 * (lo - beta);
    flo = residual(lo);
  }
  for (int i = 0; i < 60 && fhi >= 0.0; ++i) {
    hi *= 2.0;
    fhi = residual(hi);
  }
  if (flo <= 0.0 || fhi >= 0.0) throw NumericalError("fit_detuning: could not bracket the detuning");

  std::uintmax_t iters = 200;
  const auto [a, b] =
      boost::math::tools::toms748_solve(residual, lo, hi, flo, fhi, boost::math::tools::eps_tolerance<double>(50), iters);
  const double delta = 0.5 * (a + b);
  m.delta_M = delta;
  const double achieved = permittivity(m, 0.0).real();
  if (std::abs(achieved - target_eps) > 1e-6 * target_eps)
    throw NumericalError("fit_detuning: refinement did not converge");
  return delta;
}

MediumModel calibrated_medium(double n0, double gamma_e, double target_eps) {
  MediumModel m;
  m.n0 = n0;
  m.gamma_e = gamma_e;
  m.f0_sq = 0.75 * gamma_e;
  m.target_eps = target_eps;
  m.delta_M = fit_detuning(n0, gamma_e, target_eps);
  m.validate();
  return m;
}

std::uint64_t realization_seed(std::uint64_t master_seed, int realization_index) {
  auto splitmix = [](std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  };
  return splitmix(master_seed ^ splitmix(static_cast<std::uint64_t>(realization_index) + 1));
}

DipoleCloud generate_cloud(const Geometry& geom, const MediumModel& model, const PlacementSpec& placement,
                           std::uint64_t seed, int realization_index) {
  validate(geom);
  if (!(model.n0 > 0.0)) throw ConfigError("generate_cloud: density must be positive");
  const Box bb = bounding_box(geom);
  if (!bb.lo.allFinite() || !bb.hi.allFinite()) throw ConfigError("generate_cloud: geometry must be bounded");
  const double vol = volume(geom);
  if (model.n0 * vol < 1.0) throw ConfigError("generate_cloud: volume holds fewer than one scatterer");

  DipoleCloud cloud;
  cloud.model = model;
  cloud.placement = placement.mode;
  cloud.seed = seed;
  cloud.realization_index = realization_index;

  if (placement.mode == PlacementMode::Ordered) {
    const double s = std::cbrt(1.0 / model.n0);
    const Eigen::Vector3i lo = (bb.lo / s).array().ceil().cast<int>();
    const Eigen::Vector3i hi = (bb.hi / s).array().floor().cast<int>();
    for (int i = lo.x(); i <= hi.x(); ++i)
      for (int j = lo.y(); j <= hi.y(); ++j)
        for (int k = lo.z(); k <= hi.z(); ++k) {
          const Vec3 p(i * s, j * s, k * s);
          if (contains(geom, p)) cloud.positions.push_back(p);
        }
    if (cloud.positions.empty()) throw ConfigError("generate_cloud: lattice does not intersect the body");
    return cloud;
  }

  const auto n_target = static_cast<std::size_t>(std::llround(model.n0 * vol));
  const double rmin = placement.r_min;
  const double rmin2 = rmin * rmin;
  const Vec3 ext = bb.hi - bb.lo;
  const double cell = std::max({rmin, std::cbrt(ext.prod() / 4e6), 1e-9});
  const Eigen::Vector3i dims = (ext / cell).array().ceil().cast<int>().cwiseMax(1);
  auto cell_of = [&](const Vec3& p) {
    return ((p - bb.lo) / cell).array().floor().cast<int>().min(dims.array() - 1).max(0).matrix().eval();
  };
  auto key = [&](const Eigen::Vector3i& c) {
    return (static_cast<std::int64_t>(c.x()) * dims.y() + c.y()) * dims.z() + c.z();
  };
  std::unordered_map<std::int64_t, std::vector<int>> grid;

  std::mt19937_64 rng(realization_seed(seed, realization_index));
  std::uniform_real_distribution<double> ux(bb.lo.x(), bb.hi.x());
  std::uniform_real_distribution<double> uy(bb.lo.y(), bb.hi.y());
  std::uniform_real_distribution<double> uz(bb.lo.z(), bb.hi.z());

  const std::size_t budget = n_target * static_cast<std::size_t>(placement.max_attempts_per_scatterer);
  std::size_t attempts = 0;
  cloud.positions.reserve(n_target);
  while (cloud.positions.size() < n_target) {
    if (++attempts > budget)
      throw ConfigError("generate_cloud: could not place " + std::to_string(n_target) +
                        " scatterers with the exclusion radius; lower the density or r_min");
    const double x = ux(rng);
    const double y = uy(rng);
    const double z = uz(rng);
    const Vec3 p(x, y, z);
    if (!contains(geom, p)) continue;
    bool ok = true;
    if (rmin > 0.0) {
      const Eigen::Vector3i c = cell_of(p);
      for (int dx = -1; dx <= 1 && ok; ++dx)
        for (int dy = -1; dy <= 1 && ok; ++dy)
          for (int dz = -1; dz <= 1 && ok; ++dz) {
            const Eigen::Vector3i nb = c + Eigen::Vector3i(dx, dy, dz);
            if ((nb.array() < 0).any() || (nb.array() >= dims.array()).any()) continue;
            const auto it = grid.find(key(nb));
            if (it == grid.end()) continue;
            for (int idx : it->second)
              if ((cloud.positions[idx] - p).squaredNorm() < rmin2) {
                ok = false;
                break;
              }
          }
    }
    if (!ok) continue;
    grid[key(cell_of(p))].push_back(static_cast<int>(cloud.positions.size()));
    cloud.positions.push_back(p);
  }
  return cloud;
}

}  // namespace nanoqed
