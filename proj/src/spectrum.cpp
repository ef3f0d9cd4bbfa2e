#include "nanoqed/spectrum.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <map>
#include <numeric>
#include <sstream>

#include <omp.h>

#include "nanoqed/kernels.hpp"

namespace nanoqed {

std::size_t medium_block_bytes(std::size_t n) { return 16 * (3 * n) * (3 * n); }

MediumBlock assemble_medium_block(const DipoleCloud& cloud, bool include_medium_linewidth,
                                  std::size_t memory_budget) {
  const std::size_t n = cloud.size();
  if (n == 0) throw ConfigError("assemble_medium_block: empty cloud");
  const std::size_t bytes = medium_block_bytes(n);
  if (bytes > memory_budget) {
    std::ostringstream os;
    os << "medium block for N=" << n << " needs " << bytes / (1 << 20) << " MiB, budget is "
       << memory_budget / (1 << 20) << " MiB";
    throw ConfigError(os.str());
  }
  // The block is (E - H) at E = 0 and a scatterer's complex energy is
  // delta_M - i Gamma_e / 2, so its linewidth enters with a plus sign. That is
  // the same sign the pair terms -f0^2 D carry on their imaginary part, which
  // keeps the whole system dissipative.
  cplx diagonal(-cloud.model.delta_M, 0.0);
  if (include_medium_linewidth) diagonal += kI * (cloud.model.gamma_e / 2.0);

  MediumBlock block;
  block.includes_linewidth = include_medium_linewidth;
  block.matrix.resize(static_cast<Eigen::Index>(3 * n), static_cast<Eigen::Index>(3 * n));
  kernels::fill_medium_block(cloud.positions, cloud.model.f0_sq, diagonal, block.matrix);
  return block;
}

Eigen::MatrixXcd assemble_coupling_block(const DipoleCloud& cloud, std::span<const Vec3> atoms) {
  for (const auto& atom : atoms)
    for (const auto& p : cloud.positions)
      if ((atom - p).squaredNorm() == 0.0) throw ConfigError("atom coincides with a medium scatterer");
  Eigen::MatrixXcd K(static_cast<Eigen::Index>(3 * cloud.size()), static_cast<Eigen::Index>(3 * atoms.size()));
  kernels::fill_coupling_block(cloud.positions, std::sqrt(cloud.model.f0_sq), atoms, K);
  return K;
}

struct MediumResolvent::Impl {
  explicit Impl(Eigen::MatrixXcd&& m) : storage(std::move(m)), lu(storage) {}
  Eigen::MatrixXcd storage;
  Eigen::PartialPivLU<Eigen::Ref<Eigen::MatrixXcd>> lu;
};

MediumResolvent::MediumResolvent(const DipoleCloud& cloud, bool include_medium_linewidth,
                                 std::size_t memory_budget)
    : positions_(cloud.positions), f0_(std::sqrt(cloud.model.f0_sq)) {
  auto block = assemble_medium_block(cloud, include_medium_linewidth, memory_budget);
  impl_ = std::make_unique<Impl>(std::move(block.matrix));
  rcond_ = impl_->lu.rcond();
  if (!std::isfinite(rcond_) || rcond_ < 1e-14) {
    std::ostringstream os;
    os << "medium block is numerically singular (rcond estimate " << rcond_ << ")";
    throw NumericalError(os.str());
  }
}

MediumResolvent::~MediumResolvent() = default;
MediumResolvent::MediumResolvent(MediumResolvent&&) noexcept = default;
MediumResolvent& MediumResolvent::operator=(MediumResolvent&&) noexcept = default;

std::vector<CMat3> MediumResolvent::response(std::span<const Vec3> atoms) const {
  for (const auto& atom : atoms)
    for (const auto& p : positions_)
      if ((atom - p).squaredNorm() == 0.0) throw ConfigError("atom coincides with a medium scatterer");
  Eigen::MatrixXcd K(static_cast<Eigen::Index>(3 * positions_.size()), static_cast<Eigen::Index>(3 * atoms.size()));
  kernels::fill_coupling_block(positions_, f0_, atoms, K);
  const Eigen::MatrixXcd X = impl_->lu.solve(K);
  std::vector<CMat3> out(atoms.size());
  for (std::size_t p = 0; p < atoms.size(); ++p) {
    const auto c = static_cast<Eigen::Index>(3 * p);
    out[p] = K.middleCols<3>(c).transpose() * X.middleCols<3>(c);
  }
  return out;
}

Eigen::MatrixXcd self_energy_from_response(const DipoleTable& dipoles, const CMat3& T, double coupling_sign) {
  const int ne = dipoles.n_excited();
  const int ng = dipoles.n_ground();
  Eigen::MatrixXcd sigma = Eigen::MatrixXcd::Zero(ne, ne);
  sigma.diagonal().setConstant(cplx(0.0, -0.5));
  for (int m = 0; m < ng; ++m) {
    for (int n = 0; n < ne; ++n) {
      const CVec3& dn = dipoles.excited_to_ground(n, m);
      if (dn.squaredNorm() == 0.0) continue;
      const Eigen::RowVector3cd left = coupling_sign * (dn.transpose() * T);
      for (int np = 0; np < ne; ++np) {
        const CVec3& dnp = dipoles.excited_to_ground(np, m);
        if (dnp.squaredNorm() == 0.0) continue;
        sigma(n, np) += (left * dnp.conjugate())(0, 0);
      }
    }
  }
  return sigma;
}

SelfEnergyMatrix self_energy(const TransitionScheme& scheme, const DipoleCloud& cloud, const Vec3& atom_position,
                             bool include_medium_linewidth, std::size_t memory_budget) {
  SelfEnergyMatrix out;
  out.atom_position = atom_position;
  out.realization_index = cloud.realization_index;
  const DipoleTable dipoles(scheme);
  if (cloud.size() == 0) {
    out.sigma = Eigen::MatrixXcd::Identity(dipoles.n_excited(), dipoles.n_excited()) * cplx(0.0, -0.5);
    return out;
  }
  const MediumResolvent resolvent(cloud, include_medium_linewidth, memory_budget);
  const Vec3 atoms[1] = {atom_position};
  const auto T = resolvent.response(atoms);
  out.sigma = self_energy_from_response(dipoles, T[0]);
  out.rcond = resolvent.rcond();
  return out;
}

double min_decay_eigenvalue(const Eigen::MatrixXcd& sigma) {
  const Eigen::MatrixXcd decay = kI * (sigma - sigma.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(decay, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

std::vector<std::vector<int>> cluster_eigenvalues(std::span<const cplx> values, double tol) {
  std::vector<int> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    const double ga = -2.0 * values[a].imag();
    const double gb = -2.0 * values[b].imag();
    if (ga != gb) return ga > gb;
    return values[a].real() < values[b].real();
  });
  std::vector<bool> used(values.size(), false);
  std::vector<std::vector<int>> groups;
  for (int seed : order) {
    if (used[seed]) continue;
    std::vector<int> group{seed};
    used[seed] = true;
    for (int other : order)
      if (!used[other] && std::abs(values[other] - values[seed]) <= tol) {
        group.push_back(other);
        used[other] = true;
      }
    groups.push_back(std::move(group));
  }
  return groups;
}

SpectrumPoint diagonalize(const SelfEnergyMatrix& sigma, double cluster_tol) {
  if (!(cluster_tol > 0.0)) throw ConfigError("diagonalize: cluster tolerance must be positive");
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(sigma.sigma, true);
  if (es.info() != Eigen::Success) throw NumericalError("diagonalize: eigensolver did not converge");

  SpectrumPoint point;
  point.eigenvalues = es.eigenvalues();
  point.eigenvectors = es.eigenvectors();
  point.eigen_labels.assign(static_cast<std::size_t>(point.eigenvalues.size()), -1);

  std::vector<cplx> values(point.eigenvalues.data(), point.eigenvalues.data() + point.eigenvalues.size());
  for (auto& group : cluster_eigenvalues(values, cluster_tol)) {
    Cluster c;
    cplx mean = 0.0;
    for (int i : group) mean += values[i];
    mean /= static_cast<double>(group.size());
    for (int i : group)
      for (int j : group) c.width = std::max(c.width, std::abs(values[i] - values[j]));
    c.delta = mean.real();
    c.gamma = -2.0 * mean.imag();
    c.multiplicity = static_cast<int>(group.size());
    c.members = std::move(group);
    point.clusters.push_back(std::move(c));
  }
  std::stable_sort(point.clusters.begin(), point.clusters.end(),
                   [](const Cluster& a, const Cluster& b) { return a.gamma > b.gamma; });
  return point;
}

void assign_symmetry_labels(SpectrumPoint& point, double F_excited, const Vec3& axis) {
  const int dim = static_cast<int>(point.eigenvalues.size());
  if (!(axis.norm() > 0.0)) throw ConfigError("symmetry axis must be nonzero");
  const Eigen::MatrixXcd Fa = angular_momentum_projection(F_excited, axis);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(Fa);
  const Eigen::VectorXd M = es.eigenvalues();
  const Eigen::MatrixXcd U = es.eigenvectors();
  const int n_labels = static_cast<int>(std::floor(F_excited + 1e-9)) + 1;
  const bool half_integer = std::abs(F_excited - std::round(F_excited)) > 1e-9;

  auto bucket = [&](double m) {
    // |M| for integer F; |M| - 1/2 indexes half-integer manifolds.
    return static_cast<int>(std::lround(std::abs(m) - (half_integer ? 0.5 : 0.0)));
  };

  Eigen::MatrixXd weights = Eigen::MatrixXd::Zero(n_labels, dim);
  for (int k = 0; k < dim; ++k) {
    const Eigen::VectorXcd v = point.eigenvectors.col(k).normalized();
    const Eigen::VectorXcd c = U.adjoint() * v;
    for (int i = 0; i < dim; ++i) weights(bucket(M(i)), k) += std::norm(c(i));
    Eigen::Index best = 0;
    weights.col(k).maxCoeff(&best);
    point.eigen_labels[static_cast<std::size_t>(k)] = static_cast<int>(best);
  }

  for (auto& cluster : point.clusters) {
    if (dim > 1 && cluster.multiplicity == dim) {
      cluster.label.reset();
      std::fill(point.eigen_labels.begin(), point.eigen_labels.end(), -1);
      continue;
    }
    Eigen::VectorXd w = Eigen::VectorXd::Zero(n_labels);
    for (int k : cluster.members) w += weights.col(k);
    Eigen::Index best = 0;
    const double top = w.maxCoeff(&best);
    double second = 0.0;
    for (int i = 0; i < n_labels; ++i)
      if (i != best) second = std::max(second, w(i));
    cluster.label = static_cast<int>(best);
    cluster.low_confidence = (top - second) < 0.05 * top;
  }
}

namespace {

struct RealizationSlot {
  RealizationInfo info;
  std::vector<SpectrumPoint> points;
  std::exception_ptr error;
};

std::vector<SpectrumPoint> evaluate_realization(const ScanRequest& req, const std::vector<Vec3>& atoms, int r,
                                                RealizationInfo& info) {
  const DipoleTable dipoles(req.scheme);
  std::vector<CMat3> T(atoms.size(), CMat3::Zero());
  if (!req.empty_medium) {
    const DipoleCloud cloud = generate_cloud(req.geometry, req.model, req.placement, req.seed, r);
    info.n_scatterers = cloud.size();
    const MediumResolvent resolvent(cloud, req.include_medium_linewidth, req.memory_budget);
    info.rcond = resolvent.rcond();
    T = resolvent.response(atoms);
  }
  std::vector<SpectrumPoint> points;
  points.reserve(atoms.size());
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    SelfEnergyMatrix sigma;
    sigma.sigma = self_energy_from_response(dipoles, T[i]);
    sigma.atom_position = atoms[i];
    sigma.realization_index = r;
    sigma.rcond = info.rcond;
    SpectrumPoint sp = diagonalize(sigma, req.cluster_tol);
    sp.distance = req.distances[i];
    assign_symmetry_labels(sp, req.scheme.F_excited, symmetry_axis(req.geometry, atoms[i]));
    points.push_back(std::move(sp));
  }
  return points;
}

ScanPoint aggregate(const ScanRequest& req, const std::vector<RealizationSlot>& slots, std::size_t i) {
  const int R = static_cast<int>(slots.size());
  ScanPoint out;
  out.distance = req.distances[i];
  for (const auto& s : slots) out.per_realization.push_back(s.points[i]);

  auto histogram = [](const SpectrumPoint& sp) {
    std::map<int, int> h;
    for (int l : sp.eigen_labels) ++h[l];
    return h;
  };
  const auto h0 = histogram(out.per_realization.front());
  bool consistent = true;
  for (const auto& sp : out.per_realization) consistent = consistent && histogram(sp) == h0;
  out.label_fallback = !consistent;

  // Key k of realization r -> eigenvalue index order[r][k].
  std::vector<std::vector<int>> order(static_cast<std::size_t>(R));
  std::vector<int> key_label;
  for (int r = 0; r < R; ++r) {
    const auto& sp = out.per_realization[r];
    std::vector<int> idx(static_cast<std::size_t>(sp.eigenvalues.size()));
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
      if (consistent && sp.eigen_labels[a] != sp.eigen_labels[b]) return sp.eigen_labels[a] < sp.eigen_labels[b];
      const double ga = -2.0 * sp.eigenvalues(a).imag();
      const double gb = -2.0 * sp.eigenvalues(b).imag();
      if (ga != gb) return ga > gb;
      return sp.eigenvalues(a).real() < sp.eigenvalues(b).real();
    });
    if (r == 0)
      for (int k : idx) key_label.push_back(consistent ? sp.eigen_labels[k] : -1);
    order[r] = std::move(idx);
  }

  const std::size_t n_keys = key_label.size();
  std::vector<cplx> mean(n_keys, 0.0);
  for (int r = 0; r < R; ++r)
    for (std::size_t k = 0; k < n_keys; ++k) mean[k] += out.per_realization[r].eigenvalues(order[r][k]);
  for (auto& v : mean) v /= static_cast<double>(R);

  double min_decay = std::numeric_limits<double>::infinity();
  for (const auto& sp : out.per_realization)
    for (Eigen::Index k = 0; k < sp.eigenvalues.size(); ++k) min_decay = std::min(min_decay, -2.0 * sp.eigenvalues(k).imag());
  out.min_decay_eigenvalue = min_decay;

  for (const auto& group : cluster_eigenvalues(mean, req.cluster_tol)) {
    AveragedCluster c;
    c.multiplicity = static_cast<int>(group.size());
    c.n_realizations = R;
    std::map<int, int> votes;
    for (int k : group) ++votes[key_label[k]];
    const auto top = std::max_element(votes.begin(), votes.end(),
                                      [](const auto& a, const auto& b) { return a.second < b.second; });
    if (top->first >= 0) c.label = top->first;

    std::vector<double> g(static_cast<std::size_t>(R)), d(static_cast<std::size_t>(R));
    for (int r = 0; r < R; ++r) {
      cplx x = 0.0;
      for (int k : group) x += out.per_realization[r].eigenvalues(order[r][k]);
      x /= static_cast<double>(group.size());
      g[r] = -2.0 * x.imag();
      d[r] = x.real();
    }
    auto mean_of = [](const std::vector<double>& v) {
      double s = 0.0;
      for (double x : v) s += x;
      return s / static_cast<double>(v.size());
    };
    auto stderr_of = [&](const std::vector<double>& v, double mu) {
      if (v.size() < 2) return 0.0;
      double s = 0.0;
      for (double x : v) s += (x - mu) * (x - mu);
      return std::sqrt(s / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
    };
    c.gamma = mean_of(g);
    c.delta = mean_of(d);
    c.stderr_gamma = stderr_of(g, c.gamma);
    c.stderr_delta = stderr_of(d, c.delta);
    out.clusters.push_back(c);
  }
  std::stable_sort(out.clusters.begin(), out.clusters.end(),
                   [](const AveragedCluster& a, const AveragedCluster& b) { return a.gamma > b.gamma; });
  return out;
}

}  // namespace

ScanResult scan(const ScanRequest& req) {
  req.scheme.validate();
  validate(req.geometry);
  if (req.realizations < 1) throw ConfigError("scan: at least one realization is required");
  if (req.distances.empty()) throw ConfigError("scan: no distances given");
  if (!std::is_sorted(req.distances.begin(), req.distances.end()))
    throw ConfigError("scan: distances must be sorted ascending");
  if (!req.empty_medium) req.model.validate();

  std::vector<Vec3> atoms;
  for (double d : req.distances) {
    const Vec3 a = atom_site(req.geometry, req.site, d);
    const double c = clearance(req.geometry, a);
    if (!(c > 0.0) || c < req.min_clearance)
      throw ConfigError("scan: atom at distance " + std::to_string(d) + " is closer to the body than allowed");
    atoms.push_back(a);
  }

  std::vector<RealizationSlot> slots(static_cast<std::size_t>(req.realizations));
  int concurrency = std::min(omp_get_max_threads(), req.realizations);
  if (!req.empty_medium) {
    const auto n_est = static_cast<std::size_t>(std::ceil(1.1 * req.model.n0 * volume(req.geometry))) + 1;
    const std::size_t per = medium_block_bytes(n_est);
    concurrency = std::max(1, std::min<int>(concurrency, static_cast<int>(req.memory_budget / std::max<std::size_t>(per, 1))));
  }

#pragma omp parallel for schedule(dynamic, 1) num_threads(concurrency)
  for (int r = 0; r < req.realizations; ++r) {
    auto& slot = slots[static_cast<std::size_t>(r)];
    try {
      const auto t0 = std::chrono::steady_clock::now();
      slot.points = evaluate_realization(req, atoms, r, slot.info);
      slot.info.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    } catch (...) {
      slot.error = std::current_exception();
    }
  }
  for (const auto& slot : slots)
    if (slot.error) std::rethrow_exception(slot.error);

  ScanResult result;
  for (const auto& slot : slots) result.realizations.push_back(slot.info);
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    result.points.push_back(aggregate(req, slots, i));
    result.points.back().atom = atoms[i];
  }
  return result;
}

}  // namespace nanoqed
