#include <ftc/pmp.hpp>

#include "parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

namespace ftc {

double hamiltonian(const DynamicsSpec& sys, double t, const Vec& x, const RowVec& psi,
                   const Vec& u) {
  require_dim(psi.size(), sys.n(), "hamiltonian covector");
  return psi.transpose().dot(sys.eval(t, x, u));
}

MaxResult max_function(const ControlSystem& sys, double t, const Vec& x, const RowVec& psi) {
  require_dim(psi.size(), sys.n(), "max_function covector");
  const auto& U = sys.controls;
  const auto& f = sys.dynamics;
  if (const auto* fin = U.finite()) {
    MaxResult best{-std::numeric_limits<double>::infinity(), {}};
    for (const auto& p : fin->points) {
      const double h = hamiltonian(f, t, x, psi, p);
      if (h > best.value) best = {h, p};  // strict: lowest index wins ties
    }
    return best;
  }
  if (!f.control_affine()) {
    fail(ErrorKind::Unsupported, "max_function: continuum control set needs control-affine dynamics");
  }
  const Mat G = f.affine_split(t, x);
  const RowVec c = psi * G;  // c(0) = <psi, g0>, c(j) = <psi, g_j>
  const int r = f.r();
  MaxResult out;
  out.witness = Vec::Zero(r);
  if (U.sphere()) {
    require_dim(U.dim(), r, "unit sphere control set");
    const Vec coeff = c.tail(r).transpose();
    const double norm = coeff.norm();
    out.value = c(0) + norm;
    if (norm > 0.0) {
      out.witness = coeff / norm;
    } else {
      out.witness(0) = 1.0;
    }
    return out;
  }
  const Box& b = *U.box();
  require_dim(b.lower.size(), r, "box control set");
  out.value = c(0);
  for (int j = 0; j < r; ++j) {
    const double cj = c(j + 1);
    out.witness(j) = cj > 0.0 ? b.upper(j) : b.lower(j);
    out.value += cj * out.witness(j);
  }
  return out;
}

void LambdaConfig::validate() const {
  if (s != -1 && s != 1) fail(ErrorKind::Config, "s must be -1 or +1");
  if (!(sphere_resolution > 0.0)) fail(ErrorKind::Config, "sphere resolution must be > 0");
  if (!(residual_tol > 0.0) || !(continuity_jump_tol > 0.0) || !(adjoint_tol > 0.0) ||
      !(admissibility_tol > 0.0)) {
    fail(ErrorKind::Config, "tolerances must be > 0");
  }
}

namespace {

enum class TableKind { Finite, Sphere, Box };

// Per-node data from which M(t_i, xhat_i, psi) is a cheap function of psi:
//   Finite: M = max_k psi . P[:,k]
//   Sphere: M = psi . P[:,0] + |psi . P[:,1..r]|
//   Box:    M = psi . P[:,0] + sum_j max(lo_j c_j, hi_j c_j),  c_j = psi . P[:,j]
struct NodeTable {
  TableKind kind = TableKind::Finite;
  Vec lo, hi;
  std::vector<Mat> P;
  std::vector<Vec> velocity;
};

double table_max(const NodeTable& tab, const Mat& P, const RowVec& psi) {
  const RowVec c = psi * P;
  switch (tab.kind) {
    case TableKind::Finite:
      return c.maxCoeff();
    case TableKind::Sphere:
      return c(0) + c.tail(c.size() - 1).norm();
    case TableKind::Box: {
      double m = c(0);
      for (Eigen::Index j = 1; j < c.size(); ++j) {
        m += std::max(tab.lo(j - 1) * c(j), tab.hi(j - 1) * c(j));
      }
      return m;
    }
  }
  return 0.0;
}

// Node velocities: the relaxed field (mean of adjacent cells at interior nodes)
// for admissible pairs, finite differences otherwise.
std::vector<Vec> node_velocities(const ControlSystem& sys, const ReferencePair& pair,
                                 const LambdaConfig& cfg) {
  const auto& ref = pair.trajectory;
  const auto& mu = pair.control;
  const auto audit = audit_admissibility(sys.dynamics, ref, mu, cfg.admissibility_tol);
  const Mesh& m = ref.mesh;
  const int N = m.cells;
  std::vector<Vec> vel(static_cast<size_t>(N) + 1);
  if (audit.pass) {
    for (int i = 0; i <= N; ++i) {
      const double t = m.node(i);
      const Vec& x = ref.samples[static_cast<size_t>(i)];
      Vec v = atoms_field(sys.dynamics, mu.cell(std::min(i, N - 1)), t, x);
      if (i > 0 && i < N) v = 0.5 * (v + atoms_field(sys.dynamics, mu.cell(i - 1), t, x));
      vel[static_cast<size_t>(i)] = v;
    }
    return vel;
  }
  if (!cfg.allow_inadmissible) {
    fail(ErrorKind::Input, "reference pair fails the admissibility audit (sup residual " +
                               std::to_string(audit.sup_residual) + ")");
  }
  return finite_difference_velocities(ref);
}

NodeTable build_table(const ControlSystem& sys, const ReferencePair& pair, const LambdaConfig& cfg) {
  const auto& f = sys.dynamics;
  const auto& U = sys.controls;
  const auto& ref = pair.trajectory;
  NodeTable tab;
  tab.velocity = node_velocities(sys, pair, cfg);
  if (U.finite()) {
    tab.kind = TableKind::Finite;
  } else if (!f.control_affine()) {
    fail(ErrorKind::Unsupported, "Lambda search: continuum control set needs control-affine dynamics");
  } else if (U.sphere()) {
    tab.kind = TableKind::Sphere;
  } else {
    tab.kind = TableKind::Box;
    tab.lo = U.box()->lower;
    tab.hi = U.box()->upper;
  }
  const int N = ref.mesh.cells;
  tab.P.reserve(static_cast<size_t>(N) + 1);
  for (int i = 0; i <= N; ++i) {
    const double t = ref.mesh.node(i);
    const Vec& x = ref.samples[static_cast<size_t>(i)];
    if (tab.kind == TableKind::Finite) {
      const auto& pts = U.finite()->points;
      Mat P(f.n(), static_cast<Eigen::Index>(pts.size()));
      for (size_t k = 0; k < pts.size(); ++k) P.col(static_cast<Eigen::Index>(k)) = f.eval(t, x, pts[k]);
      tab.P.push_back(std::move(P));
    } else {
      tab.P.push_back(f.affine_split(t, x));
    }
  }
  return tab;
}

double transversality(const LambdaConfig& cfg, double m_terminal) {
  return cfg.convention == TransversalityConvention::Definition ? cfg.s * m_terminal : m_terminal;
}

// Mean of the adjacent cell Jacobians at interior nodes.
Mat node_jacobian(const DynamicsSpec& f, const RelaxedControl& mu, const Mesh& m, int i,
                  const Vec& x) {
  const double t = m.node(i);
  const Mesh& cm = mu.mesh();
  auto cell_at = [&](double tt) { return cm.cell_of(std::clamp(tt, cm.t1, cm.t2)); };
  const int right = cell_at(t);
  Mat A = atoms_jacobian(f, mu.cell(right), t, x);
  if (i > 0 && i < m.cells) {
    const int left = cell_at(0.5 * (m.node(i - 1) + t));
    if (left != right) A = 0.5 * (A + atoms_jacobian(f, mu.cell(left), t, x));
  }
  return A;
}

RowVec unit_row(std::initializer_list<double> v) {
  RowVec r(static_cast<Eigen::Index>(v.size()));
  Eigen::Index k = 0;
  for (double d : v) r(k++) = d;
  return r;
}

}  // namespace

CertificateReport check_lambda_candidate(const ControlSystem& sys, const ReferencePair& pair,
                                         const RowVec& psi_terminal, const LambdaConfig& cfg) {
  cfg.validate();
  const auto& f = sys.dynamics;
  const auto& ref = pair.trajectory;
  const auto& mu = pair.control;
  require_dim(psi_terminal.size(), f.n(), "terminal covector");

  CertificateReport rep;
  rep.psi_terminal = psi_terminal;
  if (psi_terminal.isZero(0.0)) {
    rep.reason = "nonzero";
    return rep;
  }

  const auto vel = node_velocities(sys, pair, cfg);
  const Costate psi = integrate_adjoint(f, ref, mu, psi_terminal);
  const Mesh& m = ref.mesh;
  const int N = m.cells;

  std::vector<double> M(static_cast<size_t>(N) + 1);
  std::vector<Vec> witness(static_cast<size_t>(N) + 1);
  std::vector<Mat> A(static_cast<size_t>(N) + 1);
  rep.max_condition_residual = -std::numeric_limits<double>::infinity();
  for (int i = 0; i <= N; ++i) {
    const auto ui = static_cast<size_t>(i);
    const double t = m.node(i);
    const Vec& x = ref.samples[ui];
    const auto mr = max_function(sys, t, x, psi.samples[ui]);
    M[ui] = mr.value;
    witness[ui] = mr.witness;
    A[ui] = node_jacobian(f, mu, m, i, x);
    const double r = mr.value - psi.samples[ui].transpose().dot(vel[ui]);
    rep.max_condition_residual = std::max(rep.max_condition_residual, r);
  }

  // Adjoint defect from second-order differences of the sampled costate.
  const double h = m.h();
  for (int i = 0; i <= N; ++i) {
    const auto ui = static_cast<size_t>(i);
    const auto& s = psi.samples;
    RowVec d;
    if (N == 1) {
      d = (s[1] - s[0]) / h;
    } else if (i == 0) {
      d = (-3.0 * s[0] + 4.0 * s[1] - s[2]) / (2.0 * h);
    } else if (i == N) {
      d = (3.0 * s[ui] - 4.0 * s[ui - 1] + s[ui - 2]) / (2.0 * h);
    } else {
      d = (s[ui + 1] - s[ui - 1]) / (2.0 * h);
    }
    rep.adjoint_residual = std::max(rep.adjoint_residual, (d + s[ui] * A[ui]).norm());
  }

  // Continuity of M: largest jump beyond a Lipschitz allowance C * h.
  double lipschitz = 0.0, jump = 0.0;
  for (int i = 0; i < N; ++i) {
    const auto ui = static_cast<size_t>(i);
    const double t0 = m.node(i), t1 = m.node(i + 1);
    const Vec& x0 = ref.samples[ui];
    const Vec& x1 = ref.samples[ui + 1];
    const double dpsi = (psi.samples[ui] * A[ui]).norm();
    for (const Vec* w : {&witness[ui], &witness[ui + 1]}) {
      const Vec f0 = f.eval(t0, x0, *w);
      const Vec f1 = f.eval(t1, x1, *w);
      const double c = dpsi * f0.norm() + psi.samples[ui].norm() * (f1 - f0).norm() / (t1 - t0);
      lipschitz = std::max(lipschitz, c);
    }
    jump = std::max(jump, std::abs(M[ui + 1] - M[ui]));
  }
  rep.continuity_jump = std::max(0.0, jump - lipschitz * h);
  rep.transversality_value = transversality(cfg, M.back());

  if (rep.max_condition_residual > cfg.residual_tol) {
    rep.reason = "max_condition";
  } else if (rep.adjoint_residual > cfg.adjoint_tol) {
    rep.reason = "adjoint";
  } else if (rep.continuity_jump > cfg.continuity_jump_tol) {
    rep.reason = "continuity";
  } else if (rep.transversality_value > cfg.residual_tol) {
    rep.reason = "transversality";
  } else {
    rep.verdict = Verdict::Member;
  }
  return rep;
}

std::vector<RowVec> sphere_directions(int n, double resolution) {
  if (!(resolution > 0.0)) fail(ErrorKind::Config, "sphere resolution must be > 0");
  std::vector<RowVec> dirs;
  if (n == 1) {
    dirs.push_back(unit_row({1.0}));
    dirs.push_back(unit_row({-1.0}));
  } else if (n == 2) {
    const long K = static_cast<long>(std::ceil(2.0 * std::numbers::pi / resolution));
    dirs.reserve(static_cast<size_t>(K));
    for (long k = 0; k < K; ++k) {
      const double th = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(K);
      dirs.push_back(unit_row({std::cos(th), std::sin(th)}));
    }
  } else if (n == 3) {
    const long K =
        static_cast<long>(std::ceil(4.0 * std::numbers::pi / (resolution * resolution)));
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    dirs.reserve(static_cast<size_t>(K));
    for (long k = 0; k < K; ++k) {
      const double z = 1.0 - (2.0 * static_cast<double>(k) + 1.0) / static_cast<double>(K);
      const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double ph = golden * static_cast<double>(k);
      dirs.push_back(unit_row({rho * std::cos(ph), rho * std::sin(ph), z}));
    }
  } else if (n <= 6) {
    // Normalized lattice on the surface of the cube [-1, 1]^n.
    const long m = static_cast<long>(std::ceil(2.0 / resolution));
    const double est = 2.0 * n * std::pow(static_cast<double>(m + 1), n - 1);
    if (est > 2e7) fail(ErrorKind::Unsupported, "sphere scan too large for this dimension");
    std::vector<long> idx(static_cast<size_t>(n - 1), 0);
    for (int axis = 0; axis < n; ++axis) {
      for (int sign : {1, -1}) {
        std::fill(idx.begin(), idx.end(), 0);
        while (true) {
          RowVec v(n);
          bool dup = false;
          for (int d = 0, k = 0; d < n; ++d) {
            if (d == axis) {
              v(d) = sign;
              continue;
            }
            const long q = idx[static_cast<size_t>(k++)];
            v(d) = -1.0 + 2.0 * static_cast<double>(q) / static_cast<double>(m);
            // Points on a lower-index face are emitted there.
            if (d < axis && (q == 0 || q == m)) dup = true;
          }
          if (!dup) dirs.push_back(v.normalized());
          size_t k = 0;
          while (k < idx.size() && ++idx[k] > m) idx[k++] = 0;
          if (k == idx.size()) break;
        }
      }
    }
  } else {
    fail(ErrorKind::Unsupported, "sphere scans are limited to n <= 6");
  }
  return dirs;
}

LambdaVerdict search_lambda(const ControlSystem& sys, const ReferencePair& pair,
                            const LambdaConfig& cfg) {
  cfg.validate();
  const auto& f = sys.dynamics;
  const int n = f.n();
  if (n > 6) fail(ErrorKind::Unsupported, "sphere scans are limited to n <= 6");

  const NodeTable tab = build_table(sys, pair, cfg);
  const FundamentalCostate phi = fundamental_costate(f, pair.trajectory, pair.control);
  const size_t nodes = tab.P.size();
  std::vector<Mat> W(nodes);
  std::vector<Vec> w(nodes);
  for (size_t i = 0; i < nodes; ++i) {
    W[i] = phi.samples[i] * tab.P[i];
    w[i] = phi.samples[i] * tab.velocity[i];
  }

  // Max-condition residual plus the positive part of the transversality value.
  auto score = [&](const RowVec& v) {
    double worst = -std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < nodes; ++i) {
      worst = std::max(worst, table_max(tab, W[i], v) - v.dot(w[i].transpose()));
    }
    const double tv = transversality(cfg, table_max(tab, W.back(), v));
    return worst + std::max(0.0, tv);
  };

  auto scan = [&](const std::vector<RowVec>& dirs, std::vector<double>& scores) {
    scores.assign(dirs.size(), 0.0);
    detail::parallel_for(static_cast<long>(dirs.size()), cfg.workers,
                 [&](long k) { scores[static_cast<size_t>(k)] = score(dirs[static_cast<size_t>(k)]); });
  };

  auto first_member = [&](const std::vector<RowVec>& dirs, const std::vector<double>& scores,
                          bool refined) -> std::optional<LambdaFound> {
    for (size_t k = 0; k < dirs.size(); ++k) {
      if (scores[k] > cfg.residual_tol) continue;
      auto rep = check_lambda_candidate(sys, pair, dirs[k], cfg);
      if (rep.verdict == Verdict::Member) return LambdaFound{dirs[k], std::move(rep), refined};
    }
    return std::nullopt;
  };

  const std::vector<RowVec> grid = sphere_directions(n, cfg.sphere_resolution);
  std::vector<double> scores;
  scan(grid, scores);
  LambdaVerdict out;
  out.scan_size = static_cast<long>(grid.size());
  if (auto found = first_member(grid, scores, false)) {
    out.outcome = std::move(*found);
    return out;
  }

  const size_t best = static_cast<size_t>(std::min_element(scores.begin(), scores.end()) - scores.begin());
  double min_score = scores[best];
  RowVec best_dir = grid[best];

  // One local refinement pass at resolution / 100 around the best direction.
  std::vector<RowVec> local;
  const double step = cfg.sphere_resolution / 100.0;
  const RowVec& c = grid[best];
  if (n == 2) {
    const double th = std::atan2(c(1), c(0));
    for (int k = -100; k <= 100; ++k) {
      const double a = th + k * step;
      local.push_back(unit_row({std::cos(a), std::sin(a)}));
    }
  } else if (n >= 3) {
    Eigen::HouseholderQR<Mat> qr(c.transpose());
    const Mat Q = qr.householderQ();
    const Mat T = Q.rightCols(n - 1);  // tangent basis at c
    if (n == 3) {
      for (int a = -100; a <= 100; ++a)
        for (int b = -100; b <= 100; ++b) {
          const Vec v = c.transpose() + a * step * T.col(0) + b * step * T.col(1);
          local.push_back(v.normalized().transpose());
        }
    } else {
      for (int d = 0; d < n - 1; ++d)
        for (int a = -100; a <= 100; ++a) {
          const Vec v = c.transpose() + a * step * T.col(d);
          local.push_back(v.normalized().transpose());
        }
    }
  }
  if (!local.empty()) {
    std::vector<double> local_scores;
    scan(local, local_scores);
    out.scan_size += static_cast<long>(local.size());
    if (auto found = first_member(local, local_scores, true)) {
      out.outcome = std::move(*found);
      return out;
    }
    const size_t lb = static_cast<size_t>(
        std::min_element(local_scores.begin(), local_scores.end()) - local_scores.begin());
    if (local_scores[lb] < min_score) {
      min_score = local_scores[lb];
      best_dir = local[lb];
    }
  }
  out.outcome = LambdaEmpty{min_score, best_dir, out.scan_size};
  return out;
}

}  // namespace ftc
