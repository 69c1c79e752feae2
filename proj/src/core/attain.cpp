#include <ftc/attain.hpp>
#include <ftc/chattering.hpp>
#include <ftc/integrate.hpp>

#include "parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace ftc {

const char* to_string(AttainStatus s) {
  switch (s) {
    case AttainStatus::Success: return "success";
    case AttainStatus::Refused: return "refused";
    case AttainStatus::NewtonFailed: return "newton_failed";
    case AttainStatus::TubeViolated: return "tube_violated";
    case AttainStatus::PolishFailed: return "polish_failed";
  }
  return "unknown";
}

namespace {

double weight_of(const AtomList& atoms, const Vec& point) {
  double w = 0.0;
  for (const auto& a : atoms)
    if (a.u == point) w += a.w;
  return w;
}

void add_mass(AtomList& atoms, const Vec& point, double dw) {
  for (auto& a : atoms) {
    if (a.u == point) {
      a.w += dw;
      return;
    }
  }
  atoms.push_back({dw, point});
}

// Coarsest uniform re-meshing on which mu is still cellwise constant.
RelaxedControl coarsen(const RelaxedControl& mu) {
  const int N = mu.mesh().cells;
  auto same = [](const AtomList& a, const AtomList& b) {
    if (a.size() != b.size()) return false;
    for (size_t k = 0; k < a.size(); ++k)
      if (a[k].w != b[k].w || !(a[k].u == b[k].u)) return false;
    return true;
  };
  for (int coarse = 1; coarse < N; ++coarse) {
    if (N % coarse != 0) continue;
    const int block = N / coarse;
    bool ok = true;
    for (int c = 0; c < N && ok; ++c) ok = same(mu.cell(c), mu.cell(c - c % block));
    if (!ok) continue;
    std::vector<AtomList> cells;
    for (int c = 0; c < coarse; ++c) cells.push_back(mu.cell(c * block));
    return RelaxedControl(Mesh(mu.mesh().t1, mu.mesh().t2, coarse), std::move(cells));
  }
  return mu;
}

Vec propagate_piece(const DynamicsSpec& sys, const Vec& u, double t0, const Vec& x0, double dt,
                    double max_step) {
  if (dt <= 0.0) return x0;
  const int steps = std::max(1, static_cast<int>(std::ceil(dt / max_step - 1e-9)));
  const TimeField f = [&](double t, const Vec& x) { return sys.eval(t, x, u); };
  Vec x = x0;
  for (int k = 0; k < steps; ++k) {
    const double a = t0 + dt * (static_cast<double>(k) / steps);
    const double b = t0 + dt * (static_cast<double>(k + 1) / steps);
    x = rk4_step(f, a, x, b - a);
  }
  return x;
}

// State reached at time t under an ordinary control that starts at x1.
Vec state_at(const DynamicsSpec& sys, const OrdinaryControl& u, const Vec& x1, double t,
             int cells_per_unit) {
  if (t <= u.start()) return x1;
  OrdinaryControl head;
  for (int k = 0; k < u.pieces(); ++k) {
    const double a = u.breakpoints[static_cast<size_t>(k)];
    if (a >= t) break;
    head.breakpoints.push_back(a);
    head.values.push_back(u.values[static_cast<size_t>(k)]);
  }
  head.breakpoints.push_back(t);
  return integrate_ordinary(sys, head, x1, mesh_with_density(u.start(), t, cells_per_unit)).back();
}

double tube_deviation(const Trajectory& x, const Trajectory& ref, double t_limit) {
  double dev = 0.0;
  for (int i = 0; i <= x.mesh.cells; ++i) {
    const double t = x.mesh.node(i);
    if (t > t_limit) break;
    dev = std::max(dev, (x.samples[static_cast<size_t>(i)] - ref.at(t)).norm());
  }
  return dev;
}

}  // namespace

VariationDirection make_direction(const DirectionTemplate& tmpl, const RelaxedControl& base) {
  double net = 0.0;
  for (const auto& [dw, point] : tmpl.deltas) net += dw;
  if (std::abs(net) > 1e-12) fail(ErrorKind::Input, "direction '" + tmpl.name + "': deltas must sum to 0");
  VariationDirection d;
  d.name = tmpl.name;
  d.alpha_max = std::numeric_limits<double>::infinity();
  for (const auto& atoms : base.cells()) {
    d.cells.push_back(tmpl.deltas);
    for (const auto& [dw, point] : tmpl.deltas) {
      if (dw < 0.0) d.alpha_max = std::min(d.alpha_max, weight_of(atoms, point) / -dw);
    }
  }
  if (!std::isfinite(d.alpha_max)) d.alpha_max = 1.0;
  return d;
}

RelaxedControl perturbed_control(const RelaxedControl& base,
                                 const std::vector<VariationDirection>& dirs, const Vec& alpha,
                                 double tau) {
  require_dim(alpha.size(), static_cast<Eigen::Index>(dirs.size()), "variation weights");
  const Mesh& m = base.mesh();
  std::vector<AtomList> cells;
  cells.reserve(static_cast<size_t>(m.cells));
  for (int c = 0; c < m.cells; ++c) {
    AtomList atoms = base.cell(c);
    for (size_t i = 0; i < dirs.size(); ++i) {
      const double a = alpha[static_cast<Eigen::Index>(i)];
      if (a < 0.0) fail(ErrorKind::Domain, "variation weight alpha must be >= 0");
      if (a == 0.0) continue;
      for (const auto& [dw, point] : dirs[i].cells.at(static_cast<size_t>(c))) add_mass(atoms, point, a * dw);
    }
    AtomList kept;
    for (auto& at : atoms) {
      if (at.w < -1e-12) fail(ErrorKind::Domain, "perturbed control has a negative weight");
      if (at.w > 1e-15) kept.push_back(at);
    }
    cells.push_back(std::move(kept));
  }
  return RelaxedControl(Mesh(m.t1, tau, m.cells), std::move(cells));
}

Vec endpoint_map(const DynamicsSpec& sys, const RelaxedControl& base,
                 const std::vector<VariationDirection>& dirs, double tau, const Vec& alpha,
                 const Vec& x1, int cells_per_unit) {
  const RelaxedControl mu = perturbed_control(base, dirs, alpha, tau);
  return integrate_relaxed(sys, mu, x1, mesh_with_density(mu.mesh().t1, tau, cells_per_unit)).back();
}

AttainabilityResult probe_attainability(const ControlSystem& sys, const ReferencePair& pair,
                                        const std::vector<VariationDirection>& dirs,
                                        const AttainConfig& cfg) {
  if (cfg.s != -1 && cfg.s != 1) fail(ErrorKind::Config, "s must be -1 or +1");
  if (!(cfg.eps > 0.0)) fail(ErrorKind::Config, "eps must be > 0");
  const auto& f = sys.dynamics;
  const Trajectory& ref = pair.trajectory;
  const double t1 = ref.mesh.t1, t2 = ref.mesh.t2;
  const Vec& x1 = ref.front();
  const Vec& target = ref.back();

  AttainabilityResult res;
  res.eps = cfg.eps;
  res.side = cfg.s;

  if (!cfg.force) {
    LambdaConfig lc = cfg.lambda;
    lc.s = cfg.s;
    if (search_lambda(sys, pair, lc).found()) {
      res.status = AttainStatus::Refused;
      res.message = "Lambda set is nonempty for this pair and side";
      return res;
    }
  }

  // Strict side box for tau inside (t2 - eps, t2) or (t2, t2 + eps).
  const double margin = 1e-3 * cfg.eps;
  const double lo = cfg.s < 0 ? t2 - cfg.eps + margin : t2 + margin;
  const double hi = cfg.s < 0 ? t2 - margin : t2 + cfg.eps - margin;
  const int k = static_cast<int>(dirs.size());
  Vec z(k + 1);
  z(0) = t2 + 0.5 * cfg.s * cfg.eps;
  z.tail(k).setZero();
  auto project = [&](Vec v) {
    v(0) = std::clamp(v(0), lo, hi);
    for (int i = 0; i < k; ++i) v(i + 1) = std::clamp(v(i + 1), 0.0, dirs[static_cast<size_t>(i)].alpha_max);
    return v;
  };
  auto residual = [&](const Vec& v) {
    return Vec(endpoint_map(f, pair.control, dirs, v(0), v.tail(k), x1, cfg.cells_per_unit) - target);
  };

  const double tol = cfg.newton_tol * (1.0 + target.norm());
  Vec r = residual(z);
  double rn = r.norm();
  res.best_residual = rn;
  bool converged = rn <= tol;
  int it = 0;
  for (; it < cfg.max_iterations && !converged; ++it) {
    Mat J(f.n(), k + 1);
    for (int c = 0; c <= k; ++c) {
      Vec zp = z;
      double step = cfg.fd_step;
      if (c > 0 && z(c) + step > dirs[static_cast<size_t>(c - 1)].alpha_max) step = -step;
      zp(c) += step;
      J.col(c) = (residual(zp) - r) / step;
    }
    const Vec delta = -J.completeOrthogonalDecomposition().solve(r);
    bool improved = false;
    double lambda = 1.0;
    for (int halving = 0; halving < 30; ++halving, lambda *= 0.5) {
      const Vec cand = project(z + lambda * delta);
      const Vec rc = residual(cand);
      if (rc.norm() < rn) {
        z = cand;
        r = rc;
        rn = rc.norm();
        improved = true;
        break;
      }
    }
    res.best_residual = std::min(res.best_residual, rn);
    converged = rn <= tol;
    if (!improved) break;
  }
  res.iterations = it;
  res.tau = z(0);
  res.alpha = z.tail(k);
  if (!converged) {
    res.status = AttainStatus::NewtonFailed;
    res.endpoint_error = rn;
    res.message = "endpoint equation not solved; best residual " + std::to_string(res.best_residual);
    return res;
  }

  // Chatter the solved relaxed control at a rate whose predicted deviation is <= eps/4.
  const RelaxedControl solved = coarsen(perturbed_control(pair.control, dirs, res.alpha, res.tau));
  double max_speed = 0.0;
  {
    const Trajectory xr = integrate_relaxed(f, solved, x1, mesh_with_density(t1, res.tau, cfg.cells_per_unit));
    const Mesh& cm = solved.mesh();
    for (int i = 0; i <= xr.mesh.cells; ++i) {
      const double t = xr.mesh.node(i);
      for (const Atom& a : solved.cell(cm.cell_of(std::clamp(t, cm.t1, cm.t2)))) {
        max_speed = std::max(max_speed, f.eval(t, xr.samples[static_cast<size_t>(i)], a.u).norm());
      }
    }
  }
  const double hcell = solved.mesh().h();
  const int p = std::max(1, static_cast<int>(std::ceil(4.0 * hcell * max_speed / cfg.eps)));
  res.subdivisions = p;
  res.control = chatter({solved, p});

  // Verification grid: at least four nodes per chattering sub-cycle.
  auto grid_for = [&](double tau) {
    const long want = std::max<long>(static_cast<long>(std::ceil((tau - t1) * cfg.cells_per_unit)),
                                     4L * p * solved.mesh().cells);
    return Mesh(t1, tau, static_cast<int>(std::min<long>(want, 4'000'000L)));
  };
  Trajectory x = integrate_ordinary(f, res.control, x1, grid_for(res.tau));
  res.endpoint_error = (x.back() - target).norm();

  if (res.endpoint_error > cfg.polish_tol) {
    // Bisection on the last piece's duration for the closest approach along its flow.
    OrdinaryControl& u = res.control;
    const double a = u.breakpoints[u.breakpoints.size() - 2];
    const Vec uL = u.values.back();
    const Vec xa = state_at(f, u, x1, a, cfg.cells_per_unit);
    const double max_step = 1.0 / cfg.cells_per_unit;
    auto g = [&](double d) {
      const Vec xd = propagate_piece(f, uL, a, xa, d, max_step);
      return (xd - target).dot(f.eval(a + d, xd, uL));
    };
    const double d_hi = std::max(0.0, hi - a);
    double dl = 0.0, dh = d_hi;
    if (!(g(dl) < 0.0 && g(dh) >= 0.0)) {
      res.status = AttainStatus::PolishFailed;
      res.message = "final piece cannot be adjusted onto the target";
      return res;
    }
    for (int iter = 0; iter < 200 && dh - dl > 1e-15 * (1.0 + a); ++iter) {
      const double mid = 0.5 * (dl + dh);
      (g(mid) < 0.0 ? dl : dh) = mid;
    }
    res.tau = a + dh;
    u.breakpoints.back() = res.tau;
    x = integrate_ordinary(f, u, x1, grid_for(res.tau));
    res.endpoint_error = (x.back() - target).norm();
    if (res.endpoint_error > cfg.polish_tol) {
      res.status = AttainStatus::PolishFailed;
      res.message = "endpoint error after polishing exceeds tolerance";
      return res;
    }
  }

  const bool on_side = cfg.s < 0 ? res.tau < t2 : res.tau > t2;
  if (!on_side || !(std::abs(res.tau - t2) < cfg.eps)) {
    res.status = AttainStatus::PolishFailed;
    res.message = "attainment time left the side interval";
    return res;
  }
  res.tube_deviation = tube_deviation(x, ref, std::min(res.tau, t2));
  if (res.tube_deviation > cfg.eps) {
    res.status = AttainStatus::TubeViolated;
    res.message = "trajectory leaves the eps-tube";
    return res;
  }
  res.status = AttainStatus::Success;
  return res;
}

MinimizingSequence minimizing_sequence(const ControlSystem& sys, const ReferencePair& pair,
                                       const std::vector<VariationDirection>& dirs, int K,
                                       double eps0, const AttainConfig& cfg) {
  if (K < 0) fail(ErrorKind::Config, "sequence length must be >= 0");
  MinimizingSequence out;
  AttainConfig c = cfg;
  c.s = -1;
  for (int k = 0; k < K; ++k) {
    c.eps = eps0 / std::ldexp(1.0, k);
    auto r = probe_attainability(sys, pair, dirs, c);
    const bool ok = r.success();
    const bool increasing = out.results.empty() || r.tau > out.results.back().tau;
    out.results.push_back(std::move(r));
    if (!ok || !increasing) {
      out.complete = false;
      out.message = ok ? "attainment times are not increasing" : "probe " + std::to_string(k) + " failed";
      break;
    }
    // Only the first probe needs the Lambda gate; the pair does not change.
    c.force = true;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Value probe

namespace {

struct SampleOutcome {
  bool hit = false;
  double entry = 0.0;
  double closest_time = 0.0;
  double min_distance = std::numeric_limits<double>::infinity();
};

SampleOutcome probe_sample(const DynamicsSpec& f, const FiniteSet& U, const Vec& x1,
                           const Vec& target, const ValueProbeConfig& cfg, long index) {
  std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed & 0xffffffffu),
                    static_cast<std::uint32_t>(cfg.seed >> 32),
                    static_cast<std::uint32_t>(index & 0xffffffff),
                    static_cast<std::uint32_t>(static_cast<std::uint64_t>(index) >> 32)};
  std::mt19937_64 rng(seq);
  std::uniform_int_distribution<int> n_switch(0, cfg.max_switches);
  std::uniform_real_distribution<double> when(0.0, cfg.horizon);
  std::uniform_int_distribution<size_t> which(0, U.points.size() - 1);

  const int k = n_switch(rng);
  std::vector<double> switches(static_cast<size_t>(k));
  for (auto& s : switches) s = when(rng);
  std::sort(switches.begin(), switches.end());
  std::vector<Vec> values;
  for (int i = 0; i <= k; ++i) values.push_back(U.points[which(rng)]);

  // Step boundaries: integration grid plus the switch times.
  std::vector<double> bounds;
  for (int i = 0; i <= cfg.cells; ++i) bounds.push_back(cfg.horizon * (static_cast<double>(i) / cfg.cells));
  for (double s : switches)
    if (s > 0.0 && s < cfg.horizon) bounds.push_back(s);
  std::sort(bounds.begin(), bounds.end());
  bounds.erase(std::unique(bounds.begin(), bounds.end()), bounds.end());
  auto value_on = [&](size_t step) -> const Vec& {
    const double mid = 0.5 * (bounds[step] + bounds[step + 1]);
    const auto it = std::upper_bound(switches.begin(), switches.end(), mid);
    return values[static_cast<size_t>(it - switches.begin())];
  };
  auto advance = [&](const Vec& u, double t, const Vec& x, double dt) {
    const TimeField fld = [&](double tt, const Vec& xx) { return f.eval(tt, xx, u); };
    return rk4_step(fld, t, x, dt);
  };
  auto dist = [&](const Vec& x) { return (x - target).norm(); };
  auto slope = [&](const Vec& u, double t, const Vec& x) { return (x - target).dot(f.eval(t, x, u)); };

  SampleOutcome out;
  Vec x = x1;
  out.min_distance = dist(x);
  size_t step = 0;
  double t = 0.0;
  bool inside = dist(x) <= cfg.ball;
  if (!inside) {
    for (; step + 1 < bounds.size(); ++step) {
      const Vec& u = value_on(step);
      const double a = bounds[step], b = bounds[step + 1];
      const Vec xb = advance(u, a, x, b - a);
      if (!xb.allFinite()) return out;
      out.min_distance = std::min(out.min_distance, dist(xb));
      if (dist(xb) <= cfg.ball) {
        double lo = a, hi = b;
        for (int it = 0; it < 100 && hi - lo > 1e-15; ++it) {
          const double mid = 0.5 * (lo + hi);
          (dist(advance(u, a, x, mid - a)) <= cfg.ball ? hi : lo) = mid;
        }
        t = hi;
        x = advance(u, a, x, hi - a);
        inside = true;
        break;
      }
      x = xb;
    }
    if (!inside) return out;
  }
  out.hit = true;
  out.entry = t;

  // First local minimum of the distance after entry.
  for (; step + 1 < bounds.size(); ++step) {
    const Vec& u = value_on(step);
    const double b = bounds[step + 1];
    if (t >= b) continue;
    if (slope(u, t, x) >= 0.0) break;
    const Vec xb = advance(u, t, x, b - t);
    if (slope(u, b, xb) >= 0.0) {
      double lo = t, hi = b;
      for (int it = 0; it < 100 && hi - lo > 1e-15; ++it) {
        const double mid = 0.5 * (lo + hi);
        (slope(u, mid, advance(u, t, x, mid - t)) >= 0.0 ? hi : lo) = mid;
      }
      x = advance(u, t, x, hi - t);
      t = hi;
      break;
    }
    x = xb;
    t = b;
  }
  out.closest_time = t;
  out.min_distance = std::min(out.min_distance, dist(x));
  return out;
}

}  // namespace

ValueEstimate value_probe(const ControlSystem& sys, const Vec& x1, const Vec& target,
                          const ValueProbeConfig& cfg) {
  const FiniteSet* U = sys.controls.finite();
  if (!U) fail(ErrorKind::Unsupported, "value probe needs a finite control set");
  require_dim(x1.size(), sys.n(), "initial state");
  require_dim(target.size(), sys.n(), "target");
  if (cfg.samples < 1) fail(ErrorKind::Config, "samples must be >= 1");
  if (!(cfg.ball > 0.0) || !(cfg.horizon > 0.0) || cfg.cells < 1 || cfg.max_switches < 0) {
    fail(ErrorKind::Config, "value probe: ball, horizon and cells must be positive");
  }
  std::vector<SampleOutcome> outcomes(static_cast<size_t>(cfg.samples));
  detail::parallel_for(cfg.samples, 0, [&](long i) {
    outcomes[static_cast<size_t>(i)] = probe_sample(sys.dynamics, *U, x1, target, cfg, i);
  });

  ValueEstimate est;
  est.closest_distance = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < outcomes.size(); ++i) {
    const auto& o = outcomes[i];
    est.closest_distance = std::min(est.closest_distance, o.min_distance);
    if (o.hit && (!est.hit || o.closest_time < est.estimate)) {
      est.hit = true;
      est.estimate = o.closest_time;
      est.entry_time = o.entry;
      est.best_sample = static_cast<long>(i);
    }
  }
  return est;
}

}  // namespace ftc
