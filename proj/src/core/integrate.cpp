#include <ftc/integrate.hpp>

#include <algorithm>
#include <cmath>
#include <string>

namespace ftc {

namespace {

template <class State, class F>
State rk4(F&& f, double t, const State& x, double h) {
  const State k1 = f(t, x);
  const State k2 = f(t + 0.5 * h, State(x + (0.5 * h) * k1));
  const State k3 = f(t + 0.5 * h, State(x + (0.5 * h) * k2));
  const State k4 = f(t + h, State(x + h * k3));
  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// Sub-interval boundaries of [a, b] after splitting at the breakpoints inside it.
void split_interval(double a, double b, const std::vector<double>& bps, std::vector<double>& out) {
  out.clear();
  out.push_back(a);
  const double eps = 1e-12 * (1.0 + std::max(std::abs(a), std::abs(b)));
  auto it = std::upper_bound(bps.begin(), bps.end(), a);
  for (; it != bps.end() && *it < b; ++it) {
    if (*it - a > eps && b - *it > eps) out.push_back(*it);
  }
  out.push_back(b);
}

void check_finite(const Vec& x, double t) {
  if (!x.allFinite()) {
    throw DivergenceError(t, "integration diverged: non-finite state at t=" + std::to_string(t));
  }
}

template <class FieldFor>
Trajectory integrate_pieces(const Vec& x1, const Mesh& mesh, const std::vector<double>& bps,
                            FieldFor&& field_for) {
  Trajectory tr;
  tr.mesh = mesh;
  tr.samples.reserve(static_cast<size_t>(mesh.nodes()));
  tr.samples.push_back(x1);
  check_finite(x1, mesh.t1);
  Vec x = x1;
  std::vector<double> sub;
  for (int i = 0; i < mesh.cells; ++i) {
    split_interval(mesh.node(i), mesh.node(i + 1), bps, sub);
    for (size_t k = 0; k + 1 < sub.size(); ++k) {
      const double c = sub[k], d = sub[k + 1];
      auto f = field_for(0.5 * (c + d));
      x = rk4<Vec>(f, c, x, d - c);
      check_finite(x, d);
    }
    tr.samples.push_back(x);
  }
  return tr;
}

std::vector<double> mesh_nodes(const Mesh& m) {
  std::vector<double> v;
  v.reserve(static_cast<size_t>(m.nodes()));
  for (int i = 0; i <= m.cells; ++i) v.push_back(m.node(i));
  return v;
}

void require_cover(const Mesh& inner, double a, double b, const char* what) {
  const double eps = 1e-12 * (1.0 + std::abs(inner.t1) + std::abs(inner.t2));
  if (a > inner.t1 + eps || b < inner.t2 - eps) {
    fail(ErrorKind::Input, std::string(what) + " does not cover the integration interval");
  }
}

// Backward sweep of S' = -S A(t) from S(t2) = terminal, stored forward.
template <class State>
std::vector<State> adjoint_sweep(const DynamicsSpec& sys, const Trajectory& ref,
                                 const RelaxedControl& mu, const State& terminal) {
  const Mesh& m = ref.mesh;
  require_cover(m, mu.mesh().t1, mu.mesh().t2, "relaxed control");
  if (static_cast<int>(ref.samples.size()) != m.nodes()) {
    fail(ErrorKind::Input, "adjoint: trajectory sample count does not match mesh");
  }
  const std::vector<double> bps = mesh_nodes(mu.mesh());
  const double T = m.t2;
  std::vector<State> out(static_cast<size_t>(m.nodes()));
  State S = terminal;
  out.back() = S;
  std::vector<double> sub;
  for (int i = m.cells - 1; i >= 0; --i) {
    const double a = m.node(i), b = m.node(i + 1);
    const Vec& xa = ref.samples[static_cast<size_t>(i)];
    const Vec& xb = ref.samples[static_cast<size_t>(i + 1)];
    split_interval(a, b, bps, sub);
    for (size_t k = sub.size() - 1; k > 0; --k) {
      const double c = sub[k - 1], d = sub[k];
      const AtomList& atoms = mu.cell(mu.mesh().cell_of(0.5 * (c + d)));
      // Reversed time s = T - t turns the backward sweep into a forward one.
      auto f = [&](double s, const State& Y) -> State {
        const double t = T - s;
        const double w = (t - a) / (b - a);
        const Vec x = (1.0 - w) * xa + w * xb;
        return Y * atoms_jacobian(sys, atoms, t, x);
      };
      S = rk4<State>(f, T - d, S, d - c);
      if (!S.allFinite()) {
        throw DivergenceError(c, "adjoint integration diverged at t=" + std::to_string(c));
      }
    }
    out[static_cast<size_t>(i)] = S;
  }
  return out;
}

}  // namespace

Vec rk4_step(const TimeField& f, double t, const Vec& x, double h) { return rk4<Vec>(f, t, x, h); }

Trajectory integrate_field(const TimeField& f, const Vec& x1, const Mesh& mesh) {
  return integrate_pieces(x1, mesh, {}, [&](double) { return std::cref(f); });
}

Trajectory integrate_ordinary(const DynamicsSpec& sys, const OrdinaryControl& u, const Vec& x1,
                              const Mesh& mesh) {
  require_dim(x1.size(), sys.n(), "initial state");
  u.validate(nullptr);
  require_cover(mesh, u.start(), u.end(), "ordinary control");
  for (const auto& v : u.values) require_dim(v.size(), sys.r(), "control value");
  return integrate_pieces(x1, mesh, u.breakpoints, [&](double tmid) {
    const Vec& val = u.at(std::clamp(tmid, u.start(), u.end()));
    return [&sys, &val](double t, const Vec& x) { return sys.eval(t, x, val); };
  });
}

Trajectory integrate_relaxed(const DynamicsSpec& sys, const RelaxedControl& mu, const Vec& x1,
                             const Mesh& mesh) {
  require_dim(x1.size(), sys.n(), "initial state");
  require_cover(mesh, mu.mesh().t1, mu.mesh().t2, "relaxed control");
  const std::vector<double> bps = mesh_nodes(mu.mesh());
  return integrate_pieces(x1, mesh, bps, [&](double tmid) {
    const AtomList& atoms = mu.cell(mu.mesh().cell_of(std::clamp(tmid, mu.mesh().t1, mu.mesh().t2)));
    return [&sys, &atoms](double t, const Vec& x) { return atoms_field(sys, atoms, t, x); };
  });
}

Costate integrate_adjoint(const DynamicsSpec& sys, const Trajectory& ref, const RelaxedControl& mu,
                          const RowVec& psi_terminal) {
  require_dim(psi_terminal.size(), sys.n(), "terminal covector");
  Costate c;
  c.mesh = ref.mesh;
  c.samples = adjoint_sweep<RowVec>(sys, ref, mu, psi_terminal);
  return c;
}

FundamentalCostate fundamental_costate(const DynamicsSpec& sys, const Trajectory& ref,
                                       const RelaxedControl& mu) {
  FundamentalCostate phi;
  phi.mesh = ref.mesh;
  phi.samples = adjoint_sweep<Mat>(sys, ref, mu, Mat::Identity(sys.n(), sys.n()));
  return phi;
}

}  // namespace ftc
