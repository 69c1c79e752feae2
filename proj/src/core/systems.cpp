#include <ftc/relaxed.hpp>
#include <ftc/systems.hpp>

#include <cmath>
#include <sstream>

namespace ftc {

namespace {

double ipow(double base, int e) {
  double out = 1.0;
  for (int k = 0; k < e; ++k) out *= base;
  return out;
}

// Value of the monomial without the coefficient; optionally skips one x factor
// (for differentiation) by lowering its exponent by one.
double monomial(const PolyTerm& term, double t, const Vec& x, const Vec& u, int lower_x = -1) {
  double v = ipow(t, term.t_exponent);
  for (size_t i = 0; i < term.x_exponents.size(); ++i) {
    int e = term.x_exponents[i];
    if (static_cast<int>(i) == lower_x) --e;
    v *= ipow(x[static_cast<Eigen::Index>(i)], e);
  }
  for (size_t j = 0; j < term.u_exponents.size(); ++j) {
    v *= ipow(u[static_cast<Eigen::Index>(j)], term.u_exponents[j]);
  }
  return v;
}

int u_degree(const PolyTerm& term) {
  int d = 0;
  for (int e : term.u_exponents) d += e;
  return d;
}

}  // namespace

DynamicsSpec::DynamicsSpec(int n, int r, std::vector<std::vector<PolyTerm>> components)
    : n_(n), r_(r), components_(std::move(components)) {
  if (n_ < 1 || r_ < 1) fail(ErrorKind::Input, "dynamics: n and r must be positive");
  require_dim(static_cast<Eigen::Index>(components_.size()), n_, "dynamics components");
  for (const auto& comp : components_) {
    for (const auto& term : comp) {
      require_dim(static_cast<Eigen::Index>(term.x_exponents.size()), n_, "term x exponents");
      require_dim(static_cast<Eigen::Index>(term.u_exponents.size()), r_, "term u exponents");
      if (!std::isfinite(term.coeff)) fail(ErrorKind::Input, "dynamics: non-finite coefficient");
      if (term.t_exponent < 0) fail(ErrorKind::Input, "dynamics: negative exponent");
      for (int e : term.x_exponents)
        if (e < 0) fail(ErrorKind::Input, "dynamics: negative exponent");
      for (int e : term.u_exponents)
        if (e < 0) fail(ErrorKind::Input, "dynamics: negative exponent");
      if (u_degree(term) > 1) affine_ = false;
    }
  }
}

Vec DynamicsSpec::eval(double t, const Vec& x, const Vec& u) const {
  require_dim(x.size(), n_, "eval_dynamics state");
  require_dim(u.size(), r_, "eval_dynamics control");
  Vec out = Vec::Zero(n_);
  for (int i = 0; i < n_; ++i) {
    double acc = 0.0;
    for (const auto& term : components_[static_cast<size_t>(i)]) {
      acc += term.coeff * monomial(term, t, x, u);
    }
    out[i] = acc;
  }
  return out;
}

Mat DynamicsSpec::jacobian(double t, const Vec& x, const Vec& u) const {
  require_dim(x.size(), n_, "eval_jacobian state");
  require_dim(u.size(), r_, "eval_jacobian control");
  Mat out = Mat::Zero(n_, n_);
  for (int i = 0; i < n_; ++i) {
    for (const auto& term : components_[static_cast<size_t>(i)]) {
      for (int k = 0; k < n_; ++k) {
        const int e = term.x_exponents[static_cast<size_t>(k)];
        if (e == 0) continue;
        out(i, k) += term.coeff * e * monomial(term, t, x, u, k);
      }
    }
  }
  return out;
}

Mat DynamicsSpec::affine_split(double t, const Vec& x) const {
  if (!affine_) fail(ErrorKind::Unsupported, "dynamics are not control-affine");
  require_dim(x.size(), n_, "affine_split state");
  Mat g = Mat::Zero(n_, r_ + 1);
  const Vec ones = Vec::Ones(r_);
  for (int i = 0; i < n_; ++i) {
    for (const auto& term : components_[static_cast<size_t>(i)]) {
      int col = 0;
      for (int j = 0; j < r_; ++j) {
        if (term.u_exponents[static_cast<size_t>(j)] == 1) col = j + 1;
      }
      // u factors evaluate to 1 at u = ones, leaving the state/time part.
      g(i, col) += term.coeff * monomial(term, t, x, ones);
    }
  }
  return g;
}

Vec eval_dynamics(const DynamicsSpec& sys, double t, const Vec& x, const Vec& u) {
  return sys.eval(t, x, u);
}

Mat eval_jacobian(const DynamicsSpec& sys, double t, const Vec& x, const Vec& u) {
  return sys.jacobian(t, x, u);
}

// ---------------------------------------------------------------------------
// ControlSet

ControlSet::ControlSet(Variant v) : v_(std::move(v)) {
  if (const auto* f = finite()) {
    if (f->points.empty()) fail(ErrorKind::Input, "finite control set is empty");
    for (const auto& p : f->points) require_dim(p.size(), f->points.front().size(), "control point");
  } else if (const auto* b = box()) {
    require_dim(b->upper.size(), b->lower.size(), "box bounds");
    for (Eigen::Index j = 0; j < b->lower.size(); ++j) {
      if (b->lower[j] > b->upper[j]) fail(ErrorKind::Input, "box lower bound exceeds upper bound");
    }
  } else if (const auto* s = sphere()) {
    if (s->dim < 1) fail(ErrorKind::Input, "unit sphere dimension must be positive");
  }
}

int ControlSet::dim() const {
  if (const auto* f = finite()) return static_cast<int>(f->points.front().size());
  if (const auto* b = box()) return static_cast<int>(b->lower.size());
  return sphere()->dim;
}

bool ControlSet::contains(const Vec& u, double tol) const {
  if (u.size() != dim()) return false;
  if (const auto* f = finite()) {
    for (const auto& p : f->points) {
      if (p == u) return true;
    }
    return false;
  }
  if (const auto* b = box()) {
    for (Eigen::Index j = 0; j < u.size(); ++j) {
      if (u[j] < b->lower[j] - tol || u[j] > b->upper[j] + tol) return false;
    }
    return true;
  }
  return std::abs(u.norm() - 1.0) <= tol;
}

std::string ControlSet::describe() const {
  std::ostringstream os;
  if (const auto* f = finite()) {
    os << "finite{";
    for (size_t k = 0; k < f->points.size(); ++k) {
      if (k) os << ", ";
      os << "(" << f->points[k].transpose() << ")";
    }
    os << "}";
  } else if (const auto* b = box()) {
    os << "box[" << b->lower.transpose() << " ; " << b->upper.transpose() << "]";
  } else {
    os << "unit_sphere(" << sphere()->dim << ")";
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Scenario registry

const ReferencePairSpec& Scenario::pair(const std::string& name) const {
  for (const auto& p : reference_pairs)
    if (p.name == name) return p;
  fail(ErrorKind::Lookup, "scenario '" + id + "' has no reference pair '" + name + "'");
}

const ControlLawSpec& Scenario::control_law(const std::string& name) const {
  for (const auto& c : control_laws)
    if (c.name == name) return c;
  fail(ErrorKind::Lookup, "scenario '" + id + "' has no control '" + name + "'");
}

namespace {

Vec vec(std::initializer_list<double> v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index k = 0;
  for (double d : v) out[k++] = d;
  return out;
}

PolyTerm term(double c, std::vector<int> xe, std::vector<int> ue, int te = 0) {
  return PolyTerm{c, std::move(xe), std::move(ue), te};
}

FiniteSet finite_points(std::initializer_list<double> scalars) {
  FiniteSet f;
  for (double s : scalars) f.points.push_back(vec({s}));
  return f;
}

// Scalar x' = u.
DynamicsSpec scalar_integrator() { return DynamicsSpec(1, 1, {{term(1.0, {0}, {1})}}); }

ReferencePairSpec constant_pair(std::string name, AtomList atoms, std::function<Vec(double)> traj,
                                std::vector<DirectionTemplate> dirs = {}) {
  ReferencePairSpec p;
  p.name = std::move(name);
  p.control = [atoms](const Mesh& m) { return RelaxedControl::constant(m, atoms); };
  p.trajectory = std::move(traj);
  p.directions = std::move(dirs);
  return p;
}

DirectionTemplate shift(std::string name, double mass, const Vec& from, const Vec& to) {
  return DirectionTemplate{std::move(name), {{-mass, from}, {mass, to}}};
}

Scenario frozen() {
  Scenario s;
  s.id = "frozen";
  s.system.dynamics = DynamicsSpec(2, 1, {{}, {}});
  s.system.controls = ControlSet(finite_points({-1.0, 0.0, 1.0}));
  s.x1 = vec({1.0, 2.0});
  const Vec x1 = s.x1;
  s.reference_pairs.push_back(
      constant_pair("rest", {{1.0, vec({0.0})}}, [x1](double) { return x1; }));
  s.control_laws.push_back({"zero", [](double) { return vec({0.0}); }});
  return s;
}

Scenario single_integrator() {
  Scenario s;
  s.id = "single_integrator";
  s.system.dynamics = scalar_integrator();
  s.system.controls = ControlSet(finite_points({-1.0, 1.0}));
  s.x1 = vec({0.0});
  s.reference_pairs.push_back(constant_pair("plus", {{1.0, vec({1.0})}},
                                            [](double t) { return vec({t}); }));
  s.control_laws.push_back({"plus", [](double) { return vec({1.0}); }});
  s.control_laws.push_back({"minus", [](double) { return vec({-1.0}); }});
  return s;
}

Scenario balanced_switch() {
  Scenario s;
  s.id = "balanced_switch";
  s.system.dynamics = scalar_integrator();
  s.system.controls = ControlSet(finite_points({-1.0, 1.0}));
  s.x1 = vec({0.0});
  auto p = constant_pair("balanced", {{0.5, vec({-1.0})}, {0.5, vec({1.0})}},
                         [](double) { return vec({0.0}); },
                         {shift("shift_up", 0.5, vec({-1.0}), vec({1.0})),
                          shift("shift_down", 0.5, vec({1.0}), vec({-1.0}))});
  // On the unit sphere {-1, 1}: M = |psi| = 1 while <psi, xhat'> = 0.
  p.analytic_min_score = 1.0;
  s.reference_pairs.push_back(std::move(p));
  s.control_laws.push_back({"plus", [](double) { return vec({1.0}); }});
  return s;
}

Scenario ramp() {
  Scenario s;
  s.id = "ramp";
  s.system.dynamics = scalar_integrator();
  s.system.controls = ControlSet(finite_points({-1.0, 0.0, 1.0}));
  s.x1 = vec({0.0});
  s.reference_pairs.push_back(constant_pair("ramp", {{1.0, vec({1.0})}},
                                            [](double t) { return vec({t}); },
                                            {shift("slow", 1.0, vec({1.0}), vec({0.0})),
                                             shift("reverse", 1.0, vec({1.0}), vec({-1.0}))}));
  s.control_laws.push_back({"plus", [](double) { return vec({1.0}); }});
  return s;
}

// x1' = u, x2' = 1 - u^2 - x1^2, U = {-1, 0, 1}.
Scenario paper_example_31(const ScenarioParams& params) {
  Scenario s;
  s.id = "paper_example_31";
  s.system.dynamics = DynamicsSpec(
      2, 1,
      {{term(1.0, {0, 0}, {1})},
       {term(1.0, {0, 0}, {0}), term(-1.0, {0, 0}, {2}), term(-1.0, {2, 0}, {0})}});
  s.system.controls = ControlSet(finite_points({-1.0, 0.0, 1.0}));
  s.x1 = vec({0.0, 0.0});
  auto line = [](double t) { return vec({0.0, t}); };

  s.reference_pairs.push_back(
      constant_pair("paper", {{0.5, vec({-1.0})}, {0.5, vec({1.0})}}, line,
                    {shift("shift_up", 0.5, vec({-1.0}), vec({1.0})),
                     shift("shift_down", 0.5, vec({1.0}), vec({-1.0}))}));
  s.reference_pairs.push_back(constant_pair("corrected", {{1.0, vec({0.0})}}, line,
                                            {shift("toward_plus", 1.0, vec({0.0}), vec({1.0})),
                                             shift("toward_minus", 1.0, vec({0.0}), vec({-1.0}))}));

  if (params.j < 2) fail(ErrorKind::Config, "scenario parameter j must be >= 2");
  const double j = params.j;
  ReferencePairSpec mu_j =
      constant_pair("mu_j", {{1.0 - 1.0 / j, vec({-1.0 / j})}, {1.0 / j, vec({1.0})}}, nullptr);
  mu_j.atoms_in_control_set = false;
  s.reference_pairs.push_back(std::move(mu_j));

  s.control_laws.push_back({"zero", [](double) { return vec({0.0}); }});
  return s;
}

// Nonholonomic integrator x1' = u1, x2' = u2, x3' = x1 u2 - x2 u1 on the unit circle.
Scenario brockett(const ScenarioParams& params) {
  Scenario s;
  s.id = "brockett";
  s.system.dynamics = DynamicsSpec(3, 2,
                                   {{term(1.0, {0, 0, 0}, {1, 0})},
                                    {term(1.0, {0, 0, 0}, {0, 1})},
                                    {term(1.0, {1, 0, 0}, {0, 1}), term(-1.0, {0, 1, 0}, {1, 0})}});
  s.system.controls = ControlSet(UnitSphere{2});
  s.x1 = vec({0.0, 0.0, 0.0});

  const Vec e1 = vec({1.0, 0.0}), e2 = vec({0.0, 1.0});
  s.reference_pairs.push_back(constant_pair(
      "paper", {{0.25, e1}, {0.25, Vec(-e1)}, {0.25, e2}, {0.25, Vec(-e2)}},
      [](double t) { return vec({0.0, 0.0, t}); },
      {shift("toward_e1", 0.25, -e1, e1), shift("toward_minus_e1", 0.25, e1, -e1),
       shift("toward_e2", 0.25, -e2, e2), shift("toward_minus_e2", 0.25, e2, -e2)}));

  const double omega = params.omega;
  if (!std::isfinite(omega)) fail(ErrorKind::Config, "scenario parameter omega must be finite");
  auto law = [omega](double t) { return vec({std::cos(omega * t), std::sin(omega * t)}); };

  ReferencePairSpec loop;
  loop.name = "loop";
  loop.control = [law](const Mesh& m) {
    std::vector<AtomList> cells;
    cells.reserve(static_cast<size_t>(m.cells));
    for (int k = 0; k < m.cells; ++k) {
      cells.push_back({{1.0, law(0.5 * (m.node(k) + m.node(k + 1)))}});
    }
    return RelaxedControl(m, std::move(cells));
  };
  s.reference_pairs.push_back(std::move(loop));

  s.control_laws.push_back({"loop", law});
  return s;
}

}  // namespace

std::vector<std::string> scenario_ids() {
  return {"frozen", "single_integrator", "balanced_switch", "ramp", "paper_example_31", "brockett"};
}

Scenario get_scenario(const std::string& id, const ScenarioParams& params) {
  if (id == "frozen") return frozen();
  if (id == "single_integrator") return single_integrator();
  if (id == "balanced_switch") return balanced_switch();
  if (id == "ramp") return ramp();
  if (id == "paper_example_31") return paper_example_31(params);
  if (id == "brockett") return brockett(params);
  fail(ErrorKind::Lookup, "unknown scenario '" + id + "'");
}

}  // namespace ftc
