#pragma once

#include <ftc/common.hpp>

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace ftc {

/// One monomial coeff * t^t_exp * prod x_i^a_i * prod u_j^b_j.
struct PolyTerm {
  double coeff = 0.0;
  std::vector<int> x_exponents;
  std::vector<int> u_exponents;
  int t_exponent = 0;
};

/// Polynomial right-hand side f(t, x, u) with an exact state Jacobian.
class DynamicsSpec {
 public:
  DynamicsSpec() = default;
  DynamicsSpec(int n, int r, std::vector<std::vector<PolyTerm>> components);

  int n() const { return n_; }
  int r() const { return r_; }
  const std::vector<std::vector<PolyTerm>>& components() const { return components_; }

  Vec eval(double t, const Vec& x, const Vec& u) const;
  Mat jacobian(double t, const Vec& x, const Vec& u) const;

  /// True when every term has total degree <= 1 in u.
  bool control_affine() const { return affine_; }

  /// Columns g0, g1..gr of f = g0 + sum_j u_j g_j. Requires control_affine().
  Mat affine_split(double t, const Vec& x) const;

 private:
  int n_ = 0;
  int r_ = 0;
  std::vector<std::vector<PolyTerm>> components_;
  bool affine_ = true;
};

Vec eval_dynamics(const DynamicsSpec& sys, double t, const Vec& x, const Vec& u);
Mat eval_jacobian(const DynamicsSpec& sys, double t, const Vec& x, const Vec& u);

struct FiniteSet {
  std::vector<Vec> points;
};
struct UnitSphere {
  int dim = 0;
};
struct Box {
  Vec lower;
  Vec upper;
};

class ControlSet {
 public:
  using Variant = std::variant<FiniteSet, UnitSphere, Box>;

  ControlSet() = default;
  explicit ControlSet(Variant v);

  const Variant& variant() const { return v_; }
  int dim() const;
  bool contains(const Vec& u, double tol = 1e-12) const;
  const FiniteSet* finite() const { return std::get_if<FiniteSet>(&v_); }
  const UnitSphere* sphere() const { return std::get_if<UnitSphere>(&v_); }
  const Box* box() const { return std::get_if<Box>(&v_); }
  std::string describe() const;

 private:
  Variant v_;
};

struct ControlSystem {
  DynamicsSpec dynamics;
  ControlSet controls;

  int n() const { return dynamics.n(); }
  int r() const { return dynamics.r(); }
};

struct Mesh;
class RelaxedControl;
struct Atom;

/// Time-invariant signed weight shift used to perturb a reference measure.
struct DirectionTemplate {
  std::string name;
  std::vector<std::pair<double, Vec>> deltas;  // (weight delta, atom point)
};

/// A reference (trajectory, relaxed control) pair as stored in the registry.
struct ReferencePairSpec {
  std::string name;
  /// Builds the reference measure on the given mesh over [t1, t2_hat].
  std::function<RelaxedControl(const Mesh&)> control;
  /// Closed-form reference trajectory; empty means "integrate the control".
  std::function<Vec(double)> trajectory;
  /// False when the atoms deliberately leave U (the j-family of the two-state example).
  bool atoms_in_control_set = true;
  std::vector<DirectionTemplate> directions;
  /// Analytic lower bound on the scan score over the unit sphere (s = -1), if known.
  std::optional<double> analytic_min_score;
};

/// Named open-loop control law u(t), used for ordinary simulations.
struct ControlLawSpec {
  std::string name;
  std::function<Vec(double)> law;
};

struct ScenarioParams {
  double omega = 6.283185307179586;
  int j = 2;
};

struct Scenario {
  std::string id;
  ControlSystem system;
  double t1 = 0.0;
  double t2_hat = 1.0;
  Vec x1;
  std::vector<ReferencePairSpec> reference_pairs;
  std::vector<ControlLawSpec> control_laws;

  const ReferencePairSpec& pair(const std::string& name) const;
  const ControlLawSpec& control_law(const std::string& name) const;
};

Scenario get_scenario(const std::string& id, const ScenarioParams& params = {});
std::vector<std::string> scenario_ids();

}  // namespace ftc
