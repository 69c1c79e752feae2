#pragma once

#include <ftc/common.hpp>
#include <ftc/systems.hpp>
#include <ftc/trajectory.hpp>

#include <vector>

namespace ftc {

struct Atom {
  double w = 0.0;
  Vec u;
};

using AtomList = std::vector<Atom>;

/// Finitely supported generalized control, constant in t on each mesh cell.
class RelaxedControl {
 public:
  RelaxedControl() = default;
  RelaxedControl(Mesh mesh, std::vector<AtomList> cells);

  /// Same atoms on every cell.
  static RelaxedControl constant(const Mesh& mesh, const AtomList& atoms);

  const Mesh& mesh() const { return mesh_; }
  const std::vector<AtomList>& cells() const { return cells_; }
  const AtomList& cell(int k) const { return cells_.at(static_cast<size_t>(k)); }
  const AtomList& at(double t) const;

  /// Throws Input/Domain errors on broken weights, atom count or membership.
  /// Pass `controls == nullptr` to skip the membership test.
  void validate(int n, int r, const ControlSet* controls) const;

  bool single_atom() const;

 private:
  Mesh mesh_;
  std::vector<AtomList> cells_;
};

/// Piecewise-constant ordinary control: values[k] on [breakpoints[k], breakpoints[k+1]).
struct OrdinaryControl {
  std::vector<double> breakpoints;
  std::vector<Vec> values;

  int pieces() const { return static_cast<int>(values.size()); }
  double start() const { return breakpoints.front(); }
  double end() const { return breakpoints.back(); }
  int piece_of(double t) const;
  const Vec& at(double t) const { return values[static_cast<size_t>(piece_of(t))]; }
  void validate(const ControlSet* controls) const;

  static OrdinaryControl constant(double t1, double t2, const Vec& u);
  /// Samples `law` at piece midpoints on a uniform partition.
  static OrdinaryControl sampled(double t1, double t2, int pieces,
                                 const std::function<Vec(double)>& law);
};

/// Combined field sum_k w_k f(t, x, u_k) of one atom list.
Vec atoms_field(const DynamicsSpec& sys, const AtomList& atoms, double t, const Vec& x);
Mat atoms_jacobian(const DynamicsSpec& sys, const AtomList& atoms, double t, const Vec& x);

Vec relaxed_field(const DynamicsSpec& sys, const RelaxedControl& mu, double t, const Vec& x);
Mat relaxed_jacobian(const DynamicsSpec& sys, const RelaxedControl& mu, double t, const Vec& x);

struct AdmissibilityReport {
  double sup_residual = 0.0;
  std::vector<double> residual_profile;
  bool pass = false;
  double tol = 0.0;
};

/// x' at every node: centered inside, one-sided at the ends.
std::vector<Vec> finite_difference_velocities(const Trajectory& ref);

AdmissibilityReport audit_admissibility(const DynamicsSpec& sys, const Trajectory& ref,
                                        const RelaxedControl& mu, double tol);

}  // namespace ftc
