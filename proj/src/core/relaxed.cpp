#include <ftc/relaxed.hpp>

#include <algorithm>
#include <cmath>

namespace ftc {

// ---------------------------------------------------------------------------
// Mesh / Trajectory

Mesh::Mesh(double t1_, double t2_, int cells_) : t1(t1_), t2(t2_), cells(cells_) {
  if (!(t1 < t2)) fail(ErrorKind::Domain, "mesh: t1 must be < t2");
  if (cells < 1) fail(ErrorKind::Domain, "mesh: at least one cell required");
}

double Mesh::node(int i) const {
  if (i >= cells) return t2;
  return t1 + (t2 - t1) * (static_cast<double>(i) / cells);
}

int Mesh::cell_of(double t) const {
  if (!contains(t)) fail(ErrorKind::Domain, "time outside mesh span");
  int k = static_cast<int>(std::floor((t - t1) / h()));
  k = std::clamp(k, 0, cells - 1);
  // Fix floor() round-off so node hits land in the later cell.
  while (k + 1 < cells && t >= node(k + 1)) ++k;
  while (k > 0 && t < node(k)) --k;
  return k;
}

Mesh mesh_with_density(double t1, double t2, int per_unit) {
  if (per_unit < 1) fail(ErrorKind::Config, "cells per unit time must be positive");
  const int cells = std::max(1, static_cast<int>(std::ceil((t2 - t1) * per_unit - 1e-9)));
  return Mesh(t1, t2, cells);
}

Vec Trajectory::at(double t) const {
  if (t <= mesh.t1) return samples.front();
  if (t >= mesh.t2) return samples.back();
  const int k = mesh.cell_of(t);
  const double a = mesh.node(k), b = mesh.node(k + 1);
  const double s = (t - a) / (b - a);
  return (1.0 - s) * samples[static_cast<size_t>(k)] + s * samples[static_cast<size_t>(k + 1)];
}

// ---------------------------------------------------------------------------
// RelaxedControl

RelaxedControl::RelaxedControl(Mesh mesh, std::vector<AtomList> cells)
    : mesh_(mesh), cells_(std::move(cells)) {
  require_dim(static_cast<Eigen::Index>(cells_.size()), mesh_.cells, "relaxed control cells");
  for (const auto& c : cells_) {
    if (c.empty()) fail(ErrorKind::Input, "relaxed control: empty cell");
  }
}

RelaxedControl RelaxedControl::constant(const Mesh& mesh, const AtomList& atoms) {
  return RelaxedControl(mesh, std::vector<AtomList>(static_cast<size_t>(mesh.cells), atoms));
}

const AtomList& RelaxedControl::at(double t) const { return cell(mesh_.cell_of(t)); }

void RelaxedControl::validate(int n, int r, const ControlSet* controls) const {
  for (size_t k = 0; k < cells_.size(); ++k) {
    const auto& atoms = cells_[k];
    if (static_cast<int>(atoms.size()) > n + 1) {
      fail(ErrorKind::Input, "relaxed control: more than n+1 atoms in cell " + std::to_string(k));
    }
    double sum = 0.0;
    for (const auto& a : atoms) {
      require_dim(a.u.size(), r, "atom point");
      if (!(a.w >= 0.0 && a.w <= 1.0)) {
        fail(ErrorKind::Domain, "relaxed control: weight outside [0,1] in cell " + std::to_string(k));
      }
      if (controls && !controls->contains(a.u, 1e-12)) {
        fail(ErrorKind::Domain, "relaxed control: atom outside the control set in cell " +
                                    std::to_string(k));
      }
      sum += a.w;
    }
    if (std::abs(sum - 1.0) > 1e-12) {
      fail(ErrorKind::Domain, "relaxed control: weights do not sum to 1 in cell " + std::to_string(k));
    }
  }
}

bool RelaxedControl::single_atom() const {
  return std::all_of(cells_.begin(), cells_.end(), [](const AtomList& c) {
    return std::count_if(c.begin(), c.end(), [](const Atom& a) { return a.w > 0.0; }) <= 1;
  });
}

// ---------------------------------------------------------------------------
// OrdinaryControl

int OrdinaryControl::piece_of(double t) const {
  if (breakpoints.size() < 2 || t < breakpoints.front() || t > breakpoints.back()) {
    fail(ErrorKind::Domain, "time outside ordinary control span");
  }
  auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), t);
  int k = static_cast<int>(it - breakpoints.begin()) - 1;
  return std::clamp(k, 0, pieces() - 1);
}

void OrdinaryControl::validate(const ControlSet* controls) const {
  if (breakpoints.size() != values.size() + 1 || values.empty()) {
    fail(ErrorKind::Input, "ordinary control: breakpoints/values size mismatch");
  }
  for (size_t k = 1; k < breakpoints.size(); ++k) {
    if (!(breakpoints[k] > breakpoints[k - 1])) {
      fail(ErrorKind::Input, "ordinary control: breakpoints not strictly increasing");
    }
  }
  if (controls) {
    for (const auto& v : values) {
      if (!controls->contains(v, 1e-12)) fail(ErrorKind::Domain, "ordinary control: value outside U");
    }
  }
}

OrdinaryControl OrdinaryControl::constant(double t1, double t2, const Vec& u) {
  return OrdinaryControl{{t1, t2}, {u}};
}

OrdinaryControl OrdinaryControl::sampled(double t1, double t2, int pieces,
                                         const std::function<Vec(double)>& law) {
  const Mesh m(t1, t2, pieces);
  OrdinaryControl c;
  c.breakpoints.reserve(static_cast<size_t>(pieces) + 1);
  for (int k = 0; k <= pieces; ++k) c.breakpoints.push_back(m.node(k));
  for (int k = 0; k < pieces; ++k) c.values.push_back(law(0.5 * (m.node(k) + m.node(k + 1))));
  return c;
}

// ---------------------------------------------------------------------------
// Relaxed fields

Vec atoms_field(const DynamicsSpec& sys, const AtomList& atoms, double t, const Vec& x) {
  if (atoms.size() == 1 && atoms.front().w == 1.0) return sys.eval(t, x, atoms.front().u);
  Vec out = Vec::Zero(sys.n());
  for (const auto& a : atoms) {
    if (a.w == 0.0) continue;
    out += a.w * sys.eval(t, x, a.u);
  }
  return out;
}

Mat atoms_jacobian(const DynamicsSpec& sys, const AtomList& atoms, double t, const Vec& x) {
  if (atoms.size() == 1 && atoms.front().w == 1.0) return sys.jacobian(t, x, atoms.front().u);
  Mat out = Mat::Zero(sys.n(), sys.n());
  for (const auto& a : atoms) {
    if (a.w == 0.0) continue;
    out += a.w * sys.jacobian(t, x, a.u);
  }
  return out;
}

Vec relaxed_field(const DynamicsSpec& sys, const RelaxedControl& mu, double t, const Vec& x) {
  return atoms_field(sys, mu.at(t), t, x);
}

Mat relaxed_jacobian(const DynamicsSpec& sys, const RelaxedControl& mu, double t, const Vec& x) {
  return atoms_jacobian(sys, mu.at(t), t, x);
}

std::vector<Vec> finite_difference_velocities(const Trajectory& ref) {
  const Mesh& m = ref.mesh;
  const int N = m.cells;
  const auto& xs = ref.samples;
  std::vector<Vec> vel(xs.size());
  for (int i = 0; i <= N; ++i) {
    const auto ui = static_cast<size_t>(i);
    if (i == 0) {
      vel[ui] = (xs[1] - xs[0]) / m.h();
    } else if (i == N) {
      vel[ui] = (xs[ui] - xs[ui - 1]) / m.h();
    } else {
      vel[ui] = (xs[ui + 1] - xs[ui - 1]) / (m.node(i + 1) - m.node(i - 1));
    }
  }
  return vel;
}

AdmissibilityReport audit_admissibility(const DynamicsSpec& sys, const Trajectory& ref,
                                        const RelaxedControl& mu, double tol) {
  if (!(ref.mesh == mu.mesh())) fail(ErrorKind::Input, "audit: trajectory and control meshes differ");
  if (static_cast<int>(ref.samples.size()) != ref.mesh.nodes()) {
    fail(ErrorKind::Input, "audit: trajectory sample count does not match mesh");
  }
  const Mesh& m = ref.mesh;
  const int N = m.cells;
  AdmissibilityReport rep;
  rep.tol = tol;
  rep.residual_profile.resize(static_cast<size_t>(N) + 1);
  const auto vel = finite_difference_velocities(ref);
  for (int i = 0; i <= N; ++i) {
    const auto& xs = ref.samples;
    const auto ui = static_cast<size_t>(i);
    const Vec& d = vel[ui];
    const double t = m.node(i);
    // Interior nodes see the mean of both adjacent cells, matching the centered difference.
    // End nodes use the trapezoid over their only cell, matching the one-sided difference.
    Vec field;
    if (i == 0) {
      field = 0.5 * (atoms_field(sys, mu.cell(0), t, xs[0]) + atoms_field(sys, mu.cell(0), m.node(1), xs[1]));
    } else if (i == N) {
      field = 0.5 * (atoms_field(sys, mu.cell(N - 1), t, xs[ui]) +
                     atoms_field(sys, mu.cell(N - 1), m.node(N - 1), xs[ui - 1]));
    } else {
      field = 0.5 * (atoms_field(sys, mu.cell(i), t, xs[ui]) + atoms_field(sys, mu.cell(i - 1), t, xs[ui]));
    }
    const double r = (d - field).norm();
    rep.residual_profile[ui] = r;
    rep.sup_residual = std::max(rep.sup_residual, r);
  }
  rep.pass = rep.sup_residual <= tol;
  return rep;
}

}  // namespace ftc
