#pragma once

#include <ftc/common.hpp>

#include <vector>

namespace ftc {

/// Uniform partition of [t1, t2] into `cells` cells.
struct Mesh {
  double t1 = 0.0;
  double t2 = 1.0;
  int cells = 1;

  Mesh() = default;
  Mesh(double t1, double t2, int cells);

  double h() const { return (t2 - t1) / cells; }
  double node(int i) const;
  int nodes() const { return cells + 1; }

  /// Right-open cells, last cell closed; exact node hits resolve to the later cell.
  int cell_of(double t) const;
  bool contains(double t) const { return t >= t1 && t <= t2; }

  bool operator==(const Mesh& o) const { return t1 == o.t1 && t2 == o.t2 && cells == o.cells; }
};

/// Mesh over [t1, t2] with about `per_unit` cells per unit time (at least one).
Mesh mesh_with_density(double t1, double t2, int per_unit);

struct Trajectory {
  Mesh mesh;
  std::vector<Vec> samples;

  const Vec& front() const { return samples.front(); }
  const Vec& back() const { return samples.back(); }
  /// Piecewise-linear interpolation between nodes; t is clamped to the span.
  Vec at(double t) const;
};

struct Costate {
  Mesh mesh;
  std::vector<RowVec> samples;
};

/// Phi(t_i) with psi(t_i) = psi(t2) * Phi(t_i); row k is the costate ending at e_k.
struct FundamentalCostate {
  Mesh mesh;
  std::vector<Mat> samples;
};

}  // namespace ftc
