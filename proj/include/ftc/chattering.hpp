#pragma once

#include <ftc/relaxed.hpp>
#include <ftc/systems.hpp>

#include <vector>

namespace ftc {

struct ChatterPlan {
  RelaxedControl source;
  int subdivisions = 1;  // p sub-cycles per mesh cell
};

/// Time-slices each cell into p sub-cycles; atom i holds for (h/p) * w_i in input order.
OrdinaryControl chatter(const ChatterPlan& plan);

struct ConvergenceRow {
  int p = 0;
  double sup_deviation = 0.0;
  double excursion_bound = 0.0;
};

/// Sup-norm distance between chattered and relaxed trajectories at the nodes of
/// `sample_mesh` (which must span the control's mesh), one row per p.
std::vector<ConvergenceRow> convergence_study(const DynamicsSpec& sys, const RelaxedControl& mu,
                                              const Vec& x1, const std::vector<int>& p_list,
                                              const Mesh& sample_mesh);

}  // namespace ftc
