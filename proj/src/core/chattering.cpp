#include <ftc/chattering.hpp>
#include <ftc/integrate.hpp>

#include <algorithm>
#include <cmath>

namespace ftc {

OrdinaryControl chatter(const ChatterPlan& plan) {
  if (plan.subdivisions < 1) fail(ErrorKind::Input, "chatter: p must be >= 1");
  const RelaxedControl& mu = plan.source;
  const Mesh& m = mu.mesh();
  const int p = plan.subdivisions;

  OrdinaryControl out;
  out.breakpoints.push_back(m.t1);
  auto emit = [&out](double end, const Vec& u) {
    if (!(end > out.breakpoints.back())) return;
    if (!out.values.empty() && out.values.back() == u) {
      out.breakpoints.back() = end;  // merge with the previous piece
      return;
    }
    out.values.push_back(u);
    out.breakpoints.push_back(end);
  };

  for (int c = 0; c < m.cells; ++c) {
    const AtomList& atoms = mu.cell(c);
    const double a = m.node(c), b = m.node(c + 1);
    // Last atom with positive weight closes each sub-cycle exactly.
    int last = -1;
    for (int k = 0; k < static_cast<int>(atoms.size()); ++k)
      if (atoms[static_cast<size_t>(k)].w > 0.0) last = k;
    for (int q = 0; q < p; ++q) {
      const double start = a + (b - a) * (static_cast<double>(q) / p);
      const double stop = q + 1 == p ? b : a + (b - a) * (static_cast<double>(q + 1) / p);
      const double width = stop - start;
      double cum = 0.0;
      for (int k = 0; k < static_cast<int>(atoms.size()); ++k) {
        const Atom& at = atoms[static_cast<size_t>(k)];
        if (at.w <= 0.0) continue;
        cum += at.w;
        emit(k == last ? stop : start + width * cum, at.u);
      }
    }
  }
  return out;
}

std::vector<ConvergenceRow> convergence_study(const DynamicsSpec& sys, const RelaxedControl& mu,
                                              const Vec& x1, const std::vector<int>& p_list,
                                              const Mesh& sample_mesh) {
  for (size_t k = 0; k < p_list.size(); ++k) {
    if (p_list[k] < 1) fail(ErrorKind::Input, "convergence_study: p must be >= 1");
    if (k > 0 && p_list[k] <= p_list[k - 1]) {
      fail(ErrorKind::Input, "convergence_study: p_list must be strictly increasing");
    }
  }
  const Trajectory relaxed = integrate_relaxed(sys, mu, x1, sample_mesh);

  // Largest speed over the atoms along the relaxed path bounds between-node excursions.
  double max_speed = 0.0;
  for (int i = 0; i <= sample_mesh.cells; ++i) {
    const double t = sample_mesh.node(i);
    const Vec& x = relaxed.samples[static_cast<size_t>(i)];
    const Mesh& cm = mu.mesh();
    for (const Atom& a : mu.cell(cm.cell_of(std::clamp(t, cm.t1, cm.t2)))) {
      if (a.w > 0.0) max_speed = std::max(max_speed, sys.eval(t, x, a.u).norm());
    }
  }

  std::vector<ConvergenceRow> rows;
  rows.reserve(p_list.size());
  for (int p : p_list) {
    const OrdinaryControl u = chatter({mu, p});
    const Trajectory ch = integrate_ordinary(sys, u, x1, sample_mesh);
    ConvergenceRow row;
    row.p = p;
    for (size_t i = 0; i < ch.samples.size(); ++i) {
      row.sup_deviation = std::max(row.sup_deviation, (ch.samples[i] - relaxed.samples[i]).norm());
    }
    row.excursion_bound = mu.mesh().h() / p * max_speed;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace ftc
