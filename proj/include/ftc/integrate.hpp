#pragma once

#include <ftc/relaxed.hpp>
#include <ftc/systems.hpp>
#include <ftc/trajectory.hpp>

#include <functional>

namespace ftc {

// Classical fixed-step RK4. Every integrator samples at mesh nodes and splits
// each mesh cell at control breakpoints, so no step straddles a discontinuity.

using TimeField = std::function<Vec(double t, const Vec& x)>;

Vec rk4_step(const TimeField& f, double t, const Vec& x, double h);

/// One RK4 step per mesh cell of a smooth time-dependent field.
Trajectory integrate_field(const TimeField& f, const Vec& x1, const Mesh& mesh);

Trajectory integrate_ordinary(const DynamicsSpec& sys, const OrdinaryControl& u, const Vec& x1,
                              const Mesh& mesh);

Trajectory integrate_relaxed(const DynamicsSpec& sys, const RelaxedControl& mu, const Vec& x1,
                             const Mesh& mesh);

/// Backward RK4 for psi' = -psi <mu, f_x(t, xhat, u)>, xhat linear between nodes.
Costate integrate_adjoint(const DynamicsSpec& sys, const Trajectory& ref, const RelaxedControl& mu,
                          const RowVec& psi_terminal);

FundamentalCostate fundamental_costate(const DynamicsSpec& sys, const Trajectory& ref,
                                       const RelaxedControl& mu);

}  // namespace ftc
