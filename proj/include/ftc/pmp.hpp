#pragma once

#include <ftc/integrate.hpp>
#include <ftc/relaxed.hpp>
#include <ftc/systems.hpp>

#include <string>
#include <variant>

namespace ftc {

double hamiltonian(const DynamicsSpec& sys, double t, const Vec& x, const RowVec& psi,
                   const Vec& u);

struct MaxResult {
  double value = 0.0;
  Vec witness;
};

/// M(t, x, psi) = sup over U of H. Exact for finite U; closed form for
/// control-affine dynamics over the unit sphere or a box.
MaxResult max_function(const ControlSystem& sys, double t, const Vec& x, const RowVec& psi);

enum class TransversalityConvention {
  Definition,  // s * M(t2) <= 0
  Theorem,     // M(t2) <= 0
};

struct LambdaConfig {
  int s = -1;
  double sphere_resolution = 1e-2;
  double residual_tol = 1e-9;
  double continuity_jump_tol = 1e-9;
  double adjoint_tol = 1e-6;
  double admissibility_tol = 1e-6;
  TransversalityConvention convention = TransversalityConvention::Definition;
  /// Use finite-difference velocities when the pair fails the admissibility audit.
  bool allow_inadmissible = false;
  int workers = 0;  // 0: hardware concurrency

  void validate() const;
};

enum class Verdict { Member, Rejected };

struct CertificateReport {
  RowVec psi_terminal;
  double max_condition_residual = 0.0;
  double adjoint_residual = 0.0;
  double continuity_jump = 0.0;
  double transversality_value = 0.0;
  Verdict verdict = Verdict::Rejected;
  std::string reason;  // empty for members
};

struct ReferencePair {
  Trajectory trajectory;
  RelaxedControl control;
};

CertificateReport check_lambda_candidate(const ControlSystem& sys, const ReferencePair& pair,
                                         const RowVec& psi_terminal, const LambdaConfig& cfg);

struct LambdaFound {
  RowVec psi_terminal;
  CertificateReport report;
  bool from_refinement = false;
};

struct LambdaEmpty {
  double min_score = 0.0;
  RowVec best_direction;
  long scan_size = 0;
};

struct LambdaVerdict {
  std::variant<LambdaFound, LambdaEmpty> outcome;
  long scan_size = 0;

  bool found() const { return std::holds_alternative<LambdaFound>(outcome); }
  const LambdaFound& as_found() const { return std::get<LambdaFound>(outcome); }
  const LambdaEmpty& as_empty() const { return std::get<LambdaEmpty>(outcome); }
};

LambdaVerdict search_lambda(const ControlSystem& sys, const ReferencePair& pair,
                            const LambdaConfig& cfg);

/// Canonical unit-sphere scan directions for dimension n at the given angular step.
std::vector<RowVec> sphere_directions(int n, double resolution);

}  // namespace ftc
