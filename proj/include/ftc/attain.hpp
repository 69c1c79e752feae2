#pragma once

#include <ftc/pmp.hpp>
#include <ftc/relaxed.hpp>
#include <ftc/systems.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ftc {

/// Signed weight shift per cell of the reference mesh. Per-cell deltas sum to
/// zero; base + alpha * delta stays a probability measure for alpha in [0, alpha_max].
struct VariationDirection {
  std::string name;
  std::vector<std::vector<std::pair<double, Vec>>> cells;
  double alpha_max = 0.0;
};

VariationDirection make_direction(const DirectionTemplate& tmpl, const RelaxedControl& base);

/// The reference measure plus sum_i alpha_i * delta_i, with its mesh stretched
/// from [t1, t2_hat] onto [t1, tau] (same cell count).
RelaxedControl perturbed_control(const RelaxedControl& base,
                                 const std::vector<VariationDirection>& dirs, const Vec& alpha,
                                 double tau);

/// x(tau) of the relaxed system under perturbed_control(base, dirs, alpha, tau).
Vec endpoint_map(const DynamicsSpec& sys, const RelaxedControl& base,
                 const std::vector<VariationDirection>& dirs, double tau, const Vec& alpha,
                 const Vec& x1, int cells_per_unit = 1000);

enum class AttainStatus { Success, Refused, NewtonFailed, TubeViolated, PolishFailed };

const char* to_string(AttainStatus s);

struct AttainConfig {
  int s = -1;
  double eps = 1e-2;
  int max_iterations = 50;
  double fd_step = 1e-6;
  double newton_tol = 1e-10;
  double polish_tol = 1e-9;
  int cells_per_unit = 1000;
  bool force = false;
  LambdaConfig lambda;
};

struct AttainabilityResult {
  AttainStatus status = AttainStatus::NewtonFailed;
  double eps = 0.0;
  double tau = 0.0;
  int side = -1;
  OrdinaryControl control;
  double tube_deviation = 0.0;
  double endpoint_error = 0.0;
  double best_residual = 0.0;
  int iterations = 0;
  int subdivisions = 0;
  Vec alpha;
  std::string message;

  bool success() const { return status == AttainStatus::Success; }
};

AttainabilityResult probe_attainability(const ControlSystem& sys, const ReferencePair& pair,
                                        const std::vector<VariationDirection>& dirs,
                                        const AttainConfig& cfg);

struct MinimizingSequence {
  std::vector<AttainabilityResult> results;
  bool complete = true;
  std::string message;
};

/// Probes with eps_k = eps0 / 2^k, k = 0..K-1, on the left side.
MinimizingSequence minimizing_sequence(const ControlSystem& sys, const ReferencePair& pair,
                                       const std::vector<VariationDirection>& dirs, int K,
                                       double eps0, const AttainConfig& cfg);

struct ValueProbeConfig {
  double ball = 1e-3;
  double horizon = 2.0;
  int samples = 200;
  std::uint64_t seed = 42;
  int max_switches = 8;
  int cells = 2048;  // integration grid over the horizon
};

struct ValueEstimate {
  bool hit = false;
  double estimate = 0.0;    // time of closest approach inside the ball
  double entry_time = 0.0;  // first entry into the ball, same sample
  long best_sample = -1;
  double closest_distance = 0.0;  // for no-hit results
};

ValueEstimate value_probe(const ControlSystem& sys, const Vec& x1, const Vec& target,
                          const ValueProbeConfig& cfg);

}  // namespace ftc
