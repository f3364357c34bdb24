#pragma once

// Round-loop engine for the three data-mixing algorithms: exact unrolled
// hypergradients, a frozen approximate Hessian, and the stochastic variant.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mixlab/hypergrad.hpp"
#include "mixlab/losses.hpp"
#include "mixlab/simplex.hpp"

namespace mixlab {

enum class Algorithm { kAlg1Exact, kAlg2Frozen, kAlg3Stochastic };

std::string algorithm_name(Algorithm algorithm);
Algorithm parse_algorithm(const std::string& name);

struct RunConfig {
  Algorithm algorithm = Algorithm::kAlg1Exact;
  std::optional<double> eta;    // unset: theorem value (stochastic only)
  std::optional<double> alpha;  // unset: theorem value
  int T = 1;
  int K = 0;                    // 0: derived from N
  long long N = 0;              // 0: derived from K
  std::optional<Vector> theta0; // unset: zero vector
  std::optional<Vector> w0;     // unset: uniform
  ApproxMode approx_mode = ApproxMode::kExactAtOptimum;
  std::optional<double> gamma;
  double sigma = 0.0;
  std::uint64_t seed = 0;
  /// Fail instead of warning when automatic step sizes are outside the theorem regime.
  bool strict_regime = false;
  /// Reference minimum of F, used for the gap columns. NaN gaps when unset.
  std::optional<double> f_star;
  /// Measure wall time. Off gives bitwise-reproducible records.
  bool record_timing = true;
};

struct RoundRecord {
  int k = 0;
  MixtureWeights w;
  Vector theta0;
  double F = 0.0;
  double gap = 0.0;
  Vector g;                 // hypergradient used to leave round k (empty at k = K)
  double hypergrad_err = 0.0;
  double iterate_dist = 0.0; // |theta_{k,0} - theta*(w_k)|
};

struct RunRecord {
  Algorithm algorithm = Algorithm::kAlg1Exact;
  double eta = 0.0;
  double alpha = 0.0;
  int T = 0;
  int K = 0;
  long long budget_remainder = 0;
  std::vector<RoundRecord> rounds;  // k = 0..K
  MixtureWeights w_final;
  MixtureWeights w_avg;             // mean of w_0..w_{K-1}
  double F_final = 0.0;
  double F_avg = 0.0;
  double F_star = 0.0;              // NaN when not supplied
  double gap_final = 0.0;
  double gap_avg = 0.0;
  bool iterate_bound_checked = false;
  double iterate_bound = 0.0;
  int iterate_bound_violations = 0;
  int ball_violations = 0;
  double max_hypergrad_norm = 0.0;
  std::vector<std::string> notes;
  double wall_ms = 0.0;
};

struct StepSizes {
  double eta = 0.0;
  double alpha = 0.0;
  bool regime_ok = true;
  std::vector<std::string> violations;
};

/// K resolved from (N, T, K) and the discarded remainder N - K T.
struct Schedule {
  int K = 0;
  long long remainder = 0;
};
Schedule resolve_schedule(const RunConfig& config);

/// Smallest deterministic horizon covered by the analysis: ceil(log 4 / (eta mu)).
int min_theorem_horizon(double eta, double mu);

/// Theorem step sizes. Throws kRegimeNotMet with the violated inequality when
/// config.strict_regime is set; otherwise reports violations in the result.
StepSizes auto_stepsizes(const ProblemSpec& spec, const RunConfig& config);

/// Radius of the bounded-iterates guarantee: 2 max(|theta_00 - theta*(w_0)|, (2L/mu + 1) D).
double iterate_bound_radius(const ProblemSpec& spec, const Vector& theta0, const MixtureWeights& w0);

RunRecord run(const ProblemSpec& spec, const RunConfig& config);

std::string run_record_csv(const RunRecord& record);
std::string run_record_json(const RunRecord& record);

}  // namespace mixlab
