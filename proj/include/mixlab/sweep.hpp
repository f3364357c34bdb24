#pragma once

// Budget-constrained horizon sweeps: for each budget N and horizon T, run the
// configured mixer for K = floor(N / T) rounds and record the final gap to F*.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mixlab/losses.hpp"
#include "mixlab/mixers.hpp"
#include "mixlab/oracle.hpp"

namespace mixlab {

struct SweepPlan {
  ProblemKind kind = ProblemKind::kAlignedDomain;
  GeneratorParams params;
  std::uint64_t problem_seed = 0;
  std::optional<ProblemSpec> problem;  // overrides the generator when set

  std::vector<long long> budgets;
  std::map<long long, std::vector<int>> horizons;  // budgets without an entry use the default grid

  Algorithm algorithm = Algorithm::kAlg1Exact;
  std::optional<double> eta;
  std::optional<double> alpha;
  ApproxMode approx_mode = ApproxMode::kExactAtOptimum;
  std::optional<double> gamma;
  double sigma = 0.0;
  std::optional<Vector> theta0;
  int replicates = 0;                  // 0: 5 when stochastic, otherwise 1
  std::uint64_t seed = 0;
  int aligned_domain = 0;

  int jobs = 1;
  std::string checkpoint_dir;          // empty: no incremental persistence
  bool record_timing = true;
};

struct SweepCell {
  long long N = 0;
  int T = 0;
  int replicate = 0;
  std::uint64_t seed = 0;
  int K = 0;
  double gap_avg = 0.0;
  double gap_last = 0.0;
  double aligned_weight = 0.0;
  double hypergrad_err_last = 0.0;
  double wall_ms = 0.0;
  bool iterate_bound_checked = false;
  int iterate_bound_violations = 0;
  std::string error;  // non-empty when the cell failed

  bool ok() const { return error.empty(); }
};

struct SweepResult {
  ProblemSpec spec;
  OracleResult oracle;
  int replicates = 1;
  std::vector<SweepCell> cells;                    // sorted by (N, T, replicate)
  std::map<long long, int> argmin_T;               // on the replicate-mean gap
  std::map<long long, double> mean_replicate_argmin_T;  // mean of per-replicate argmins
  int failed_cells = 0;
};

int effective_replicates(const SweepPlan& plan);

/// Powers of two up to N plus the theorem horizons (ceil(log 4/(eta mu)); for
/// stochastic runs also ceil(sqrt(N log N))).
std::vector<int> default_horizons(long long N, const SweepPlan& plan, const ProblemSpec& spec);

std::uint64_t replicate_seed(const SweepPlan& plan, int replicate);

ProblemSpec plan_problem(const SweepPlan& plan);

/// Runs every cell on a bounded worker pool. Cells already persisted in
/// plan.checkpoint_dir are loaded instead of re-run.
SweepResult run_sweep(const SweepPlan& plan);

/// Argmin over T of the given per-cell metric, ties toward smaller T. Failed
/// cells are skipped. Returns 0 when no cell succeeded.
int argmin_horizon(const std::vector<SweepCell>& cells, long long N, std::optional<int> replicate);

}  // namespace mixlab
