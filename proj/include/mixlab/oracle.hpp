#pragma once

// Reference minimum of F over the simplex, computed without any mixing
// algorithm, and the finite-difference audit of the exact hypergradient.

#include <cstdint>
#include <string>

#include "mixlab/losses.hpp"
#include "mixlab/rng.hpp"
#include "mixlab/simplex.hpp"

namespace mixlab {

inline constexpr int kGridOracleMaxDomains = 6;

struct OracleOptions {
  int grid_points = 5000;       // upper bound on the simplex lattice size
  double tolerance = 1e-10;     // stationarity tolerance of projected gradient
  int max_iterations = 20000;
};

struct OracleResult {
  MixtureWeights w_star;
  double F_star = 0.0;
  double grid_F = 0.0;          // lattice + pattern search (NaN when m > 6)
  double projected_F = 0.0;     // projected gradient with exact hypergradients
  bool projected_converged = false;
};

/// Lattice search refined by derivative-free pattern search (m <= 6).
OracleResult grid_oracle(const ProblemSpec& spec, const OracleOptions& options = {});

/// Projected gradient with Armijo backtracking, started from the given point.
OracleResult projected_gradient_oracle(const ProblemSpec& spec, const MixtureWeights& start,
                                       const OracleOptions& options = {});

/// Both oracles where available; F* is the smaller value. Throws kNonConvergence
/// when projected gradient stalls and no grid value is available to cross-check it.
OracleResult outer_opt_oracle(const ProblemSpec& spec, const OracleOptions& options = {});

struct GradcheckReport {
  int trials = 0;
  int failures = 0;
  double tolerance = 0.0;
  double worst_relative = 0.0;
};

/// Exact vs finite-difference hypergradients on random problems and random
/// interior weights. Each trial draws m in [2, params.m] and d in [1, params.d].
/// Error per element is |a - b| / max(1, |b|).
GradcheckReport gradcheck(ProblemKind kind, const GeneratorParams& params, std::uint64_t seed,
                          int trials, double tolerance, double h = 1e-5);

/// Uniformly random point in the interior of the simplex, every entry above margin.
MixtureWeights random_interior_weights(int m, double margin, SplitMix64& rng);

}  // namespace mixlab
