#include "mixlab/oracle.hpp"

#include <algorithm>
#include <functional>
#include <cmath>
#include <limits>
#include <vector>

#include "mixlab/hypergrad.hpp"

namespace mixlab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

long long lattice_size(int m, int r) {
  // C(r + m - 1, m - 1)
  long double count = 1.0;
  for (int i = 1; i < m; ++i) count = count * (r + i) / i;
  return static_cast<long long>(count + 0.5);
}

void for_each_lattice_point(int m, int r, const std::function<void(const Vector&)>& visit) {
  std::vector<int> counts(m, 0);
  Vector w(m);
  std::function<void(int, int)> rec = [&](int j, int left) {
    if (j == m - 1) {
      counts[j] = left;
      for (int i = 0; i < m; ++i) w(i) = static_cast<double>(counts[i]) / r;
      visit(w);
      return;
    }
    for (int c = 0; c <= left; ++c) {
      counts[j] = c;
      rec(j + 1, left - c);
    }
  };
  rec(0, r);
}

// Derivative-free descent along the edge directions e_i - e_j with a halving step.
Vector pattern_search(const ProblemSpec& spec, Vector w, double step) {
  const int m = static_cast<int>(w.size());
  double f = outer_objective_raw(spec, w);
  while (step > 1e-13) {
    bool improved = false;
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) {
        if (i == j || w(j) <= 0.0) continue;
        Vector trial = w;
        const double move = std::min(step, w(j));
        trial(i) += move;
        trial(j) -= move;
        const double ft = outer_objective_raw(spec, trial);
        if (ft < f) {
          f = ft;
          w = std::move(trial);
          improved = true;
        }
      }
    }
    if (!improved) step *= 0.5;
  }
  return w;
}

MixtureWeights to_weights(Vector w) {
  w = w.cwiseMax(0.0);
  w /= w.sum();
  return MixtureWeights::from_values(std::move(w));
}

}  // namespace

OracleResult grid_oracle(const ProblemSpec& spec, const OracleOptions& options) {
  const int m = spec.num_domains();
  if (m > kGridOracleMaxDomains) {
    fail(ErrorCode::kConfig, "grid oracle supports at most " + std::to_string(kGridOracleMaxDomains) +
                                 " domains");
  }
  int r = 1;
  while (lattice_size(m, r + 1) <= options.grid_points) ++r;
  Vector best;
  double best_f = INFINITY;
  for_each_lattice_point(m, r, [&](const Vector& w) {
    const double f = outer_objective_raw(spec, w);
    if (f < best_f) {
      best_f = f;
      best = w;
    }
  });
  Vector refined = pattern_search(spec, best, 1.0 / r);
  OracleResult out;
  out.w_star = to_weights(refined);
  out.grid_F = outer_objective_raw(spec, refined);
  out.F_star = out.grid_F;
  out.projected_F = kNaN;
  return out;
}

OracleResult projected_gradient_oracle(const ProblemSpec& spec, const MixtureWeights& start,
                                       const OracleOptions& options) {
  Vector w = start.values();
  double f = outer_objective_raw(spec, w);
  double step = 1.0;
  bool converged = false;
  for (int it = 0; it < options.max_iterations; ++it) {
    const Vector g = exact_hypergrad(spec, to_weights(w)).g;
    Vector next;
    double fn = INFINITY;
    // Armijo backtracking on the projected arc.
    while (true) {
      next = project_to_simplex(w - step * g);
      fn = outer_objective_raw(spec, next);
      const Vector diff = next - w;
      if (fn <= f + g.dot(diff) + diff.squaredNorm() / (2.0 * step) || step < 1e-14) break;
      step *= 0.5;
    }
    const double moved = (next - w).norm();
    if (fn <= f) {
      w = std::move(next);
      f = fn;
    }
    if (moved / std::max(step, 1e-300) < options.tolerance || moved < 1e-15) {
      converged = true;
      break;
    }
    step *= 2.0;
  }
  OracleResult out;
  out.w_star = to_weights(w);
  out.projected_F = f;
  out.F_star = f;
  out.grid_F = kNaN;
  out.projected_converged = converged;
  return out;
}

OracleResult outer_opt_oracle(const ProblemSpec& spec, const OracleOptions& options) {
  const int m = spec.num_domains();
  if (m > kGridOracleMaxDomains) {
    OracleResult pg = projected_gradient_oracle(spec, MixtureWeights::uniform(m), options);
    if (!pg.projected_converged) {
      fail(ErrorCode::kNonConvergence, "projected gradient did not reach tolerance; F=" +
                                           std::to_string(pg.projected_F));
    }
    return pg;
  }
  OracleResult grid = grid_oracle(spec, options);
  OracleResult pg = projected_gradient_oracle(spec, grid.w_star, options);
  OracleResult pg_uniform = projected_gradient_oracle(spec, MixtureWeights::uniform(m), options);
  if (pg_uniform.projected_F < pg.projected_F) pg = pg_uniform;
  OracleResult out = grid.grid_F <= pg.projected_F ? grid : pg;
  out.grid_F = grid.grid_F;
  out.projected_F = pg.projected_F;
  out.projected_converged = pg.projected_converged;
  out.F_star = std::min(grid.grid_F, pg.projected_F);
  return out;
}

MixtureWeights random_interior_weights(int m, double margin, SplitMix64& rng) {
  if (!(margin * m < 1.0)) fail(ErrorCode::kMarginViolation, "margin too large for the simplex");
  // Exponential spacings give a uniform point on the simplex; shrink toward the
  // centre so every entry exceeds the margin.
  Vector e(m);
  for (int j = 0; j < m; ++j) e(j) = -std::log(rng.uniform());
  e /= e.sum();
  const double keep = 1.0 - 2.0 * margin * m;
  Vector w = (keep > 0.0 ? keep : 0.0) * e + Vector::Constant(m, (1.0 - std::max(keep, 0.0)) / m);
  return MixtureWeights::from_values(std::move(w));
}

GradcheckReport gradcheck(ProblemKind kind, const GeneratorParams& params, std::uint64_t seed,
                          int trials, double tolerance, double h) {
  if (trials < 1) fail(ErrorCode::kConfig, "gradcheck needs at least one trial");
  if (!(tolerance > 0.0)) fail(ErrorCode::kConfig, "gradcheck tolerance must be positive");
  GradcheckReport rep;
  rep.trials = trials;
  rep.tolerance = tolerance;
  SplitMix64 rng(hash_words(seed, 0x6772616463ull));
  for (int t = 0; t < trials; ++t) {
    GeneratorParams p = params;
    if (kind != ProblemKind::kQuad1dPaper) {
      p.m = 2 + static_cast<int>(rng.next() % static_cast<std::uint64_t>(std::max(params.m - 1, 1)));
      p.d = 1 + static_cast<int>(rng.next() % static_cast<std::uint64_t>(std::max(params.d, 1)));
    }
    const ProblemSpec spec = generate_problem(kind, p, hash_words(seed, static_cast<std::uint64_t>(t)));
    const MixtureWeights w = random_interior_weights(spec.num_domains(), 10.0 * h, rng);
    const Vector exact = exact_hypergrad(spec, w).g;
    const Vector fd = finite_diff_hypergrad(spec, w, h).g;
    double worst = 0.0;
    for (int j = 0; j < exact.size(); ++j) {
      worst = std::max(worst, std::abs(exact(j) - fd(j)) / std::max(1.0, std::abs(fd(j))));
    }
    rep.worst_relative = std::max(rep.worst_relative, worst);
    if (worst > tolerance) ++rep.failures;
  }
  return rep;
}

}  // namespace mixlab
