#pragma once

// Hypergradient estimators for F(w) = L_V(theta*(w)).
//
// Every estimator treats each w_j as a free coordinate (no projection onto the
// simplex tangent space). The mirror-descent update is invariant to adding a
// constant to all components, so the convention does not affect trajectories.

#include <optional>
#include <string>
#include <vector>

#include "mixlab/losses.hpp"
#include "mixlab/simplex.hpp"

namespace mixlab {

enum class HypergradMethod {
  kExactIft,
  kUnrolledExact,
  kFrozenHessian,
  kFrozenHessianStochastic,
  kFiniteDiff,
};

std::string hypergrad_method_name(HypergradMethod method);

struct HypergradEstimate {
  Vector g;
  HypergradMethod method = HypergradMethod::kExactIft;
  int horizon = 0;
};

enum class ApproxMode { kExactAtOptimum, kIsotropicGamma, kExactAtCurrent };

std::string approx_mode_name(ApproxMode mode);
ApproxMode parse_approx_mode(const std::string& name);

/// Produces the frozen Hessian H_k used for a whole round. bounds holds the
/// certified (mu_hat, L_hat); delta bounds |H_k - H*(w)|_op over the simplex.
struct HessianApproximator {
  ApproxMode mode = ApproxMode::kExactAtOptimum;
  double gamma = 0.0;
  SpectrumBounds bounds;
  double delta = 0.0;

  SymMatrix at(const ProblemSpec& spec, const MixtureWeights& w) const;
};

HessianApproximator make_approximator(ApproxMode mode, const ProblemSpec& spec,
                                      std::optional<double> gamma = std::nullopt);

/// Per-domain vectors: the u recursion state, or exact partials d theta / d w_j.
struct SensitivityState {
  std::vector<Vector> u;
};

struct PartialsOutcome {
  Vector theta_T;
  SensitivityState partials;
};

struct RoundOutcome {
  Vector theta_T;
  HypergradEstimate estimate;
};

/// g_j = -<grad L_V(theta*), H*^{-1} grad l_j(theta*)>.
HypergradEstimate exact_hypergrad(const ProblemSpec& spec, const MixtureWeights& w);

/// T gradient steps on the weighted training loss, propagating
/// P_t = (I - eta H) P_{t-1} - eta grad l_j(theta_{t-1}) from P_0 = 0.
PartialsOutcome unrolled_exact_partials(const ProblemSpec& spec, const MixtureWeights& w,
                                        const Vector& theta0, double eta, int T);

/// g_j = <grad L_V(theta_T), P_T^(j)>.
RoundOutcome unrolled_exact_hypergrad(const ProblemSpec& spec, const MixtureWeights& w,
                                      const Vector& theta0, double eta, int T);

/// Joint loop of the inner update and u_{t+1} = (I - eta H_k) u_t + grad l_j(theta_t),
/// returning g_j = -eta <grad L_V(theta_T), u_T>. With noise, one stochastic
/// draw per (domain, step) feeds both the parameter and the u update, and the
/// validation gradient is drawn at theta_T. Keys use the given round index.
RoundOutcome frozen_hessian_hypergrad(const ProblemSpec& spec, const MixtureWeights& w,
                                      const Vector& theta0, double eta, int T,
                                      const HessianApproximator& approx,
                                      const std::optional<NoiseModel>& noise = std::nullopt,
                                      std::uint64_t round = 0);

/// Largest admissible inner step for the frozen-Hessian estimator: min(1/L_hat, mu/L^2).
double frozen_step_limit(const ProblemSpec& spec, const HessianApproximator& approx);

inline constexpr double kDefaultFiniteDiffStep = 1e-5;

/// Central differences of F along unnormalized coordinate directions.
HypergradEstimate finite_diff_hypergrad(const ProblemSpec& spec, const MixtureWeights& w,
                                        double h = kDefaultFiniteDiffStep);

double max_abs_diff(const Vector& a, const Vector& b);

}  // namespace mixlab
