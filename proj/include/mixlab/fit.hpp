#pragma once

// Scaling-law fits of argmin-T against N, and decay fits of the hypergradient
// error against the horizon.

#include <optional>
#include <string>
#include <vector>

#include "mixlab/hypergrad.hpp"
#include "mixlab/sweep.hpp"

namespace mixlab {

enum class ScalingLaw { kLogN, kSqrtNLogN };

std::string scaling_law_name(ScalingLaw law);
ScalingLaw parse_scaling_law(const std::string& name);
double scaling_feature(ScalingLaw law, double n);

/// Least squares T = a f(N) through the origin. r2 uses the centred total sum
/// of squares; when every T is equal the fit is flagged degenerate.
struct ScalingFit {
  ScalingLaw law = ScalingLaw::kLogN;
  double coef = 0.0;
  double r2 = 0.0;
  double competing_r2 = 0.0;
  std::vector<double> residuals;
  bool degenerate = false;
};

ScalingFit fit_scaling_points(const std::vector<double>& budgets, const std::vector<double>& horizons,
                              ScalingLaw law);

/// Uses the replicate-mean argmin per budget. Needs at least 3 budgets.
ScalingFit fit_scaling(const SweepResult& result, ScalingLaw law);

struct DecayReport {
  std::vector<int> horizons;
  std::vector<double> errors;
  double eta = 0.0;
  double mu = 0.0;
  double slope = 0.0;         // least-squares d log(err) / dT over the fit range
  double intercept = 0.0;
  double target_slope = 0.0;  // log(1 - eta mu / 2)
  double relative_deviation = 0.0;  // |slope / target - 1|
  double floor = 0.0;         // error at the largest horizon
  std::size_t fit_begin = 0;  // index range [fit_begin, fit_end) used for the fit
  std::size_t fit_end = 0;
};

inline constexpr double kDecayUnderflow = 1e-14;

/// Fit range: the later half of the horizons whose error exceeds both
/// 10 x floor and kDecayUnderflow. Fewer than two such points gives slope 0.
DecayReport analyze_decay(const std::vector<int>& horizons, const std::vector<double>& errors,
                          double eta, double mu);

/// |g_T - grad F|_inf of the frozen-Hessian estimator at each horizon, then analyze_decay.
DecayReport fit_decay(const ProblemSpec& spec, const MixtureWeights& w, const Vector& theta0,
                      double eta, const std::vector<int>& horizons,
                      const HessianApproximator& approx);
DecayReport fit_decay(const ProblemSpec& spec, const MixtureWeights& w, const Vector& theta0,
                      double eta, const std::vector<int>& horizons);

}  // namespace mixlab
