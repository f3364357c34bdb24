#include "mixlab/fit.hpp"

#include <cmath>

namespace mixlab {

std::string scaling_law_name(ScalingLaw law) {
  return law == ScalingLaw::kLogN ? "log-N" : "sqrt-N-log-N";
}

ScalingLaw parse_scaling_law(const std::string& name) {
  if (name == "log-N") return ScalingLaw::kLogN;
  if (name == "sqrt-N-log-N") return ScalingLaw::kSqrtNLogN;
  fail(ErrorCode::kConfig, "unknown scaling law '" + name + "'");
}

double scaling_feature(ScalingLaw law, double n) {
  return law == ScalingLaw::kLogN ? std::log(n) : std::sqrt(n * std::log(n));
}

namespace {

struct OriginFit {
  double coef = 0.0;
  double r2 = 0.0;
  std::vector<double> residuals;
  bool degenerate = false;
};

OriginFit fit_through_origin(const std::vector<double>& n, const std::vector<double>& t, ScalingLaw law) {
  double fx = 0.0;
  double ff = 0.0;
  double mean = 0.0;
  for (std::size_t i = 0; i < n.size(); ++i) {
    const double f = scaling_feature(law, n[i]);
    fx += f * t[i];
    ff += f * f;
    mean += t[i];
  }
  mean /= static_cast<double>(n.size());
  OriginFit out;
  out.coef = fx / ff;
  double ss_res = 0.0;
  double ss_tot = 0.0;
  for (std::size_t i = 0; i < n.size(); ++i) {
    const double r = t[i] - out.coef * scaling_feature(law, n[i]);
    out.residuals.push_back(r);
    ss_res += r * r;
    ss_tot += (t[i] - mean) * (t[i] - mean);
  }
  if (ss_tot == 0.0) {
    out.degenerate = true;
    out.r2 = ss_res == 0.0 ? 1.0 : -INFINITY;
  } else {
    out.r2 = 1.0 - ss_res / ss_tot;
  }
  return out;
}

}  // namespace

ScalingFit fit_scaling_points(const std::vector<double>& budgets, const std::vector<double>& horizons,
                              ScalingLaw law) {
  if (budgets.size() != horizons.size()) fail(ErrorCode::kShape, "fit_scaling: size mismatch");
  if (budgets.size() < 3) fail(ErrorCode::kEmptyInput, "fit_scaling needs at least 3 budgets");
  for (double n : budgets) {
    if (!(n > 1.0)) fail(ErrorCode::kShape, "fit_scaling: budgets must exceed 1");
  }
  const OriginFit main = fit_through_origin(budgets, horizons, law);
  const ScalingLaw other = law == ScalingLaw::kLogN ? ScalingLaw::kSqrtNLogN : ScalingLaw::kLogN;
  ScalingFit out;
  out.law = law;
  out.coef = main.coef;
  out.r2 = main.r2;
  out.residuals = main.residuals;
  out.degenerate = main.degenerate;
  out.competing_r2 = fit_through_origin(budgets, horizons, other).r2;
  return out;
}

ScalingFit fit_scaling(const SweepResult& result, ScalingLaw law) {
  std::vector<double> n;
  std::vector<double> t;
  for (const auto& [budget, argmin] : result.mean_replicate_argmin_T) {
    n.push_back(static_cast<double>(budget));
    t.push_back(argmin);
  }
  return fit_scaling_points(n, t, law);
}

DecayReport analyze_decay(const std::vector<int>& horizons, const std::vector<double>& errors,
                          double eta, double mu) {
  if (horizons.size() != errors.size()) fail(ErrorCode::kShape, "analyze_decay: size mismatch");
  if (horizons.empty()) fail(ErrorCode::kEmptyInput, "analyze_decay: no horizons");
  for (std::size_t i = 1; i < horizons.size(); ++i) {
    if (horizons[i] <= horizons[i - 1]) fail(ErrorCode::kShape, "horizons must be strictly increasing");
  }
  DecayReport rep;
  rep.horizons = horizons;
  rep.errors = errors;
  rep.eta = eta;
  rep.mu = mu;
  rep.target_slope = std::log(1.0 - eta * mu / 2.0);
  rep.floor = errors.back();

  const double threshold = std::max(10.0 * rep.floor, kDecayUnderflow);
  std::size_t pre_floor = 0;
  while (pre_floor < errors.size() && errors[pre_floor] > threshold) ++pre_floor;
  rep.fit_begin = pre_floor / 2;
  rep.fit_end = pre_floor;
  if (rep.fit_end - rep.fit_begin < 2) {
    rep.fit_begin = rep.fit_end = 0;
    rep.slope = 0.0;
    rep.intercept = std::log(std::max(rep.floor, kDecayUnderflow));
  } else {
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    const double n = static_cast<double>(rep.fit_end - rep.fit_begin);
    for (std::size_t i = rep.fit_begin; i < rep.fit_end; ++i) {
      const double x = horizons[i];
      const double y = std::log(errors[i]);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    rep.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    rep.intercept = (sy - rep.slope * sx) / n;
  }
  rep.relative_deviation = std::abs(rep.slope / rep.target_slope - 1.0);
  return rep;
}

DecayReport fit_decay(const ProblemSpec& spec, const MixtureWeights& w, const Vector& theta0,
                      double eta, const std::vector<int>& horizons, const HessianApproximator& approx) {
  const Vector exact = exact_hypergrad(spec, w).g;
  std::vector<double> errors;
  errors.reserve(horizons.size());
  for (int t : horizons) {
    const RoundOutcome out = frozen_hessian_hypergrad(spec, w, theta0, eta, t, approx);
    errors.push_back(max_abs_diff(out.estimate.g, exact));
  }
  return analyze_decay(horizons, errors, eta, spec.mu);
}

DecayReport fit_decay(const ProblemSpec& spec, const MixtureWeights& w, const Vector& theta0,
                      double eta, const std::vector<int>& horizons) {
  return fit_decay(spec, w, theta0, eta, horizons, make_approximator(ApproxMode::kExactAtOptimum, spec));
}

}  // namespace mixlab
