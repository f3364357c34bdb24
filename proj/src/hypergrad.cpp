#include "mixlab/hypergrad.hpp"

#include <cmath>

namespace mixlab {

namespace {

void check_round_inputs(const ProblemSpec& spec, const MixtureWeights& w, const Vector& theta0,
                        int T, int min_T) {
  check_same_size(w.size(), spec.num_domains(), "hypergradient weights");
  check_same_size(theta0.size(), spec.dim(), "hypergradient theta0");
  if (T < min_T) fail(ErrorCode::kShape, "horizon T must be >= " + std::to_string(min_T));
  if (!all_finite(theta0)) fail(ErrorCode::kNumericalAbort, "non-finite theta0");
}

void check_finite_estimate(const HypergradEstimate& est) {
  if (!all_finite(est.g)) {
    fail(ErrorCode::kNumericalAbort,
         "non-finite " + hypergrad_method_name(est.method) + " hypergradient at T=" +
             std::to_string(est.horizon));
  }
}

}  // namespace

std::string hypergrad_method_name(HypergradMethod method) {
  switch (method) {
    case HypergradMethod::kExactIft: return "exact-ift";
    case HypergradMethod::kUnrolledExact: return "unrolled-exact";
    case HypergradMethod::kFrozenHessian: return "frozen-hessian";
    case HypergradMethod::kFrozenHessianStochastic: return "frozen-hessian-stochastic";
    case HypergradMethod::kFiniteDiff: return "finite-diff";
  }
  return "unknown";
}

std::string approx_mode_name(ApproxMode mode) {
  switch (mode) {
    case ApproxMode::kExactAtOptimum: return "exact-at-optimum";
    case ApproxMode::kIsotropicGamma: return "isotropic-gamma";
    case ApproxMode::kExactAtCurrent: return "exact-at-current";
  }
  return "unknown";
}

ApproxMode parse_approx_mode(const std::string& name) {
  if (name == "exact-at-optimum") return ApproxMode::kExactAtOptimum;
  if (name == "isotropic-gamma") return ApproxMode::kIsotropicGamma;
  if (name == "exact-at-current") return ApproxMode::kExactAtCurrent;
  fail(ErrorCode::kInvalidApproximator, "unknown approximator mode '" + name + "'");
}

SymMatrix HessianApproximator::at(const ProblemSpec& spec, const MixtureWeights& w) const {
  if (mode == ApproxMode::kIsotropicGamma) return SymMatrix::scaled_identity(spec.dim(), gamma);
  // Quadratic domains: the Hessian of the weighted loss does not depend on theta,
  // so the value at the optimum and at the current iterate coincide.
  return weighted_hessian(spec, w.values());
}

HessianApproximator make_approximator(ApproxMode mode, const ProblemSpec& spec,
                                      std::optional<double> gamma) {
  HessianApproximator approx;
  approx.mode = mode;
  if (mode == ApproxMode::kIsotropicGamma) {
    if (!gamma || !(*gamma > 0.0) || !std::isfinite(*gamma)) {
      fail(ErrorCode::kInvalidApproximator, "isotropic-gamma needs a positive finite gamma");
    }
    approx.gamma = *gamma;
    approx.bounds = {*gamma, *gamma};
    approx.delta = std::max(std::abs(*gamma - spec.mu), std::abs(*gamma - spec.L));
    return approx;
  }
  if (gamma) fail(ErrorCode::kInvalidApproximator, "gamma only applies to isotropic-gamma");
  approx.bounds = {spec.mu, spec.L};
  approx.delta = 0.0;
  return approx;
}

HypergradEstimate exact_hypergrad(const ProblemSpec& spec, const MixtureWeights& w) {
  check_same_size(w.size(), spec.num_domains(), "exact_hypergrad");
  const Vector theta_star = weighted_minimizer(spec, w);
  const SymMatrix h = weighted_hessian(spec, w.values());
  // One solve against the validation gradient serves every domain (H is symmetric).
  const Vector z = spd_solve(h, validation_grad(spec, theta_star));
  HypergradEstimate est{Vector(spec.num_domains()), HypergradMethod::kExactIft, 0};
  for (int j = 0; j < spec.num_domains(); ++j) {
    est.g(j) = -z.dot(loss_grad(spec.domains[j], theta_star));
  }
  check_finite_estimate(est);
  return est;
}

PartialsOutcome unrolled_exact_partials(const ProblemSpec& spec, const MixtureWeights& w,
                                        const Vector& theta0, double eta, int T) {
  check_round_inputs(spec, w, theta0, T, 0);
  if (!(eta > 0.0) || !(eta * spec.L < 1.0)) {
    fail(ErrorCode::kStepSize, "unrolled step needs 0 < eta < 1/L, got eta=" + std::to_string(eta));
  }
  const int m = spec.num_domains();
  const Matrix h = weighted_hessian(spec, w.values()).entries();
  PartialsOutcome out{theta0, {std::vector<Vector>(m, Vector::Zero(spec.dim()))}};
  Vector& theta = out.theta_T;
  std::vector<Vector> grads(m);
  for (int t = 0; t < T; ++t) {
    Vector train = Vector::Zero(spec.dim());
    for (int j = 0; j < m; ++j) {
      grads[j] = loss_grad(spec.domains[j], theta);
      train += w[j] * grads[j];
    }
    for (int j = 0; j < m; ++j) {
      Vector& p = out.partials.u[j];
      p = p - eta * (h * p) - eta * grads[j];
    }
    theta -= eta * train;
  }
  return out;
}

RoundOutcome unrolled_exact_hypergrad(const ProblemSpec& spec, const MixtureWeights& w,
                                      const Vector& theta0, double eta, int T) {
  PartialsOutcome partials = unrolled_exact_partials(spec, w, theta0, eta, T);
  const Vector gv = validation_grad(spec, partials.theta_T);
  RoundOutcome out{std::move(partials.theta_T),
                   {Vector(spec.num_domains()), HypergradMethod::kUnrolledExact, T}};
  for (int j = 0; j < spec.num_domains(); ++j) out.estimate.g(j) = gv.dot(partials.partials.u[j]);
  check_finite_estimate(out.estimate);
  return out;
}

double frozen_step_limit(const ProblemSpec& spec, const HessianApproximator& approx) {
  return std::min(1.0 / approx.bounds.upper, spec.mu / (spec.L * spec.L));
}

RoundOutcome frozen_hessian_hypergrad(const ProblemSpec& spec, const MixtureWeights& w,
                                      const Vector& theta0, double eta, int T,
                                      const HessianApproximator& approx,
                                      const std::optional<NoiseModel>& noise,
                                      std::uint64_t round) {
  check_round_inputs(spec, w, theta0, T, 1);
  if (!(approx.bounds.lower > 0.0) || !(approx.bounds.upper >= approx.bounds.lower)) {
    fail(ErrorCode::kInvalidApproximator, "approximator bounds must satisfy 0 < mu_hat <= L_hat");
  }
  const double limit = frozen_step_limit(spec, approx);
  if (!(eta > 0.0) || !(eta < limit)) {
    fail(ErrorCode::kStepSize, "frozen-Hessian step needs 0 < eta < " + std::to_string(limit) +
                                   ", got eta=" + std::to_string(eta));
  }
  const bool stochastic = noise && noise->sigma > 0.0;
  const int m = spec.num_domains();
  const int d = spec.dim();
  const Matrix hk = approx.at(spec, w).entries();

  Vector theta = theta0;
  std::vector<Vector> u(m, Vector::Zero(d));
  std::vector<Vector> grads(m);
  for (int t = 0; t < T; ++t) {
    Vector train = Vector::Zero(d);
    for (int j = 0; j < m; ++j) {
      grads[j] = stochastic
                     ? stochastic_grad(spec.domains[j], theta, *noise,
                                       {round, static_cast<std::uint64_t>(t),
                                        static_cast<std::uint64_t>(j)})
                     : loss_grad(spec.domains[j], theta);
      train += w[j] * grads[j];
    }
    for (int j = 0; j < m; ++j) u[j] = u[j] - eta * (hk * u[j]) + grads[j];
    theta -= eta * train;
  }
  const Vector gv = stochastic
                        ? stochastic_grad(spec.validation, theta, *noise,
                                          {round, static_cast<std::uint64_t>(T), kValidationTag})
                        : validation_grad(spec, theta);
  RoundOutcome out{std::move(theta),
                   {Vector(m),
                    stochastic ? HypergradMethod::kFrozenHessianStochastic
                               : HypergradMethod::kFrozenHessian,
                    T}};
  for (int j = 0; j < m; ++j) out.estimate.g(j) = -eta * gv.dot(u[j]);
  check_finite_estimate(out.estimate);
  return out;
}

HypergradEstimate finite_diff_hypergrad(const ProblemSpec& spec, const MixtureWeights& w,
                                        double h) {
  check_same_size(w.size(), spec.num_domains(), "finite_diff_hypergrad");
  if (!(h > 0.0)) fail(ErrorCode::kShape, "finite-difference step must be positive");
  if (!(w.min() > h)) {
    fail(ErrorCode::kMarginViolation, "weights must exceed the finite-difference step h=" +
                                          std::to_string(h));
  }
  HypergradEstimate est{Vector(spec.num_domains()), HypergradMethod::kFiniteDiff, 0};
  for (int j = 0; j < spec.num_domains(); ++j) {
    Vector plus = w.values();
    Vector minus = w.values();
    plus(j) += h;
    minus(j) -= h;
    est.g(j) = (outer_objective_raw(spec, plus) - outer_objective_raw(spec, minus)) / (2.0 * h);
  }
  check_finite_estimate(est);
  return est;
}

double max_abs_diff(const Vector& a, const Vector& b) {
  check_same_size(a.size(), b.size(), "max_abs_diff");
  return a.size() == 0 ? 0.0 : (a - b).cwiseAbs().maxCoeff();
}

}  // namespace mixlab
