#include "mixlab/mixers.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "mixlab/format.hpp"

namespace mixlab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

HessianApproximator approximator_for(const ProblemSpec& spec, const RunConfig& config) {
  if (config.algorithm == Algorithm::kAlg1Exact) return make_approximator(ApproxMode::kExactAtOptimum, spec);
  return make_approximator(config.approx_mode, spec,
                           config.approx_mode == ApproxMode::kIsotropicGamma ? config.gamma
                                                                              : std::nullopt);
}

void check_eta(const ProblemSpec& spec, const RunConfig& config, const HessianApproximator& approx,
               double eta) {
  if (config.algorithm == Algorithm::kAlg1Exact) {
    if (!(eta > 0.0) || !(eta * spec.L < 1.0)) {
      fail(ErrorCode::kStepSize, "alg1 needs 0 < eta < 1/L = " + fmt_num(1.0 / spec.L) +
                                     ", got " + fmt_num(eta));
    }
    return;
  }
  const double limit = frozen_step_limit(spec, approx);
  if (!(eta > 0.0) || !(eta < limit)) {
    fail(ErrorCode::kStepSize,
         "eta must lie in (0, min(1/L_hat, mu/L^2)) = (0, " + fmt_num(limit) + "), got " + fmt_num(eta));
  }
}

}  // namespace

std::string algorithm_name(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::kAlg1Exact: return "alg1-exact";
    case Algorithm::kAlg2Frozen: return "alg2-frozen";
    case Algorithm::kAlg3Stochastic: return "alg3-stochastic";
  }
  return "unknown";
}

Algorithm parse_algorithm(const std::string& name) {
  if (name == "alg1-exact") return Algorithm::kAlg1Exact;
  if (name == "alg2-frozen") return Algorithm::kAlg2Frozen;
  if (name == "alg3-stochastic") return Algorithm::kAlg3Stochastic;
  fail(ErrorCode::kConfig, "unknown algorithm '" + name + "'");
}

Schedule resolve_schedule(const RunConfig& config) {
  if (config.T < 1) fail(ErrorCode::kConfig, "T must be >= 1");
  if (config.K < 0 || config.N < 0) fail(ErrorCode::kConfig, "K and N must be non-negative");
  Schedule s;
  if (config.N > 0) {
    const long long k = config.N / config.T;
    if (k < 1) fail(ErrorCode::kConfig, "budget N is smaller than the horizon T");
    if (config.K > 0 && config.K != k) {
      fail(ErrorCode::kConfig, "K disagrees with floor(N / T)");
    }
    if (k > std::numeric_limits<int>::max()) fail(ErrorCode::kConfig, "too many rounds");
    s.K = static_cast<int>(k);
    s.remainder = config.N - k * config.T;
  } else {
    if (config.K < 1) fail(ErrorCode::kConfig, "one of K or N must be positive");
    s.K = config.K;
  }
  return s;
}

int min_theorem_horizon(double eta, double mu) {
  return static_cast<int>(std::ceil(std::log(4.0) / (eta * mu)));
}

StepSizes auto_stepsizes(const ProblemSpec& spec, const RunConfig& config) {
  const Schedule schedule = resolve_schedule(config);
  const HessianApproximator approx = approximator_for(spec, config);
  const double m = spec.num_domains();
  const double mu_hat = approx.bounds.lower;
  StepSizes out;
  auto violation = [&](const std::string& what) {
    if (config.strict_regime) fail(ErrorCode::kRegimeNotMet, what);
    out.regime_ok = false;
    out.violations.push_back(what);
  };

  double g = spec.G;
  double gv = spec.G_V;
  if (config.algorithm == Algorithm::kAlg3Stochastic) {
    if (config.T < 2) violation("stochastic regime needs T >= 2, got T=" + std::to_string(config.T));
    const double t = std::max(config.T, 2);
    out.eta = config.eta.value_or(4.0 * std::log(t) / (spec.mu * t));
    const double limit = frozen_step_limit(spec, approx);
    if (!(out.eta < limit)) {
      violation("eta = " + fmt_num(out.eta) + " is not below min(1/L_hat, mu/L^2) = " + fmt_num(limit));
    }
    g = std::sqrt(g * g + config.sigma * config.sigma);
    gv = std::sqrt(gv * gv + config.sigma * config.sigma);
  } else {
    if (!config.eta) fail(ErrorCode::kConfig, algorithm_name(config.algorithm) + " needs an explicit eta");
    out.eta = *config.eta;
    const int floor_t = min_theorem_horizon(out.eta, spec.mu);
    if (config.T < floor_t) {
      violation("T = " + std::to_string(config.T) + " is below ceil(log 4 / (eta mu)) = " +
                std::to_string(floor_t));
    }
  }
  out.alpha = config.alpha.value_or(mu_hat * std::sqrt(std::log(m)) /
                                    (std::sqrt(static_cast<double>(schedule.K)) * g * gv));
  return out;
}

double iterate_bound_radius(const ProblemSpec& spec, const Vector& theta0, const MixtureWeights& w0) {
  const double start = (theta0 - weighted_minimizer(spec, w0)).norm();
  return 2.0 * std::max(start, (2.0 * spec.L / spec.mu + 1.0) * spec.D);
}

RunRecord run(const ProblemSpec& spec, const RunConfig& config) {
  const auto started = std::chrono::steady_clock::now();
  const Schedule schedule = resolve_schedule(config);
  if (config.sigma < 0.0 || !std::isfinite(config.sigma)) fail(ErrorCode::kConfig, "sigma must be >= 0");
  if (config.algorithm != Algorithm::kAlg3Stochastic && config.sigma != 0.0) {
    fail(ErrorCode::kConfig, "sigma applies only to alg3-stochastic");
  }
  const HessianApproximator approx = approximator_for(spec, config);

  RunRecord rec;
  rec.algorithm = config.algorithm;
  rec.T = config.T;
  rec.K = schedule.K;
  rec.budget_remainder = schedule.remainder;
  if (schedule.remainder > 0) {
    rec.notes.push_back("discarded budget remainder " + std::to_string(schedule.remainder));
  }

  if (config.eta && config.alpha) {
    rec.eta = *config.eta;
    rec.alpha = *config.alpha;
  } else {
    const StepSizes steps = auto_stepsizes(spec, config);
    rec.eta = steps.eta;
    rec.alpha = steps.alpha;
    for (const auto& v : steps.violations) rec.notes.push_back("theorem regime: " + v);
  }
  check_eta(spec, config, approx, rec.eta);
  if (!(rec.alpha > 0.0) || !std::isfinite(rec.alpha)) fail(ErrorCode::kConfig, "alpha must be positive");

  MixtureWeights w = config.w0 ? MixtureWeights::from_values(*config.w0)
                               : MixtureWeights::uniform(spec.num_domains());
  check_same_size(w.size(), spec.num_domains(), "w0");
  if (!w.strictly_positive()) fail(ErrorCode::kInvalidWeights, "w0 must be strictly positive");
  Vector theta = config.theta0 ? *config.theta0 : Vector::Zero(spec.dim());
  check_same_size(theta.size(), spec.dim(), "theta0");

  const bool deterministic = config.algorithm != Algorithm::kAlg3Stochastic || config.sigma == 0.0;
  rec.iterate_bound_checked = deterministic && config.T >= min_theorem_horizon(rec.eta, spec.mu);
  rec.iterate_bound = iterate_bound_radius(spec, theta, w);
  rec.F_star = config.f_star.value_or(kNaN);
  const Vector center = spec.operating_center();
  std::optional<NoiseModel> noise;
  if (config.algorithm == Algorithm::kAlg3Stochastic) noise = NoiseModel{config.sigma, config.seed};

  std::vector<MixtureWeights> history;
  history.reserve(schedule.K);
  rec.rounds.reserve(schedule.K + 1);
  for (int k = 0; k <= schedule.K; ++k) {
    RoundRecord r;
    r.k = k;
    r.w = w;
    r.theta0 = theta;
    r.F = outer_objective(spec, w);
    r.gap = r.F - rec.F_star;
    r.iterate_dist = (theta - weighted_minimizer(spec, w)).norm();
    if (rec.iterate_bound_checked && r.iterate_dist > rec.iterate_bound) ++rec.iterate_bound_violations;
    if ((theta - center).norm() > spec.operating_radius) ++rec.ball_violations;
    if (k == schedule.K) {
      r.hypergrad_err = kNaN;
      rec.rounds.push_back(std::move(r));
      break;
    }
    RoundOutcome out;
    try {
      out = config.algorithm == Algorithm::kAlg1Exact
                ? unrolled_exact_hypergrad(spec, w, theta, rec.eta, config.T)
                : frozen_hessian_hypergrad(spec, w, theta, rec.eta, config.T, approx, noise,
                                           static_cast<std::uint64_t>(k));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kNumericalAbort) throw;
      fail(ErrorCode::kNumericalAbort, "round " + std::to_string(k) + ": " + e.what());
    }
    r.g = out.estimate.g;
    r.hypergrad_err = max_abs_diff(r.g, exact_hypergrad(spec, w).g);
    rec.max_hypergrad_norm = std::max(rec.max_hypergrad_norm, r.g.cwiseAbs().maxCoeff());
    history.push_back(w);
    w = md_update(w, r.g, rec.alpha);
    if (!all_finite(out.theta_T) || !w.strictly_positive()) {
      fail(ErrorCode::kNumericalAbort, "round " + std::to_string(k) +
                                           ": non-finite iterate or weight underflow");
    }
    theta = std::move(out.theta_T);
    rec.rounds.push_back(std::move(r));
  }

  rec.w_final = w;
  rec.w_avg = averaged_iterate(history);
  rec.F_final = rec.rounds.back().F;
  rec.F_avg = outer_objective(spec, rec.w_avg);
  rec.gap_final = rec.F_final - rec.F_star;
  rec.gap_avg = rec.F_avg - rec.F_star;
  if (config.record_timing) {
    rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
  }
  return rec;
}

std::string run_record_csv(const RunRecord& record) {
  std::ostringstream out;
  const int m = record.w_final.size();
  out << "k";
  for (int j = 0; j < m; ++j) out << ",w_" << j;
  out << ",F,gap,hypergrad_err\n";
  for (const auto& r : record.rounds) {
    out << r.k;
    for (int j = 0; j < m; ++j) out << ',' << fmt_num(r.w[j]);
    out << ',' << fmt_num(r.F) << ',' << fmt_num(r.gap) << ',' << fmt_num(r.hypergrad_err) << '\n';
  }
  return out.str();
}

std::string run_record_json(const RunRecord& record) {
  using nlohmann::json;
  auto vec = [](const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  auto num = [](double x) { return std::isfinite(x) ? json(x) : json(nullptr); };
  json rounds = json::array();
  for (const auto& r : record.rounds) {
    rounds.push_back({{"k", r.k},
                      {"w", vec(r.w.values())},
                      {"theta0", vec(r.theta0)},
                      {"F", num(r.F)},
                      {"gap", num(r.gap)},
                      {"g", vec(r.g)},
                      {"hypergrad_err", num(r.hypergrad_err)},
                      {"iterate_dist", num(r.iterate_dist)}});
  }
  json doc = {{"algorithm", algorithm_name(record.algorithm)},
              {"eta", record.eta},
              {"alpha", record.alpha},
              {"T", record.T},
              {"K", record.K},
              {"budget_remainder", record.budget_remainder},
              {"w_final", vec(record.w_final.values())},
              {"w_avg", vec(record.w_avg.values())},
              {"F_final", num(record.F_final)},
              {"F_avg", num(record.F_avg)},
              {"F_star", num(record.F_star)},
              {"gap_final", num(record.gap_final)},
              {"gap_avg", num(record.gap_avg)},
              {"iterate_bound_checked", record.iterate_bound_checked},
              {"iterate_bound", num(record.iterate_bound)},
              {"iterate_bound_violations", record.iterate_bound_violations},
              {"ball_violations", record.ball_violations},
              {"max_hypergrad_norm", record.max_hypergrad_norm},
              {"notes", record.notes},
              {"wall_ms", record.wall_ms},
              {"rounds", rounds}};
  return doc.dump(2);
}

}  // namespace mixlab
