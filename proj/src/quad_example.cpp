#include "mixlab/quad_example.hpp"

#include <cmath>
#include <string>

#include "mixlab/error.hpp"

namespace mixlab {

namespace {

void check_round(double eta, int T) {
  if (!(eta > 0.0 && eta < 1.0)) fail(ErrorCode::kStepSize, "eta must lie in (0, 1)");
  if (T < 1) fail(ErrorCode::kShape, "T must be >= 1");
}

}  // namespace

double logistic(double phi) {
  if (phi >= 0.0) return 1.0 / (1.0 + std::exp(-phi));
  const double e = std::exp(phi);
  return e / (1.0 + e);
}

double logit(double w) { return std::log(w) - std::log1p(-w); }

QuadLogitRound closed_form_round_logit(double theta, double phi, double eta, double alpha, int T) {
  check_round(eta, T);
  if (!std::isfinite(phi) || !std::isfinite(theta)) fail(ErrorCode::kNumericalAbort, "non-finite state");
  const double a = std::pow(1.0 - eta, T);
  QuadLogitRound out;
  out.theta_next = a * theta + logistic(-phi) * (1.0 - a);
  out.gbar = -out.theta_next * (1.0 - a);
  out.phi_next = phi - alpha * out.gbar;
  return out;
}

QuadRound closed_form_round(double theta, double w, double eta, double alpha, int T) {
  check_round(eta, T);
  if (!(w >= 0.0 && w <= 1.0)) fail(ErrorCode::kInvalidWeights, "w must lie in [0, 1]");
  const double a = std::pow(1.0 - eta, T);
  QuadRound out;
  out.theta_next = a * theta + (1.0 - w) * (1.0 - a);
  out.gbar = -out.theta_next * (1.0 - a);
  out.w_next = w / (w + (1.0 - w) * std::exp(alpha * out.gbar));
  return out;
}

QuadTrace simulate(double R, double eta, double alpha, int T, long long N) {
  if (!(R > 0.0)) fail(ErrorCode::kShape, "R must be positive");
  if (!(alpha > 0.0)) fail(ErrorCode::kShape, "alpha must be positive");
  check_round(eta, T);
  if (N < T) fail(ErrorCode::kShape, "budget N must allow at least one round");
  QuadTrace tr;
  tr.R = R;
  tr.eta = eta;
  tr.alpha = alpha;
  tr.T = T;
  tr.N = N;
  tr.K = static_cast<int>(N / T);
  tr.theta.reserve(tr.K + 1);
  tr.phi.reserve(tr.K + 1);
  tr.gbar.reserve(tr.K);
  double theta = -R;
  double phi = 0.0;
  for (int k = 0; k < tr.K; ++k) {
    tr.theta.push_back(theta);
    tr.phi.push_back(phi);
    const QuadLogitRound r = closed_form_round_logit(theta, phi, eta, alpha, T);
    tr.gbar.push_back(r.gbar);
    theta = r.theta_next;
    phi = r.phi_next;
  }
  tr.theta.push_back(theta);
  tr.phi.push_back(phi);
  tr.w.reserve(tr.K + 1);
  for (double p : tr.phi) tr.w.push_back(logistic(p));
  return tr;
}

int recovery_horizon(double R, double eta, double c) {
  return static_cast<int>(std::ceil((c + 1.0) * std::log(2.0 * R + 1.0) / std::log(1.0 / (1.0 - eta))));
}

double greedy_failure_threshold(double eta, long long N) {
  return eta * static_cast<double>(N) / ((1.0 - eta) * (1.0 - std::pow(1.0 - eta, static_cast<double>(N))));
}

QuadReport theorem_predicates(const QuadTrace& trace, double c) {
  if (!(c > 0.0)) fail(ErrorCode::kShape, "c must be positive");
  QuadReport rep;
  const double eta = trace.eta;
  const double alpha = trace.alpha;
  const double R = trace.R;
  const double n = static_cast<double>(trace.N);
  rep.c = c;
  rep.phi_final = trace.phi.back();
  rep.w_final = trace.w.back();
  rep.R_bar = greedy_failure_threshold(eta, trace.N);

  rep.greedy_applicable = trace.T == 1 && R > rep.R_bar;
  rep.greedy_phi_bound =
      eta * alpha * (n - (R + 1.0) * (1.0 - eta) * (1.0 - std::pow(1.0 - eta, n)) / eta);
  rep.greedy_margin = rep.greedy_phi_bound - rep.phi_final;
  rep.greedy_holds = rep.greedy_applicable && rep.phi_final <= rep.greedy_phi_bound && rep.w_final < 0.5;

  rep.recovery_T = recovery_horizon(R, eta, c);
  rep.recovery_applicable = trace.T == rep.recovery_T;
  const double base = 2.0 * R + 1.0;
  rep.beta = (1.0 - std::pow(base, -c)) * (1.0 - std::pow(base, -static_cast<double>(trace.K) * (c + 1.0)));
  rep.recovery_w_bound = logistic(rep.beta * alpha / 2.0);
  rep.recovery_margin = rep.w_final - rep.recovery_w_bound;
  rep.recovery_holds = rep.recovery_applicable && rep.recovery_margin >= 0.0;
  return rep;
}

}  // namespace mixlab
