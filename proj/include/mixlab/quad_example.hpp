#pragma once

// Closed-form replay of the two-domain scalar example: l_1 = theta^2/2,
// l_2 = (theta - 1)^2/2, validation loss equal to l_1, start (theta, w) = (-R, 1/2).
// w is the weight of the first domain.

#include <vector>

namespace mixlab {

struct QuadRound {
  double theta_next = 0.0;
  double w_next = 0.0;
  double gbar = 0.0;
};

/// One round of T inner steps and one weight update, parameterized by w.
QuadRound closed_form_round(double theta, double w, double eta, double alpha, int T);

struct QuadLogitRound {
  double theta_next = 0.0;
  double phi_next = 0.0;
  double gbar = 0.0;
};

/// Same round in logit coordinates phi = log(w / (1 - w)); phi_next = phi - alpha gbar.
QuadLogitRound closed_form_round_logit(double theta, double phi, double eta, double alpha, int T);

double logistic(double phi);
double logit(double w);

struct QuadTrace {
  double R = 0.0;
  double eta = 0.0;
  double alpha = 0.0;
  int T = 0;
  int K = 0;
  long long N = 0;
  std::vector<double> theta;  // theta_{k,0}, k = 0..K
  std::vector<double> phi;    // k = 0..K
  std::vector<double> w;      // k = 0..K
  std::vector<double> gbar;   // k = 0..K-1
};

/// K = floor(N / T) rounds from (-R, 1/2).
QuadTrace simulate(double R, double eta, double alpha, int T, long long N);

/// Horizon at which the long-horizon guarantee is stated:
/// ceil((c + 1) log(2R + 1) / log(1 / (1 - eta))).
int recovery_horizon(double R, double eta, double c);

/// Threshold above which the greedy schedule provably fails:
/// eta N / ((1 - eta)(1 - (1 - eta)^N)).
double greedy_failure_threshold(double eta, long long N);

struct QuadReport {
  double R_bar = 0.0;
  // Greedy schedule (T = 1, R > R_bar): phi_N bounded above, w_N < 1/2.
  bool greedy_applicable = false;
  double greedy_phi_bound = 0.0;
  double greedy_margin = 0.0;  // bound - phi_N
  bool greedy_holds = false;
  // Long horizon (T = recovery_horizon): w_K >= e^{beta alpha/2} / (1 + e^{beta alpha/2}).
  double c = 1.0;
  int recovery_T = 0;
  bool recovery_applicable = false;
  double beta = 0.0;
  double recovery_w_bound = 0.0;
  double recovery_margin = 0.0;  // w_K - bound
  bool recovery_holds = false;
  double phi_final = 0.0;
  double w_final = 0.0;
};

QuadReport theorem_predicates(const QuadTrace& trace, double c = 1.0);

}  // namespace mixlab
