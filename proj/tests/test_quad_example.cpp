#include <doctest.h>

#include <cmath>

#include "mixlab/mixers.hpp"
#include "mixlab/quad_example.hpp"
#include "support.hpp"

using namespace mixlab;
using testsupport::Gen;
using testsupport::vec;

TEST_CASE("single round") {
  SUBCASE("all weight on the first domain contracts toward zero") {
    const QuadRound r = closed_form_round(-5.0, 1.0 - 1e-15, 0.2, 0.5, 4);
    CHECK(r.theta_next == doctest::Approx(std::pow(0.8, 4) * -5.0));
  }
  SUBCASE("a stationary start leaves the weight unchanged") {
    const double eta = 0.1, w = 0.3;
    const int T = 3;
    const double decay = std::pow(1 - eta, T);
    const double theta = -(1 - w) * (1 - decay) / decay;
    const QuadRound r = closed_form_round(theta, w, eta, 0.5, T);
    CHECK(std::abs(r.theta_next) < 1e-15);
    CHECK(r.w_next == doctest::Approx(w));
  }
  SUBCASE("hand arithmetic") {
    const QuadRound r = closed_form_round(-100.0, 0.5, 0.1, 0.5, 1);
    CHECK(r.theta_next == doctest::Approx(-89.95));
    CHECK(r.gbar == doctest::Approx(8.995));
    CHECK(r.w_next < 0.5);
    const QuadLogitRound l = closed_form_round_logit(-100.0, 0.0, 0.1, 0.5, 1);
    CHECK(l.phi_next == doctest::Approx(-0.5 * 8.995));
    CHECK(logistic(l.phi_next) == doctest::Approx(r.w_next));
  }
  SUBCASE("domain errors") {
    CHECK_THROWS_AS(closed_form_round(0, 0.5, 1.0, 0.5, 1), Error);
    CHECK_THROWS_AS(closed_form_round(0, 1.5, 0.1, 0.5, 1), Error);
    CHECK_THROWS_AS(closed_form_round(0, 0.5, 0.1, 0.5, 0), Error);
  }
}

TEST_CASE("thresholds") {
  // eta N / ((1 - eta)(1 - (1 - eta)^N)) with (0.9)^1000 negligible.
  CHECK(greedy_failure_threshold(0.1, 1000) == doctest::Approx(100.0 / 0.9));
  CHECK(recovery_horizon(200, 0.1, 1.0) ==
        static_cast<int>(std::ceil(2 * std::log(401.0) / std::log(10.0 / 9.0))));
  CHECK(recovery_horizon(200, 0.1, 1.0) == 114);
}

TEST_CASE("greedy failure and long-horizon recovery") {
  const double R = 200, eta = 0.1, alpha = 0.5;
  const long long N = 1000;

  const QuadTrace greedy = simulate(R, eta, alpha, 1, N);
  const QuadReport g = theorem_predicates(greedy);
  CHECK(g.R_bar == doctest::Approx(111.111111).epsilon(1e-8));
  CHECK(g.greedy_applicable);
  CHECK(g.greedy_holds);
  CHECK(greedy.w.back() < 0.5);
  CHECK(greedy.phi.back() <= eta * alpha * (N - (R + 1) * (1 - eta) * (1 - std::pow(1 - eta, N)) / eta));
  CHECK_FALSE(g.recovery_applicable);

  const int T = recovery_horizon(R, eta, 1.0);
  const QuadTrace longer = simulate(R, eta, alpha, T, N);
  const QuadReport r = theorem_predicates(longer);
  CHECK(longer.K == 8);
  CHECK(r.recovery_applicable);
  CHECK(r.recovery_holds);
  const double beta = (1 - 1 / 401.0) * (1 - std::pow(401.0, -16));
  CHECK(r.beta == doctest::Approx(beta));
  CHECK(r.recovery_w_bound == doctest::Approx(std::exp(beta * alpha / 2) / (1 + std::exp(beta * alpha / 2))));
  CHECK(r.recovery_margin == doctest::Approx(longer.w.back() - r.recovery_w_bound));
  CHECK(r.recovery_margin > 0);
  CHECK_FALSE(r.greedy_applicable);
}

TEST_CASE("vanishing weight step makes the recovery bound tight at one half") {
  const QuadTrace t = simulate(200, 0.1, 1e-9, recovery_horizon(200, 0.1, 1.0), 1000);
  const QuadReport r = theorem_predicates(t);
  CHECK(r.recovery_w_bound == doctest::Approx(0.5));
  CHECK(t.w.back() == doctest::Approx(0.5));
}

TEST_CASE("one round when T equals N") {
  const QuadTrace t = simulate(50, 0.1, 0.5, 200, 200);
  CHECK(t.K == 1);
  CHECK(t.gbar.size() == 1);
  CHECK(t.w.size() == 2);
}

TEST_CASE("starting near the optimum drifts toward the first domain") {
  for (int T : {1, 5, 30}) {
    const QuadTrace t = simulate(1e-6, 0.1, 0.5, T, 600);
    for (std::size_t k = 1; k < t.theta.size(); ++k) {
      if (t.theta[k] > 0) CHECK(t.w[k] >= t.w[k - 1]);
    }
    CHECK(t.w.back() > 0.5);
  }
}

TEST_CASE("property: logit decreases while the greedy iterate is negative") {
  const QuadTrace t = simulate(200, 0.1, 0.5, 1, 1000);
  for (std::size_t k = 1; k < t.phi.size(); ++k) {
    CHECK(t.phi[k] == doctest::Approx(t.phi[k - 1] + 0.1 * 0.5 * t.theta[k]).epsilon(1e-12));
    if (t.theta[k] < 0) CHECK(t.phi[k] < t.phi[k - 1]);
  }
}

TEST_CASE("property: recovery horizon makes the first iterate positive and weights increase") {
  Gen gen(61);
  for (int trial = 0; trial < 50; ++trial) {
    const double R = gen.uniform(1.0, 500.0);
    const double eta = gen.uniform(0.01, 0.5);
    const double c = gen.uniform(0.5, 2.0);
    const int T = recovery_horizon(R, eta, c);
    const QuadTrace t = simulate(R, eta, gen.uniform(0.1, 2.0), T, 6LL * T);
    CHECK(t.theta[1] >= 0.5 * (1 - std::pow(2 * R + 1, -c)));
    for (std::size_t k = 2; k < t.w.size(); ++k) CHECK(t.w[k] > t.w[k - 1]);
  }
}

TEST_CASE("property: closed form agrees with the generic driver") {
  Gen gen(62);
  const ProblemSpec spec = testsupport::scalar_example(1e4);
  for (int trial = 0; trial < 50; ++trial) {
    const double R = gen.uniform(0.5, 300.0);
    const double eta = gen.uniform(0.01, 0.9);
    const double alpha = gen.uniform(0.01, 1.0);
    const int T = gen.integer(1, 40);
    const long long N = T * gen.integer(1, 60);
    const QuadTrace trace = simulate(R, eta, alpha, T, N);

    RunConfig c;
    c.eta = eta;
    c.alpha = alpha;
    c.T = T;
    c.N = N;
    c.theta0 = vec({-R});
    const RunRecord rec = run(spec, c);
    REQUIRE(rec.rounds.size() == trace.w.size());
    for (std::size_t k = 0; k < trace.w.size(); ++k) {
      CHECK(std::abs(rec.rounds[k].w[0] - trace.w[k]) <= 1e-10);
      CHECK(std::abs(rec.rounds[k].theta0(0) - trace.theta[k]) <= 1e-10 * std::max(1.0, R));
    }
  }
}
