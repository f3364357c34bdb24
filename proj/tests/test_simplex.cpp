#include <doctest.h>

#include <cmath>
#include <vector>

#include "mixlab/simplex.hpp"
#include "support.hpp"

using namespace mixlab;
using testsupport::Gen;
using testsupport::vec;

TEST_CASE("uniform weights") {
  CHECK(MixtureWeights::uniform(2).values() == vec({0.5, 0.5}));
  CHECK(MixtureWeights::uniform(1).values() == vec({1.0}));
  CHECK(MixtureWeights::uniform(4).values() == vec({0.25, 0.25, 0.25, 0.25}));
  CHECK_THROWS_AS(MixtureWeights::uniform(0), Error);
}

TEST_CASE("mirror-descent update examples") {
  const MixtureWeights w = MixtureWeights::uniform(2);
  CHECK(md_update(w, vec({0, 0}), 0.7).values() == w.values());
  CHECK(md_update(w, vec({3.5, 3.5}), 0.7).values().isApprox(w.values(), 1e-15));

  const MixtureWeights next = md_update(w, vec({-1, 0}), std::log(2.0));
  CHECK(next[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(next[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));

  bool rejected = false;
  try {
    md_update(w, vec({NAN, 0}), 1.0);
  } catch (const Error& e) {
    rejected = e.code() == ErrorCode::kInvalidHypergradient;
  }
  CHECK(rejected);
}

TEST_CASE("huge step sizes do not overflow") {
  const MixtureWeights w = MixtureWeights::from_values(vec({0.2, 0.3, 0.5}));
  const MixtureWeights next = md_update(w, vec({1e6, -1e6, 0}), 10.0);
  CHECK(std::isfinite(next[0]));
  CHECK(next[1] == doctest::Approx(1.0));
}

TEST_CASE("KL divergence") {
  const MixtureWeights u = MixtureWeights::uniform(3);
  CHECK(kl_divergence(u, u) == 0.0);
  for (int m : {2, 3, 7}) {
    CHECK(kl_divergence(MixtureWeights::vertex(m, 0), MixtureWeights::uniform(m)) ==
          doctest::Approx(std::log(static_cast<double>(m))));
  }
  // 0.75 log 3 + 0.25 log(1/3).
  const auto p = MixtureWeights::from_values(vec({0.75, 0.25}));
  const auto q = MixtureWeights::from_values(vec({0.25, 0.75}));
  CHECK(kl_divergence(p, q) == doctest::Approx(0.5 * std::log(3.0)));
  CHECK(kl_divergence(q, p) == doctest::Approx(0.5 * std::log(3.0)));
  CHECK_THROWS_AS(kl_divergence(p, MixtureWeights::vertex(2, 0)), Error);
}

TEST_CASE("averaged iterate") {
  const auto a = MixtureWeights::from_values(vec({0.2, 0.8}));
  std::vector<MixtureWeights> same{a, a, a};
  CHECK(averaged_iterate(same).values().isApprox(a.values()));

  std::vector<MixtureWeights> vertices{MixtureWeights::vertex(3, 0), MixtureWeights::vertex(3, 1)};
  CHECK(averaged_iterate(vertices).values() == vec({0.5, 0.5, 0.0}));

  std::vector<MixtureWeights> mixed{MixtureWeights::from_values(vec({0.1, 0.9})),
                                    MixtureWeights::from_values(vec({0.4, 0.6})),
                                    MixtureWeights::from_values(vec({0.7, 0.3}))};
  CHECK(averaged_iterate(mixed)[0] == doctest::Approx(0.4));
  CHECK(averaged_iterate(mixed)[1] == doctest::Approx(0.6));
  CHECK_THROWS_AS(averaged_iterate(std::vector<MixtureWeights>{}), Error);
}

TEST_CASE("property: updates stay on the simplex and are shift invariant") {
  Gen gen(31);
  for (int trial = 0; trial < 500; ++trial) {
    const int m = gen.integer(1, 8);
    const auto w = MixtureWeights::from_values(gen.simplex(m, 1e-6));
    // Exponent spread stays well inside double range; beyond it weights underflow
    // to zero and the driver aborts instead.
    const Vector g = gen.normal_vector(m, gen.uniform(0.1, 20.0));
    const double alpha = gen.uniform(1e-3, 2.0);
    const MixtureWeights next = md_update(w, g, alpha);
    CHECK(std::abs(next.values().sum() - 1.0) <= 1e-12);
    CHECK(next.strictly_positive());

    const double c = gen.uniform(-100.0, 100.0);
    const Vector shifted = (g.array() + c).matrix();
    CHECK((md_update(w, shifted, alpha).values() - next.values()).lpNorm<Eigen::Infinity>() <= 1e-12);

    // Direct evaluation of w_j exp(-alpha g_j) / sum, for moderate exponents.
    if (alpha * g.lpNorm<Eigen::Infinity>() < 300) {
      Vector ref(m);
      for (int j = 0; j < m; ++j) ref(j) = w[j] * std::exp(-alpha * g(j));
      ref /= ref.sum();
      CHECK((ref - next.values()).lpNorm<Eigen::Infinity>() <= 1e-12);
    }
  }
}

TEST_CASE("property: regret bound for entropic mirror descent") {
  Gen gen(32);
  for (int trial = 0; trial < 200; ++trial) {
    const int m = gen.integer(2, 8);
    const int K = gen.integer(1, 200);
    const double g_max = gen.uniform(0.1, 10.0);
    const double alpha = gen.uniform(0.001, 1.0);
    const auto u = MixtureWeights::from_values(gen.simplex(m));
    MixtureWeights w = MixtureWeights::uniform(m);
    double regret = 0.0;
    for (int k = 0; k < K; ++k) {
      Vector g(m);
      for (int j = 0; j < m; ++j) g(j) = gen.uniform(-g_max, g_max);
      regret += g.dot(w.values() - u.values());
      w = md_update(w, g, alpha);
    }
    CHECK(regret <= std::log(m) / alpha + K * alpha * g_max * g_max / 2.0 + 1e-9);
  }
}

TEST_CASE("projection onto the simplex") {
  CHECK(project_to_simplex(vec({0.2, 0.8})).isApprox(vec({0.2, 0.8})));
  CHECK(project_to_simplex(vec({2.0, 0.0})).isApprox(vec({1.0, 0.0})));
  CHECK(project_to_simplex(vec({1.0, 1.0, 1.0})).isApprox(vec({1.0, 1.0, 1.0}) / 3.0));
}
