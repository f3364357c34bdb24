#include <doctest.h>

#include <cmath>

#include "mixlab/losses.hpp"
#include "support.hpp"

using namespace mixlab;
using testsupport::Gen;
using testsupport::vec;

TEST_CASE("loss value, gradient and Hessian") {
  const QuadraticDomainLoss at_origin{SymMatrix::identity(1), vec({0}), 0.0};
  CHECK(loss_value(at_origin, vec({0})) == 0.0);

  const QuadraticDomainLoss shifted{SymMatrix::identity(1), vec({1}), 0.0};
  CHECK(loss_value(shifted, vec({0})) == doctest::Approx(0.5));

  const QuadraticDomainLoss iso{SymMatrix::scaled_identity(2, 2.0), vec({1, 1}), 0.0};
  CHECK(loss_value(iso, vec({0, 0})) == doctest::Approx(2.0));
  CHECK(loss_grad(iso, vec({1, 1})).norm() == 0.0);

  CHECK(loss_grad(at_origin, vec({-200}))(0) == doctest::Approx(-200.0));

  Matrix a(2, 2);
  a << 2, 1, 1, 2;
  const QuadraticDomainLoss coupled{SymMatrix(a), vec({0, 0}), 3.0};
  CHECK(loss_grad(coupled, vec({1, 1})).isApprox(vec({3, 3})));
  CHECK(loss_hessian(coupled).entries() == a);
  CHECK(loss_value(coupled, vec({0, 0})) == 3.0);
}

TEST_CASE("weighted training gradient") {
  const ProblemSpec spec = testsupport::scalar_example();
  CHECK(weighted_train_grad(spec, MixtureWeights::uniform(2), vec({0}))(0) == doctest::Approx(-0.5));
  CHECK(weighted_train_grad(spec, MixtureWeights::vertex(2, 1), vec({3}))(0) == doctest::Approx(2.0));

  const QuadraticDomainLoss l{SymMatrix::scaled_identity(2, 1.5), vec({1, -1}), 0.0};
  const ProblemSpec same = make_problem({l, l, l}, l, 5.0);
  const Vector theta = vec({0.3, 0.7});
  CHECK(weighted_train_grad(same, MixtureWeights::from_values(vec({0.2, 0.3, 0.5})), theta)
            .isApprox(loss_grad(l, theta)));

  bool rejected = false;
  try {
    weighted_train_grad(spec, MixtureWeights::from_values(vec({0.7, 0.7})), vec({0}));
  } catch (const Error& e) {
    rejected = e.code() == ErrorCode::kInvalidWeights;
  }
  CHECK(rejected);
}

TEST_CASE("weighted minimizer") {
  const ProblemSpec spec = testsupport::scalar_example();
  CHECK(weighted_minimizer(spec, MixtureWeights::vertex(2, 0))(0) == doctest::Approx(0.0));
  for (double w : {0.1, 0.5, 0.9}) {
    CHECK(weighted_minimizer(spec, MixtureWeights::from_values(vec({w, 1 - w})))(0) ==
          doctest::Approx(1.0 - w));
  }

  Gen gen(21);
  const Vector b = vec({0.4, -2.0, 1.0});
  std::vector<QuadraticDomainLoss> ds;
  for (int j = 0; j < 3; ++j) ds.push_back({SymMatrix(gen.spd(3, 0.5, 2.0)), b, 0.0});
  const ProblemSpec shared = make_problem(ds, ds[0], 5.0);
  for (int t = 0; t < 5; ++t) {
    const MixtureWeights w = MixtureWeights::from_values(gen.simplex(3));
    CHECK((weighted_minimizer(shared, w) - b).norm() < 1e-12);
  }
}

TEST_CASE("problem generators") {
  SUBCASE("scalar example") {
    const ProblemSpec p = generate_problem(ProblemKind::kQuad1dPaper, {}, 0);
    REQUIRE(p.num_domains() == 2);
    REQUIRE(p.dim() == 1);
    CHECK(p.domains[0].A(0, 0) == 1.0);
    CHECK(p.domains[0].b(0) == 0.0);
    CHECK(p.domains[1].A(0, 0) == 1.0);
    CHECK(p.domains[1].b(0) == 1.0);
    CHECK(p.validation.b(0) == 0.0);
    CHECK(p.validation.A(0, 0) == 1.0);
    CHECK(p.D == 1.0);
  }
  SUBCASE("isotropic when mu equals L") {
    GeneratorParams gp;
    gp.m = 4;
    gp.d = 3;
    gp.mu = 0.7;
    gp.L = 0.7;
    const ProblemSpec p = generate_problem(ProblemKind::kRandomStronglyConvex, gp, 5);
    for (const auto& dom : p.domains) CHECK(dom.A.entries() == 0.7 * Matrix::Identity(3, 3));
  }
  SUBCASE("aligned domain shares the validation minimizer") {
    GeneratorParams gp;
    gp.m = 3;
    gp.d = 2;
    gp.mu = 0.1;
    const ProblemSpec p = generate_problem(ProblemKind::kAlignedDomain, gp, 9);
    CHECK((p.validation.b - p.domains[0].b).norm() == 0.0);
  }
  SUBCASE("invalid parameters") {
    GeneratorParams gp;
    gp.m = 1;
    bool rejected = false;
    try {
      generate_problem(ProblemKind::kRandomStronglyConvex, gp, 0);
    } catch (const Error& e) {
      rejected = e.code() == ErrorCode::kBadGeneratorParams;
    }
    CHECK(rejected);
  }
}

TEST_CASE("property: generated problems satisfy their declared constants") {
  Gen gen(22);
  for (int trial = 0; trial < 60; ++trial) {
    GeneratorParams gp;
    gp.m = gen.integer(2, 6);
    gp.d = gen.integer(1, 6);
    gp.mu = gen.uniform(0.1, 1.0);
    gp.L = gp.mu + gen.uniform(0.0, 3.0);
    gp.spread = gen.uniform(0.5, 3.0);
    gp.operating_radius = gen.uniform(1.0, 20.0);
    const auto kind = trial % 2 ? ProblemKind::kAlignedDomain : ProblemKind::kRandomStronglyConvex;
    const ProblemSpec p = generate_problem(kind, gp, static_cast<std::uint64_t>(trial));

    double D = 0.0;
    for (int i = 0; i < p.num_domains(); ++i) {
      const Eigen::SelfAdjointEigenSolver<Matrix> es(p.domains[i].A.entries());
      CHECK(es.eigenvalues().minCoeff() >= p.mu * (1 - 1e-9));
      CHECK(es.eigenvalues().maxCoeff() <= p.L * (1 + 1e-9));
      for (int j = 0; j < p.num_domains(); ++j) D = std::max(D, (p.domains[i].b - p.domains[j].b).norm());
    }
    CHECK(p.D == doctest::Approx(D).epsilon(1e-12));
    CHECK(p.G >= p.L * (p.operating_radius + p.D) * (1 - 1e-12));

    // Gradient norms on the operating ball stay below G and G_V.
    const Vector center = p.operating_center();
    for (int k = 0; k < 20; ++k) {
      Vector dir = gen.normal_vector(p.dim());
      const Vector theta = center + gen.uniform(0.0, p.operating_radius) * dir / dir.norm();
      for (const auto& dom : p.domains) CHECK(loss_grad(dom, theta).norm() <= p.G * (1 + 1e-12));
      CHECK(validation_grad(p, theta).norm() <= p.G_V * (1 + 1e-12));
    }
  }
}

TEST_CASE("property: strong convexity and smoothness witnesses") {
  Gen gen(23);
  for (int trial = 0; trial < 40; ++trial) {
    GeneratorParams gp;
    gp.m = gen.integer(2, 4);
    gp.d = gen.integer(1, 6);
    gp.mu = gen.uniform(0.1, 1.0);
    gp.L = gp.mu + gen.uniform(0.0, 3.0);
    const ProblemSpec p = generate_problem(ProblemKind::kRandomStronglyConvex, gp, 100 + trial);
    const Vector center = p.operating_center();
    for (int k = 0; k < 20; ++k) {
      const Vector a = center + gen.normal_vector(p.dim(), 2.0);
      const Vector b = center + gen.normal_vector(p.dim(), 2.0);
      const double dist2 = (b - a).squaredNorm();
      for (const auto& dom : p.domains) {
        const double lower = loss_value(dom, a) + loss_grad(dom, a).dot(b - a) + 0.5 * p.mu * dist2;
        CHECK(loss_value(dom, b) >= lower - 1e-9 * (1 + std::abs(lower)));
        CHECK((loss_grad(dom, b) - loss_grad(dom, a)).norm() <= p.L * std::sqrt(dist2) * (1 + 1e-9));
      }
    }
  }
}

TEST_CASE("property: weighted minimizers stay within (2L/mu + 1) D of each other") {
  Gen gen(24);
  for (int trial = 0; trial < 60; ++trial) {
    GeneratorParams gp;
    gp.m = gen.integer(2, 5);
    gp.d = gen.integer(1, 5);
    gp.mu = gen.uniform(0.05, 1.0);
    gp.L = gp.mu + gen.uniform(0.0, 4.0);
    const ProblemSpec p = generate_problem(ProblemKind::kRandomStronglyConvex, gp, 200 + trial);
    const double bound = (2 * p.L / p.mu + 1) * p.D;
    for (int k = 0; k < 10; ++k) {
      const auto w1 = MixtureWeights::from_values(gen.simplex(gp.m));
      const auto w2 = MixtureWeights::from_values(gen.simplex(gp.m));
      const Vector t1 = weighted_minimizer(p, w1);
      CHECK((t1 - weighted_minimizer(p, w2)).norm() <= bound * (1 + 1e-12));
      CHECK(weighted_train_grad(p, w1, t1).norm() <= 1e-10 * (1 + p.L * t1.norm()));
      CHECK(outer_objective(p, w1) == doctest::Approx(testsupport::reference_outer(p, w1.values())));
    }
  }
}

TEST_CASE("stochastic gradients") {
  const QuadraticDomainLoss l{SymMatrix::identity(3), vec({1, 2, 3}), 0.0};
  const Vector theta = vec({0.5, -0.5, 2.0});
  const Vector exact = loss_grad(l, theta);

  CHECK(stochastic_grad(l, theta, NoiseModel{0.0, 4}, NoiseKey{1, 2, 0}) == exact);
  const NoiseModel noise{0.8, 77};
  CHECK(stochastic_grad(l, theta, noise, NoiseKey{3, 4, 1}) == stochastic_grad(l, theta, noise, NoiseKey{3, 4, 1}));
  CHECK(stochastic_grad(l, theta, noise, NoiseKey{3, 4, 1}) != stochastic_grad(l, theta, noise, NoiseKey{3, 4, 2}));

  SUBCASE("Monte-Carlo mean and second moment") {
    const int n = 100000;
    Vector sum = Vector::Zero(3);
    double sq = 0.0;
    for (int i = 0; i < n; ++i) {
      const Vector z = stochastic_grad(l, theta, noise, NoiseKey{static_cast<std::uint64_t>(i), 0, 0}) - exact;
      sum += z;
      sq += z.squaredNorm();
    }
    const Vector mean = sum / n;
    CHECK(mean.norm() <= 3 * noise.sigma / std::sqrt(static_cast<double>(n)));
    // E|z|^2 = sigma^2; allow a few standard errors of the chi-square estimate.
    CHECK(sq / n <= noise.sigma * noise.sigma * (1 + 4 * std::sqrt(2.0 / (3.0 * n))));
    CHECK(sq / n >= noise.sigma * noise.sigma * (1 - 4 * std::sqrt(2.0 / (3.0 * n))));
  }
}

TEST_CASE("problem JSON round trip") {
  GeneratorParams gp;
  gp.m = 3;
  gp.d = 2;
  gp.mu = 0.3;
  gp.L = 2.0;
  const ProblemSpec p = generate_problem(ProblemKind::kRandomStronglyConvex, gp, 3);
  const ProblemSpec q = problem_from_json(problem_to_json(p));
  REQUIRE(q.num_domains() == 3);
  for (int j = 0; j < 3; ++j) {
    CHECK(q.domains[j].A.entries() == p.domains[j].A.entries());
    CHECK(q.domains[j].b == p.domains[j].b);
  }
  CHECK(q.mu == p.mu);
  CHECK(q.G == p.G);
  CHECK(problem_to_json(q) == problem_to_json(p));

  bool rejected = false;
  try {
    problem_from_json(R"({"format":"mixlab.problem/1","dim":1,"bogus":1})");
  } catch (const Error& e) {
    rejected = e.code() == ErrorCode::kConfig || e.code() == ErrorCode::kIo;
  }
  CHECK(rejected);
}
