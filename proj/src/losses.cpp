#include "mixlab/losses.hpp"

#include <cmath>
#include <string>

#include "mixlab/rng.hpp"

namespace mixlab {

namespace {

void check_loss(const QuadraticDomainLoss& loss, const Vector& theta, const char* what) {
  check_same_size(loss.b.size(), loss.A.dim(), what);
  check_same_size(theta.size(), loss.A.dim(), what);
}

void check_weights(const ProblemSpec& spec, const Vector& w, const char* what) {
  check_same_size(w.size(), spec.num_domains(), what);
  if (!w.allFinite() || w.minCoeff() < 0.0) {
    fail(ErrorCode::kInvalidWeights, std::string(what) + ": weights must be finite and non-negative");
  }
}

constexpr double kConstantTol = 1e-9;

}  // namespace

double loss_value(const QuadraticDomainLoss& loss, const Vector& theta) {
  check_loss(loss, theta, "loss_value");
  const Vector r = theta - loss.b;
  return 0.5 * r.dot(loss.A.entries() * r) + loss.c;
}

Vector loss_grad(const QuadraticDomainLoss& loss, const Vector& theta) {
  check_loss(loss, theta, "loss_grad");
  return loss.A.entries() * (theta - loss.b);
}

const SymMatrix& loss_hessian(const QuadraticDomainLoss& loss) { return loss.A; }

Vector ProblemSpec::operating_center() const {
  Vector center = Vector::Zero(dim());
  for (const auto& d : domains) center += d.b;
  return center / static_cast<double>(domains.size());
}

ProblemSpec make_problem(std::vector<QuadraticDomainLoss> domains, QuadraticDomainLoss validation,
                         double operating_radius, const DeclaredConstants& declared) {
  if (domains.size() < 2) fail(ErrorCode::kShape, "a problem needs at least two domains");
  ProblemSpec spec;
  spec.domains = std::move(domains);
  spec.validation = std::move(validation);
  spec.operating_radius = operating_radius;
  const int d = spec.validation.dim();
  check_same_size(spec.validation.b.size(), d, "validation minimizer");

  double lo = INFINITY;
  double hi = -INFINITY;
  for (const auto& loss : spec.domains) {
    check_same_size(loss.dim(), d, "domain dimension");
    check_same_size(loss.b.size(), d, "domain minimizer");
    const SpectrumBounds s = spectrum_of(loss.A);
    lo = std::min(lo, s.lower);
    hi = std::max(hi, s.upper);
  }
  double D = 0.0;
  for (std::size_t i = 0; i < spec.domains.size(); ++i) {
    for (std::size_t j = i + 1; j < spec.domains.size(); ++j) {
      D = std::max(D, (spec.domains[i].b - spec.domains[j].b).norm());
    }
  }
  const SpectrumBounds sv = spectrum_of(spec.validation.A);
  const double center_to_val = (spec.operating_center() - spec.validation.b).norm();

  spec.mu = declared.mu.value_or(lo);
  spec.L = declared.L.value_or(hi);
  spec.D = D;
  spec.L_V = declared.L_V.value_or(sv.upper);
  spec.G = declared.G.value_or(spec.L * (operating_radius + D));
  spec.G_V = declared.G_V.value_or(spec.L_V * (operating_radius + center_to_val));
  validate_problem(spec);
  return spec;
}

void validate_problem(const ProblemSpec& spec) {
  if (spec.num_domains() < 2) fail(ErrorCode::kShape, "a problem needs at least two domains");
  const int d = spec.dim();
  check_dim(d, "problem");
  if (!(spec.mu > 0.0)) fail(ErrorCode::kNotSpd, "mu must be positive");
  if (!(spec.L >= spec.mu)) fail(ErrorCode::kShape, "L must be at least mu");
  if (!(spec.operating_radius >= 0.0)) fail(ErrorCode::kShape, "operating_radius must be >= 0");

  double D = 0.0;
  for (int i = 0; i < spec.num_domains(); ++i) {
    const auto& loss = spec.domains[i];
    check_same_size(loss.dim(), d, "domain dimension");
    check_same_size(loss.b.size(), d, "domain minimizer");
    const SpectrumBounds s = spectrum_of(loss.A);
    if (s.lower < spec.mu * (1.0 - kConstantTol) || s.upper > spec.L * (1.0 + kConstantTol)) {
      fail(ErrorCode::kShape, "domain " + std::to_string(i) + " spectrum [" +
                                  std::to_string(s.lower) + ", " + std::to_string(s.upper) +
                                  "] outside declared [mu, L]");
    }
    for (int j = i + 1; j < spec.num_domains(); ++j) {
      D = std::max(D, (loss.b - spec.domains[j].b).norm());
    }
  }
  if (std::abs(D - spec.D) > kConstantTol * std::max(1.0, D)) {
    fail(ErrorCode::kShape, "D must equal the max pairwise minimizer distance");
  }
  if (spec.G < spec.L * (spec.operating_radius + spec.D) * (1.0 - kConstantTol)) {
    fail(ErrorCode::kShape, "G must be at least L (operating_radius + D)");
  }
  const SpectrumBounds sv = spectrum_of(spec.validation.A);
  if (!(sv.lower > 0.0)) fail(ErrorCode::kNotSpd, "validation curvature must be positive definite");
  if (spec.L_V < sv.upper * (1.0 - kConstantTol)) {
    fail(ErrorCode::kShape, "L_V must bound the validation curvature");
  }
  const double center_to_val = (spec.operating_center() - spec.validation.b).norm();
  if (spec.G_V < spec.L_V * (spec.operating_radius + center_to_val) * (1.0 - kConstantTol)) {
    fail(ErrorCode::kShape, "G_V must bound the validation gradient on the operating ball");
  }
}

SymMatrix weighted_hessian(const ProblemSpec& spec, const Vector& w) {
  check_weights(spec, w, "weighted_hessian");
  Matrix h = Matrix::Zero(spec.dim(), spec.dim());
  for (int j = 0; j < spec.num_domains(); ++j) h += w(j) * spec.domains[j].A.entries();
  return SymMatrix(std::move(h));
}

Vector weighted_train_grad(const ProblemSpec& spec, const MixtureWeights& w, const Vector& theta) {
  check_same_size(w.size(), spec.num_domains(), "weighted_train_grad");
  check_same_size(theta.size(), spec.dim(), "weighted_train_grad");
  Vector g = Vector::Zero(spec.dim());
  for (int j = 0; j < spec.num_domains(); ++j) g += w[j] * loss_grad(spec.domains[j], theta);
  return g;
}

Vector weighted_minimizer_raw(const ProblemSpec& spec, const Vector& w) {
  check_weights(spec, w, "weighted_minimizer");
  Vector rhs = Vector::Zero(spec.dim());
  for (int j = 0; j < spec.num_domains(); ++j) {
    rhs += w(j) * (spec.domains[j].A.entries() * spec.domains[j].b);
  }
  return spd_solve(weighted_hessian(spec, w), rhs);
}

Vector weighted_minimizer(const ProblemSpec& spec, const MixtureWeights& w) {
  return weighted_minimizer_raw(spec, w.values());
}

double outer_objective_raw(const ProblemSpec& spec, const Vector& w) {
  return loss_value(spec.validation, weighted_minimizer_raw(spec, w));
}

double outer_objective(const ProblemSpec& spec, const MixtureWeights& w) {
  return outer_objective_raw(spec, w.values());
}

Vector validation_grad(const ProblemSpec& spec, const Vector& theta) {
  return loss_grad(spec.validation, theta);
}

Vector noise_sample(const NoiseModel& noise, const NoiseKey& key, int dim) {
  if (noise.sigma == 0.0) return Vector::Zero(dim);
  const std::uint64_t base = hash_words(noise.seed, key.round, key.step, key.tag, 0x6e6f697365ull);
  const double scale = noise.sigma / std::sqrt(static_cast<double>(dim));
  Vector xi(dim);
  for (int i = 0; i < dim; ++i) xi(i) = scale * keyed_normal(base, static_cast<std::uint64_t>(i));
  return xi;
}

Vector stochastic_grad(const QuadraticDomainLoss& loss, const Vector& theta,
                       const NoiseModel& noise, const NoiseKey& key) {
  if (noise.sigma < 0.0) fail(ErrorCode::kConfig, "noise sigma must be non-negative");
  Vector g = loss_grad(loss, theta);
  if (noise.sigma > 0.0) g += noise_sample(noise, key, loss.dim());
  return g;
}

ProblemKind parse_problem_kind(const std::string& name) {
  if (name == "quad-1d-paper") return ProblemKind::kQuad1dPaper;
  if (name == "random-strongly-convex") return ProblemKind::kRandomStronglyConvex;
  if (name == "aligned-domain") return ProblemKind::kAlignedDomain;
  fail(ErrorCode::kBadGeneratorParams, "unknown problem kind '" + name + "'");
}

std::string problem_kind_name(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::kQuad1dPaper: return "quad-1d-paper";
    case ProblemKind::kRandomStronglyConvex: return "random-strongly-convex";
    case ProblemKind::kAlignedDomain: return "aligned-domain";
  }
  return "unknown";
}

SymMatrix random_spd(int dim, double lo, double hi, SplitMix64& rng) {
  if (lo == hi) return SymMatrix::scaled_identity(dim, lo);
  Matrix gauss(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) gauss(i, j) = rng.normal();
  }
  Eigen::HouseholderQR<Matrix> qr(gauss);
  Matrix q = qr.householderQ();
  Vector ev(dim);
  for (int i = 0; i < dim; ++i) ev(i) = rng.uniform(lo, hi);
  if (dim > 1) {
    ev(0) = lo;
    ev(dim - 1) = hi;
  }
  return SymMatrix(q * ev.asDiagonal() * q.transpose());
}

ProblemSpec generate_problem(ProblemKind kind, const GeneratorParams& p, std::uint64_t seed) {
  if (!(p.operating_radius >= 0.0)) fail(ErrorCode::kBadGeneratorParams, "operating_radius < 0");
  if (kind == ProblemKind::kQuad1dPaper) {
    const SymMatrix one = SymMatrix::identity(1);
    QuadraticDomainLoss first{one, Vector::Zero(1), 0.0};
    QuadraticDomainLoss second{one, Vector::Ones(1), 0.0};
    return make_problem({first, second}, first, p.operating_radius);
  }
  if (p.m < 2) fail(ErrorCode::kBadGeneratorParams, "m must be >= 2");
  if (p.d < 1 || p.d > numerics_config().max_dim) {
    fail(ErrorCode::kBadGeneratorParams, "d outside [1, max_dim]");
  }
  if (!(p.mu > 0.0) || !(p.L >= p.mu)) fail(ErrorCode::kBadGeneratorParams, "need 0 < mu <= L");
  if (!(p.spread >= 0.0)) fail(ErrorCode::kBadGeneratorParams, "spread must be >= 0");

  SplitMix64 rng(hash_words(seed, static_cast<std::uint64_t>(kind), 0x70726f62ull));
  const double scale = p.spread / std::sqrt(static_cast<double>(p.d));
  auto random_point = [&] {
    Vector b(p.d);
    for (int i = 0; i < p.d; ++i) b(i) = scale * rng.normal();
    return b;
  };
  std::vector<QuadraticDomainLoss> domains;
  for (int j = 0; j < p.m; ++j) {
    SymMatrix a = random_spd(p.d, p.mu, p.L, rng);
    domains.push_back({std::move(a), random_point(), 0.0});
  }
  SymMatrix val_a = random_spd(p.d, p.mu, p.L, rng);
  Vector val_b = kind == ProblemKind::kAlignedDomain ? Vector(domains.front().b) : random_point();
  QuadraticDomainLoss validation{std::move(val_a), std::move(val_b), 0.0};
  return make_problem(std::move(domains), std::move(validation), p.operating_radius);
}

}  // namespace mixlab
