#pragma once

// Quadratic domain and validation losses, problem generators and the
// stochastic-gradient noise model.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mixlab/numerics.hpp"
#include "mixlab/rng.hpp"
#include "mixlab/simplex.hpp"

namespace mixlab {

/// l(theta) = 1/2 (theta - b)^T A (theta - b) + c
struct QuadraticDomainLoss {
  SymMatrix A;
  Vector b;
  double c = 0.0;

  int dim() const { return A.dim(); }
};

double loss_value(const QuadraticDomainLoss& loss, const Vector& theta);
Vector loss_grad(const QuadraticDomainLoss& loss, const Vector& theta);
const SymMatrix& loss_hessian(const QuadraticDomainLoss& loss);

/// A bilevel data-mixing problem together with the constants the convergence
/// analysis is stated in. G and G_V are certified on the operating ball
/// { theta : |theta - operating_center()| <= operating_radius }.
struct ProblemSpec {
  std::vector<QuadraticDomainLoss> domains;
  QuadraticDomainLoss validation;
  double mu = 0.0;
  double L = 0.0;
  double G = 0.0;
  double G_V = 0.0;
  double L_V = 0.0;
  double D = 0.0;
  double operating_radius = 0.0;

  int num_domains() const { return static_cast<int>(domains.size()); }
  int dim() const { return validation.dim(); }
  /// Mean of the domain minimizers.
  Vector operating_center() const;
};

/// Constants a caller may declare instead of the tight computed ones. Each one
/// is validated against its invariant.
struct DeclaredConstants {
  std::optional<double> mu, L, G, G_V, L_V;
};

ProblemSpec make_problem(std::vector<QuadraticDomainLoss> domains, QuadraticDomainLoss validation,
                         double operating_radius, const DeclaredConstants& declared = {});

/// Throws if any ProblemSpec invariant is violated.
void validate_problem(const ProblemSpec& spec);

/// sum_j w_j A_j for a raw (not necessarily normalized) non-negative weight vector.
SymMatrix weighted_hessian(const ProblemSpec& spec, const Vector& w);

/// sum_j w_j grad l_j(theta).
Vector weighted_train_grad(const ProblemSpec& spec, const MixtureWeights& w, const Vector& theta);

/// Closed-form argmin of the weighted training loss.
Vector weighted_minimizer(const ProblemSpec& spec, const MixtureWeights& w);
/// Same for any weight vector with sum_j w_j A_j positive definite.
Vector weighted_minimizer_raw(const ProblemSpec& spec, const Vector& w);

/// F(w) = L_V(theta*(w)).
double outer_objective(const ProblemSpec& spec, const MixtureWeights& w);
double outer_objective_raw(const ProblemSpec& spec, const Vector& w);

Vector validation_grad(const ProblemSpec& spec, const Vector& theta);

// ---------------------------------------------------------------------------
// Stochastic gradients

inline constexpr std::uint64_t kValidationTag = 0xFFFFFFFFull;

/// Isotropic Gaussian noise with E|xi|^2 = sigma^2. Draws are addressed by
/// (seed, round, step, tag) so a run is reproducible in any execution order.
struct NoiseModel {
  double sigma = 0.0;
  std::uint64_t seed = 0;
};

struct NoiseKey {
  std::uint64_t round = 0;
  std::uint64_t step = 0;
  std::uint64_t tag = 0;  // domain index, or kValidationTag
};

Vector noise_sample(const NoiseModel& noise, const NoiseKey& key, int dim);

Vector stochastic_grad(const QuadraticDomainLoss& loss, const Vector& theta,
                       const NoiseModel& noise, const NoiseKey& key);

// ---------------------------------------------------------------------------
// Generators

enum class ProblemKind { kQuad1dPaper, kRandomStronglyConvex, kAlignedDomain };

struct GeneratorParams {
  int m = 2;
  int d = 1;
  double mu = 1.0;
  double L = 1.0;
  double spread = 1.0;            // scale of the domain minimizers
  double operating_radius = 10.0;
};

ProblemKind parse_problem_kind(const std::string& name);
std::string problem_kind_name(ProblemKind kind);

/// quad-1d-paper ignores params except operating_radius. aligned-domain shares
/// the validation minimizer with domain 0 and draws an independent validation
/// curvature from the same spectrum range.
ProblemSpec generate_problem(ProblemKind kind, const GeneratorParams& params, std::uint64_t seed);

/// Random SPD matrix with eigenvalues in [lo, hi]; the extremes are attained when dim > 1.
SymMatrix random_spd(int dim, double lo, double hi, SplitMix64& rng);

// ---------------------------------------------------------------------------
// JSON persistence (schema "mixlab.problem/1")

std::string problem_to_json(const ProblemSpec& spec);
ProblemSpec problem_from_json(const std::string& text);
ProblemSpec load_problem(const std::string& path);
void save_problem(const ProblemSpec& spec, const std::string& path);

}  // namespace mixlab
