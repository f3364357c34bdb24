#pragma once

// Mixture weights on the probability simplex and the entropic mirror-descent
// (exponentiated gradient) update.

#include <span>
#include <vector>

#include "mixlab/numerics.hpp"

namespace mixlab {

inline constexpr double kSimplexInputTol = 1e-9;
inline constexpr double kSimplexSumTol = 1e-12;

class MixtureWeights {
 public:
  MixtureWeights() = default;

  /// Validates non-negativity and unit sum (within tol), then renormalizes.
  static MixtureWeights from_values(Vector values, double tol = kSimplexInputTol);
  static MixtureWeights uniform(int m);
  static MixtureWeights vertex(int m, int j);

  int size() const { return static_cast<int>(values_.size()); }
  const Vector& values() const { return values_; }
  double operator[](int j) const { return values_(j); }
  double min() const { return values_.minCoeff(); }
  bool strictly_positive() const { return values_.size() > 0 && values_.minCoeff() > 0.0; }

  bool operator==(const MixtureWeights& other) const { return values_ == other.values_; }

 private:
  explicit MixtureWeights(Vector values) : values_(std::move(values)) {}
  Vector values_;
};

MixtureWeights uniform(int m);

/// w+_j = w_j exp(-alpha g_j) / sum_s w_s exp(-alpha g_s), evaluated in log space.
MixtureWeights md_update(const MixtureWeights& w, const Vector& g, double alpha);

/// sum_j p_j log(p_j / q_j), with 0 log 0 = 0. q must be strictly positive.
double kl_divergence(const MixtureWeights& p, const MixtureWeights& q);

/// Componentwise mean of a non-empty history.
MixtureWeights averaged_iterate(std::span<const MixtureWeights> history);

/// Euclidean projection of an arbitrary vector onto the simplex.
Vector project_to_simplex(const Vector& v);

}  // namespace mixlab
