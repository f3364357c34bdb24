#include "mixlab/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

namespace mixlab {

MixtureWeights MixtureWeights::from_values(Vector values, double tol) {
  if (values.size() < 1) fail(ErrorCode::kInvalidWeights, "empty weight vector");
  if (!values.allFinite()) fail(ErrorCode::kInvalidWeights, "non-finite weight");
  if (values.minCoeff() < -tol) {
    fail(ErrorCode::kInvalidWeights, "negative weight " + std::to_string(values.minCoeff()));
  }
  const double sum = values.sum();
  if (std::abs(sum - 1.0) > tol) {
    fail(ErrorCode::kInvalidWeights, "weights sum to " + std::to_string(sum));
  }
  values = values.cwiseMax(0.0);
  values /= values.sum();
  return MixtureWeights(std::move(values));
}

MixtureWeights MixtureWeights::uniform(int m) {
  if (m < 1) fail(ErrorCode::kInvalidWeights, "uniform: m must be positive");
  return MixtureWeights(Vector::Constant(m, 1.0 / m));
}

MixtureWeights MixtureWeights::vertex(int m, int j) {
  if (m < 1 || j < 0 || j >= m) fail(ErrorCode::kInvalidWeights, "vertex index out of range");
  Vector v = Vector::Zero(m);
  v(j) = 1.0;
  return MixtureWeights(std::move(v));
}

MixtureWeights uniform(int m) { return MixtureWeights::uniform(m); }

MixtureWeights md_update(const MixtureWeights& w, const Vector& g, double alpha) {
  check_same_size(g.size(), w.size(), "md_update");
  if (!g.allFinite()) fail(ErrorCode::kInvalidHypergradient, "non-finite hypergradient");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    fail(ErrorCode::kInvalidHypergradient, "alpha must be positive and finite");
  }
  const int m = w.size();
  Vector logits(m);
  for (int j = 0; j < m; ++j) {
    logits(j) = w[j] > 0.0 ? std::log(w[j]) - alpha * g(j) : -INFINITY;
  }
  const double top = logits.maxCoeff();
  Vector next(m);
  for (int j = 0; j < m; ++j) next(j) = std::exp(logits(j) - top);
  next /= next.sum();
  return MixtureWeights::from_values(std::move(next), kSimplexSumTol * m);
}

double kl_divergence(const MixtureWeights& p, const MixtureWeights& q) {
  check_same_size(p.size(), q.size(), "kl_divergence");
  if (!q.strictly_positive()) fail(ErrorCode::kInvalidWeights, "kl_divergence: q has a zero entry");
  double kl = 0.0;
  for (int j = 0; j < p.size(); ++j) {
    if (p[j] > 0.0) kl += p[j] * std::log(p[j] / q[j]);
  }
  return std::max(kl, 0.0);
}

MixtureWeights averaged_iterate(std::span<const MixtureWeights> history) {
  if (history.empty()) fail(ErrorCode::kEmptyInput, "averaged_iterate: empty history");
  Vector sum = Vector::Zero(history.front().size());
  for (const auto& w : history) {
    check_same_size(w.size(), sum.size(), "averaged_iterate");
    sum += w.values();
  }
  sum /= static_cast<double>(history.size());
  return MixtureWeights::from_values(std::move(sum));
}

Vector project_to_simplex(const Vector& v) {
  const int m = static_cast<int>(v.size());
  std::vector<double> sorted(v.data(), v.data() + m);
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  double tau = 0.0;
  for (int i = 0; i < m; ++i) {
    cumulative += sorted[i];
    const double candidate = (cumulative - 1.0) / (i + 1);
    if (sorted[i] - candidate > 0.0) tau = candidate;
  }
  return (v.array() - tau).cwiseMax(0.0).matrix();
}

}  // namespace mixlab
