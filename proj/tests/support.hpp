#pragma once

// Shared test helpers: hand-rolled random generators and reference
// implementations that do not go through the library code they check.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "mixlab/losses.hpp"
#include "mixlab/numerics.hpp"

namespace testsupport {

using mixlab::Matrix;
using mixlab::Vector;

inline Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

struct Gen {
  std::mt19937_64 rng;
  explicit Gen(std::uint64_t seed) : rng(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(rng); }

  Vector normal_vector(int d, double scale = 1.0) {
    Vector v(d);
    for (int i = 0; i < d; ++i) v(i) = scale * normal();
    return v;
  }

  // Q diag(lambda) Q^T with Q from Gram-Schmidt on a Gaussian matrix and the
  // eigenvalues drawn in [lo, hi] with both ends attained.
  Matrix spd(int d, double lo, double hi) {
    Matrix g(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) g(i, j) = normal();
    Matrix q = Matrix::Zero(d, d);
    for (int j = 0; j < d; ++j) {
      Vector col = g.col(j);
      for (int k = 0; k < j; ++k) col -= q.col(k).dot(col) * q.col(k);
      q.col(j) = col / col.norm();
    }
    Vector lam(d);
    for (int i = 0; i < d; ++i) lam(i) = uniform(lo, hi);
    lam(0) = lo;
    if (d > 1) lam(d - 1) = hi;
    Matrix a = q * lam.asDiagonal() * q.transpose();
    return 0.5 * (a + a.transpose());
  }

  // Uniform point on the simplex (normalized exponentials), optionally with a floor.
  Vector simplex(int m, double floor = 0.0) {
    Vector v(m);
    for (int i = 0; i < m; ++i) v(i) = -std::log(uniform(1e-12, 1.0));
    v /= v.sum();
    return floor > 0 ? ((1.0 - m * floor) * v).array() + floor : v;
  }
};

// Gaussian elimination with partial pivoting, used as an independent solve oracle.
inline Vector gauss_solve(Matrix a, Vector b) {
  const int n = static_cast<int>(a.rows());
  for (int c = 0; c < n; ++c) {
    int p = c;
    for (int r = c + 1; r < n; ++r)
      if (std::abs(a(r, c)) > std::abs(a(p, c))) p = r;
    a.row(c).swap(a.row(p));
    std::swap(b(c), b(p));
    for (int r = c + 1; r < n; ++r) {
      const double f = a(r, c) / a(c, c);
      a.row(r) -= f * a.row(c);
      b(r) -= f * b(c);
    }
  }
  Vector x(n);
  for (int r = n - 1; r >= 0; --r) {
    double s = b(r);
    for (int c = r + 1; c < n; ++c) s -= a(r, c) * x(c);
    x(r) = s / a(r, r);
  }
  return x;
}

// F(w) = L_V(theta*(w)) evaluated from first principles for unnormalized w.
inline double reference_outer(const mixlab::ProblemSpec& spec, const Vector& w) {
  const int d = spec.dim();
  Matrix h = Matrix::Zero(d, d);
  Vector rhs = Vector::Zero(d);
  for (int j = 0; j < spec.num_domains(); ++j) {
    h += w(j) * spec.domains[j].A.entries();
    rhs += w(j) * (spec.domains[j].A.entries() * spec.domains[j].b);
  }
  const Vector theta = gauss_solve(h, rhs);
  const Vector r = theta - spec.validation.b;
  return 0.5 * r.dot(spec.validation.A.entries() * r) + spec.validation.c;
}

// Two scalar domains l1 = theta^2/2, l2 = (theta - 1)^2/2, validation = l1.
inline mixlab::ProblemSpec scalar_example(double radius = 10.0) {
  using mixlab::QuadraticDomainLoss;
  using mixlab::SymMatrix;
  QuadraticDomainLoss l1{SymMatrix::identity(1), vec({0.0}), 0.0};
  QuadraticDomainLoss l2{SymMatrix::identity(1), vec({1.0}), 0.0};
  return mixlab::make_problem({l1, l2}, l1, radius);
}

}  // namespace testsupport
