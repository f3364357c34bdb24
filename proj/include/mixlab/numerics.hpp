#pragma once

// Dense symmetric linear algebra shared by every other module.

#include <Eigen/Dense>

#include "mixlab/error.hpp"

namespace mixlab {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Tolerances and size limits. Defaults match the desk-scale use of the library.
struct NumericsConfig {
  int max_dim = 64;
  double symmetry_tol = 1e-12;   // relative, on construction of SymMatrix
  double solve_residual = 1e-10; // relative, spd_solve postcondition
};

const NumericsConfig& numerics_config();
void set_numerics_config(const NumericsConfig& config);

/// Closed interval [lower, upper] containing every eigenvalue of a matrix.
struct SpectrumBounds {
  double lower = 0.0;
  double upper = 0.0;

  bool contains(const SpectrumBounds& other, double tol = 0.0) const {
    return other.lower >= lower - tol && other.upper <= upper + tol;
  }
};

/// Dense symmetric matrix. Symmetry is checked on construction and the stored
/// entries are exactly symmetrized afterwards.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(Matrix entries);

  static SymMatrix identity(int dim);
  static SymMatrix scaled_identity(int dim, double scale);
  static SymMatrix diagonal(const Vector& diag);

  int dim() const { return static_cast<int>(entries_.rows()); }
  const Matrix& entries() const { return entries_; }
  double operator()(int i, int j) const { return entries_(i, j); }

  Vector apply(const Vector& v) const;
  /// Operator norm (largest absolute eigenvalue).
  double op_norm() const;
  SpectrumBounds spectrum() const;

  SymMatrix operator+(const SymMatrix& other) const;
  SymMatrix operator-(const SymMatrix& other) const;
  SymMatrix operator*(double s) const;

 private:
  Matrix entries_;
};

/// Eigenvalue extremes computed with a self-adjoint eigensolver.
SpectrumBounds spectrum_of(const SymMatrix& a);

/// Solves A x = b for symmetric positive definite A (Cholesky).
Vector spd_solve(const SymMatrix& a, const Vector& b);

/// (I - eta H)^power v. Requires 0 < eta < 1 / upper(H).
Vector contraction_apply(const SymMatrix& h, double eta, const Vector& v, int power);

/// eta * sum_{i < terms} (I - eta H)^i v, the truncated Neumann series for H^{-1} v.
Vector neumann_inverse_apply(const SymMatrix& h, double eta, const Vector& v, int terms);

/// Upper bound on the operator-norm error of the truncated Neumann series.
double neumann_tail_bound(double eta, double lower, int terms);

bool all_finite(const Vector& v);

void check_dim(int dim, const char* what);
void check_same_size(Eigen::Index a, Eigen::Index b, const char* what);

}  // namespace mixlab
