#include "mixlab/numerics.hpp"

#include <cmath>
#include <string>

namespace mixlab {

namespace {

NumericsConfig& mutable_config() {
  static NumericsConfig config;
  return config;
}

void check_step(const SymMatrix& h, double eta) {
  const SpectrumBounds s = spectrum_of(h);
  if (!(eta > 0.0) || !(eta * s.upper < 1.0)) {
    fail(ErrorCode::kStepSize, "step-size violates contraction: eta=" + std::to_string(eta) +
                                   " upper(H)=" + std::to_string(s.upper));
  }
}

}  // namespace

const NumericsConfig& numerics_config() { return mutable_config(); }

void set_numerics_config(const NumericsConfig& config) { mutable_config() = config; }

const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kShape: return "shape error";
    case ErrorCode::kNotSpd: return "not SPD";
    case ErrorCode::kStepSize: return "step-size violation";
    case ErrorCode::kInvalidWeights: return "invalid weights";
    case ErrorCode::kInvalidHypergradient: return "invalid hypergradient";
    case ErrorCode::kBadGeneratorParams: return "bad generator params";
    case ErrorCode::kMarginViolation: return "margin violation";
    case ErrorCode::kEmptyInput: return "empty input";
    case ErrorCode::kInvalidApproximator: return "invalid approximator";
    case ErrorCode::kRegimeNotMet: return "theorem regime not met";
    case ErrorCode::kNumericalAbort: return "numerical abort";
    case ErrorCode::kConfig: return "config error";
    case ErrorCode::kIo: return "io error";
    case ErrorCode::kNonConvergence: return "non-convergence";
    case ErrorCode::kDegenerateFit: return "degenerate fit";
  }
  return "unknown error";
}

void check_dim(int dim, const char* what) {
  if (dim < 1 || dim > numerics_config().max_dim) {
    fail(ErrorCode::kShape, std::string(what) + ": dimension " + std::to_string(dim) +
                                " outside [1, " + std::to_string(numerics_config().max_dim) + "]");
  }
}

void check_same_size(Eigen::Index a, Eigen::Index b, const char* what) {
  if (a != b) {
    fail(ErrorCode::kShape, std::string(what) + ": size " + std::to_string(a) + " vs " +
                                std::to_string(b));
  }
}

SymMatrix::SymMatrix(Matrix entries) : entries_(std::move(entries)) {
  if (entries_.rows() != entries_.cols()) fail(ErrorCode::kShape, "SymMatrix must be square");
  check_dim(static_cast<int>(entries_.rows()), "SymMatrix");
  if (!entries_.allFinite()) fail(ErrorCode::kShape, "SymMatrix has non-finite entries");
  const double scale = std::max(1.0, entries_.cwiseAbs().maxCoeff());
  const double asym = (entries_ - entries_.transpose()).cwiseAbs().maxCoeff();
  if (asym > numerics_config().symmetry_tol * scale) {
    fail(ErrorCode::kShape, "matrix is not symmetric (max asymmetry " + std::to_string(asym) + ")");
  }
  entries_ = 0.5 * (entries_ + entries_.transpose()).eval();
}

SymMatrix SymMatrix::identity(int dim) { return scaled_identity(dim, 1.0); }

SymMatrix SymMatrix::scaled_identity(int dim, double scale) {
  check_dim(dim, "SymMatrix::scaled_identity");
  return SymMatrix(Matrix::Identity(dim, dim) * scale);
}

SymMatrix SymMatrix::diagonal(const Vector& diag) { return SymMatrix(Matrix(diag.asDiagonal())); }

Vector SymMatrix::apply(const Vector& v) const {
  check_same_size(v.size(), entries_.rows(), "SymMatrix::apply");
  return entries_ * v;
}

double SymMatrix::op_norm() const {
  const SpectrumBounds s = spectrum();
  return std::max(std::abs(s.lower), std::abs(s.upper));
}

SpectrumBounds SymMatrix::spectrum() const { return spectrum_of(*this); }

SymMatrix SymMatrix::operator+(const SymMatrix& other) const {
  check_same_size(other.dim(), dim(), "SymMatrix::operator+");
  return SymMatrix(entries_ + other.entries_);
}

SymMatrix SymMatrix::operator-(const SymMatrix& other) const {
  check_same_size(other.dim(), dim(), "SymMatrix::operator-");
  return SymMatrix(entries_ - other.entries_);
}

SymMatrix SymMatrix::operator*(double s) const { return SymMatrix(entries_ * s); }

SpectrumBounds spectrum_of(const SymMatrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(a.entries(), Eigen::EigenvaluesOnly);
  const Vector& ev = solver.eigenvalues();
  return {ev.minCoeff(), ev.maxCoeff()};
}

Vector spd_solve(const SymMatrix& a, const Vector& b) {
  check_same_size(b.size(), a.dim(), "spd_solve");
  Eigen::LLT<Matrix> llt(a.entries());
  if (llt.info() != Eigen::Success) fail(ErrorCode::kNotSpd, "Cholesky factorization failed");
  // LLT only inspects the lower triangle and the diagonal; a non-positive pivot
  // shows up as a failure above, tiny pivots are caught here.
  const Vector diag = llt.matrixL().toDenseMatrix().diagonal();
  if (!(diag.minCoeff() > 0.0)) fail(ErrorCode::kNotSpd, "non-positive Cholesky pivot");
  return llt.solve(b);
}

Vector contraction_apply(const SymMatrix& h, double eta, const Vector& v, int power) {
  check_same_size(v.size(), h.dim(), "contraction_apply");
  if (power < 0) fail(ErrorCode::kShape, "contraction_apply: negative power");
  check_step(h, eta);
  Vector x = v;
  for (int i = 0; i < power; ++i) x -= eta * (h.entries() * x);
  return x;
}

Vector neumann_inverse_apply(const SymMatrix& h, double eta, const Vector& v, int terms) {
  check_same_size(v.size(), h.dim(), "neumann_inverse_apply");
  if (terms < 1) fail(ErrorCode::kShape, "neumann_inverse_apply: terms must be positive");
  check_step(h, eta);
  // Horner form: acc <- v + (I - eta H) acc, repeated terms times.
  Vector acc = Vector::Zero(v.size());
  for (int i = 0; i < terms; ++i) acc = v + acc - eta * (h.entries() * acc);
  return eta * acc;
}

double neumann_tail_bound(double eta, double lower, int terms) {
  return std::pow(1.0 - eta * lower, terms) / lower;
}

bool all_finite(const Vector& v) { return v.allFinite(); }

}  // namespace mixlab
