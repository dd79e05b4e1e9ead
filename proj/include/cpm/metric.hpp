#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>

namespace cpm {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Raised when an argument violates a documented precondition.
class InvalidArgument : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when an iterative method fails to reach its target within its cap.
class SolverError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

void require_same_dim(std::ptrdiff_t a, std::ptrdiff_t b, const char* what);

/// Symmetric positive-definite operator B defining the primal norm
/// ||x|| = <Bx, x>^{1/2} and the dual norm ||s||_* = <s, B^{-1} s>^{1/2}.
///
/// The Cholesky factor is computed once at construction; B^{-1} is never
/// formed. Immutable after construction.
class MetricOperator {
  public:
    /// Throws InvalidArgument if `matrix` is not square, not symmetric to
    /// relative tolerance 1e-12, or not positive definite.
    explicit MetricOperator(Matrix matrix);

    static MetricOperator identity(std::ptrdiff_t n);

    std::ptrdiff_t dim() const { return matrix_.rows(); }
    bool is_identity() const { return identity_; }
    const Matrix& matrix() const { return matrix_; }

    Vector apply(const Vector& x) const;
    Vector solve(const Vector& s) const;

    double primal_norm(const Vector& x) const;
    double dual_norm(const Vector& s) const;

  private:
    Matrix matrix_;
    Eigen::LLT<Matrix> llt_;
    bool identity_ = false;
};

using MetricPtr = std::shared_ptr<const MetricOperator>;

double duality_pairing(const Vector& s, const Vector& x);

}  // namespace cpm
