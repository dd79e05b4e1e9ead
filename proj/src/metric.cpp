#include "cpm/metric.hpp"

#include <cmath>

namespace cpm {

void require_same_dim(std::ptrdiff_t a, std::ptrdiff_t b, const char* what)
{
    if (a != b) {
        throw InvalidArgument(std::string(what) + ": dimension mismatch (" + std::to_string(a) +
                              " vs " + std::to_string(b) + ")");
    }
}

MetricOperator::MetricOperator(Matrix matrix) : matrix_(std::move(matrix))
{
    if (matrix_.rows() == 0 || matrix_.rows() != matrix_.cols()) {
        throw InvalidArgument("metric operator must be a non-empty square matrix");
    }
    if (!matrix_.allFinite()) {
        throw InvalidArgument("metric operator has non-finite entries");
    }
    const double scale = matrix_.cwiseAbs().maxCoeff();
    if ((matrix_ - matrix_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
        throw InvalidArgument("metric operator is not symmetric");
    }
    llt_.compute(matrix_);
    if (llt_.info() != Eigen::Success) {
        throw InvalidArgument("metric operator is not positive definite");
    }
    const auto diag = Matrix(llt_.matrixL()).diagonal();
    if (diag.minCoeff() <= 0.0) {
        throw InvalidArgument("metric operator is not positive definite");
    }
    identity_ = matrix_.isIdentity(0.0);
}

MetricOperator MetricOperator::identity(std::ptrdiff_t n)
{
    if (n < 1) {
        throw InvalidArgument("metric dimension must be >= 1");
    }
    return MetricOperator(Matrix::Identity(n, n));
}

Vector MetricOperator::apply(const Vector& x) const
{
    require_same_dim(x.size(), dim(), "MetricOperator::apply");
    if (identity_) {
        return x;
    }
    return matrix_ * x;
}

Vector MetricOperator::solve(const Vector& s) const
{
    require_same_dim(s.size(), dim(), "MetricOperator::solve");
    if (identity_) {
        return s;
    }
    return llt_.solve(s);
}

double MetricOperator::primal_norm(const Vector& x) const
{
    require_same_dim(x.size(), dim(), "primal_norm");
    if (identity_) {
        return x.norm();
    }
    // ||L^T x|| is <Bx, x>^{1/2} without cancellation.
    return (llt_.matrixU() * x).norm();
}

double MetricOperator::dual_norm(const Vector& s) const
{
    require_same_dim(s.size(), dim(), "dual_norm");
    if (identity_) {
        return s.norm();
    }
    return llt_.matrixL().solve(s).norm();
}

double duality_pairing(const Vector& s, const Vector& x)
{
    require_same_dim(s.size(), x.size(), "duality_pairing");
    return s.dot(x);
}

}  // namespace cpm
