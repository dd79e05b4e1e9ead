#include "cpm/prox.hpp"

#include <algorithm>
#include <cmath>

namespace cpm {

Matrix ProxFunction::hessian(const Vector& x) const
{
    const auto n = x.size();
    Matrix h(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const double step = 1e-6 * std::max(1.0, std::abs(x[j]));
        Vector xp = x;
        Vector xm = x;
        xp[j] += step;
        xm[j] -= step;
        h.col(j) = (gradient(xp) - gradient(xm)) / (2.0 * step);
    }
    return 0.5 * (h + h.transpose());
}

double ProxFunction::bregman(const Vector& x, const Vector& y) const
{
    require_same_dim(x.size(), y.size(), "bregman");
    const double v = value(y) - value(x) - gradient(x).dot(y - x);
    return std::max(v, 0.0);
}

double ProxFunction::uniform_convexity_lower_bound(const Vector& x, const Vector& y) const
{
    require_same_dim(x.size(), y.size(), "uniform_convexity_lower_bound");
    const int p = order();
    return uniform_convexity_constant() / (p + 1) * std::pow(metric().primal_norm(x - y), p + 1);
}

PowerProx::PowerProx(int p, Vector center, MetricPtr metric)
    : p_(p), center_(std::move(center)), metric_(std::move(metric))
{
    if (p_ < 1) {
        throw InvalidArgument("prox order must be >= 1");
    }
    if (!metric_) {
        throw InvalidArgument("prox function needs a metric");
    }
    require_same_dim(center_.size(), metric_->dim(), "PowerProx");
}

double PowerProx::value(const Vector& x) const
{
    const double r = metric_->primal_norm(x - center_);
    return std::pow(r, p_ + 1) / (p_ + 1);
}

Vector PowerProx::gradient(const Vector& x) const
{
    const Vector u = x - center_;
    Vector bu = metric_->apply(u);
    if (p_ == 1) {
        return bu;
    }
    const double r = metric_->primal_norm(u);
    return std::pow(r, p_ - 1) * bu;
}

Matrix PowerProx::hessian(const Vector& x) const
{
    const Vector u = x - center_;
    const Matrix& b = metric_->matrix();
    if (p_ == 1) {
        return b;
    }
    const double r = metric_->primal_norm(u);
    if (r == 0.0) {
        return Matrix::Zero(u.size(), u.size());
    }
    const Vector bu = metric_->apply(u);
    return std::pow(r, p_ - 1) * b + (p_ - 1) * std::pow(r, p_ - 3) * bu * bu.transpose();
}

double PowerProx::bregman(const Vector& x, const Vector& y) const
{
    if (p_ == 1) {
        require_same_dim(x.size(), y.size(), "bregman");
        const double r = metric_->primal_norm(y - x);
        return 0.5 * r * r;
    }
    return ProxFunction::bregman(x, y);
}

double PowerProx::uniform_convexity_constant() const
{
    return std::pow(2.0, 1 - p_);
}

}  // namespace cpm
