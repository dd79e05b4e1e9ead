#pragma once

#include "cpm/metric.hpp"

namespace cpm {

/// Differentiable strictly convex prox function d together with its
/// uniform-convexity data: beta_d(x; y) >= sigma/(p+1) * ||x - y||^{p+1}.
class ProxFunction {
  public:
    virtual ~ProxFunction() = default;

    virtual int order() const = 0;
    virtual double value(const Vector& x) const = 0;
    virtual Vector gradient(const Vector& x) const = 0;
    /// Second derivative as a dense matrix. The default differentiates
    /// `gradient` numerically.
    virtual Matrix hessian(const Vector& x) const;
    virtual double uniform_convexity_constant() const = 0;
    virtual const MetricOperator& metric() const = 0;

    /// beta_d(x; y) = d(y) - d(x) - <grad d(x), y - x>, clipped at zero.
    virtual double bregman(const Vector& x, const Vector& y) const;
    /// sigma_{p+1}(d)/(p+1) * ||x - y||^{p+1}.
    double uniform_convexity_lower_bound(const Vector& x, const Vector& y) const;
};

/// d(x) = ||x - x0||^{p+1} / (p+1) in the metric B, with sigma_{p+1}(d) = 2^{1-p}.
class PowerProx final : public ProxFunction {
  public:
    PowerProx(int p, Vector center, MetricPtr metric);

    int order() const override { return p_; }
    double value(const Vector& x) const override;
    Vector gradient(const Vector& x) const override;
    Matrix hessian(const Vector& x) const override;
    double uniform_convexity_constant() const override;
    const MetricOperator& metric() const override { return *metric_; }
    double bregman(const Vector& x, const Vector& y) const override;

    const Vector& center() const { return center_; }
    const MetricPtr& metric_ptr() const { return metric_; }

  private:
    int p_;
    Vector center_;
    MetricPtr metric_;
};

using ProxPtr = std::shared_ptr<const ProxFunction>;

}  // namespace cpm
