#pragma once

#include "cpm/metric.hpp"
#include "cpm/newton.hpp"
#include "cpm/prox.hpp"

#include <json.hpp>

#include <atomic>
#include <cstdint>
#include <map>
#include <optional>

namespace cpm {

using Json = nlohmann::json;

/// Oracle call counts. Every solver-visible evaluation increments exactly
/// one of these.
struct OracleCounters {
    std::uint64_t value = 0;     ///< order-0 evaluations
    std::uint64_t gradient = 0;  ///< evaluations up to the gradient
    std::uint64_t hessian = 0;   ///< evaluations up to the Hessian
    std::uint64_t matvec = 0;    ///< products with the quadratic's matrix

    std::uint64_t total() const { return value + gradient + hessian + matvec; }
    OracleCounters operator-(const OracleCounters& o) const;
    bool operator==(const OracleCounters&) const = default;
};

/// Smooth part f of F = f + psi: derivatives up to `max_order()` and the
/// Lipschitz constants L_p(f) of the p-th derivative in the problem metric.
class SmoothOracle {
  public:
    virtual ~SmoothOracle() = default;

    virtual std::ptrdiff_t dim() const = 0;
    virtual int max_order() const = 0;

    /// Counted evaluation; `order` in {0, 1, 2} selects value, +gradient, +Hessian.
    SmoothEval evaluate(const Vector& x, int order) const;
    /// Uncounted evaluation for diagnostics and reference solves.
    SmoothEval peek(const Vector& x, int order) const;

    double lipschitz(int p) const;
    bool has_lipschitz(int p) const;
    void set_lipschitz(int p, double value);

    OracleCounters counters() const;

  protected:
    virtual SmoothEval compute(const Vector& x, int order) const = 0;
    virtual void count(int order) const;

    mutable std::atomic<std::uint64_t> n_value_{0};
    mutable std::atomic<std::uint64_t> n_gradient_{0};
    mutable std::atomic<std::uint64_t> n_hessian_{0};
    mutable std::atomic<std::uint64_t> n_matvec_{0};

  private:
    std::map<int, double> lipschitz_;
};

/// f(x) = 1/2 <Ax, x> - <b, x>. Every evaluation costs one product with A
/// and is counted as one mat-vec.
class QuadraticOracle final : public SmoothOracle {
  public:
    QuadraticOracle(Matrix a, Vector b);

    std::ptrdiff_t dim() const override { return b_.size(); }
    int max_order() const override { return 2; }
    const Matrix& matrix() const { return a_; }
    const Vector& linear() const { return b_; }

  protected:
    SmoothEval compute(const Vector& x, int order) const override;
    void count(int order) const override;

  private:
    Matrix a_;
    Vector b_;
};

/// f(x) = mu * ln sum_i exp((<a_i, x> - b_i)/mu), rows of `a` are the a_i.
class LogSumExpOracle final : public SmoothOracle {
  public:
    LogSumExpOracle(Matrix a, Vector b, double mu);

    std::ptrdiff_t dim() const override { return a_.cols(); }
    int max_order() const override { return 2; }
    double mu() const { return mu_; }
    const Matrix& rows() const { return a_; }
    const Vector& offsets() const { return b_; }

  protected:
    SmoothEval compute(const Vector& x, int order) const override;

  private:
    Matrix a_;
    Vector b_;
    double mu_;
};

using SmoothPtr = std::shared_ptr<SmoothOracle>;

/// Simple component psi of F = f + psi, with a subgradient selector and its
/// strong-convexity modulus relative to a prox function.
class SimpleComponent {
  public:
    virtual ~SimpleComponent() = default;
    virtual double value(const Vector& x) const = 0;
    virtual Vector subgradient(const Vector& x) const = 0;
    virtual Matrix hessian(const Vector& x) const = 0;
    /// sigma_d(psi) for the given prox function d (0 when unrelated).
    virtual double modulus(const ProxFunction& d) const = 0;
    virtual bool is_zero() const { return false; }
    /// True when psi is a quadratic form (constant Hessian).
    virtual bool is_quadratic() const { return false; }
    virtual Json describe() const = 0;
};

class ZeroComponent final : public SimpleComponent {
  public:
    explicit ZeroComponent(std::ptrdiff_t n) : n_(n) {}
    double value(const Vector&) const override { return 0.0; }
    Vector subgradient(const Vector&) const override { return Vector::Zero(n_); }
    Matrix hessian(const Vector&) const override { return Matrix::Zero(n_, n_); }
    double modulus(const ProxFunction&) const override { return 0.0; }
    bool is_zero() const override { return true; }
    bool is_quadratic() const override { return true; }
    Json describe() const override { return Json{{"kind", "zero"}}; }

  private:
    std::ptrdiff_t n_;
};

/// psi(x) = sigma * d(x) for a power prox d; its modulus with respect to
/// the same d is exactly sigma.
class PowerRegularizer final : public SimpleComponent {
  public:
    PowerRegularizer(double sigma, std::shared_ptr<const PowerProx> d);

    double value(const Vector& x) const override;
    Vector subgradient(const Vector& x) const override;
    Matrix hessian(const Vector& x) const override;
    double modulus(const ProxFunction& d) const override;
    Json describe() const override;
    bool is_quadratic() const override { return d_->order() == 1; }

    double sigma() const { return sigma_; }
    const PowerProx& prox() const { return *d_; }

  private:
    double sigma_;
    std::shared_ptr<const PowerProx> d_;
};

using SimplePtr = std::shared_ptr<const SimpleComponent>;

std::shared_ptr<const PowerRegularizer> power_regularizer_component(double sigma,
                                                                     std::shared_ptr<const PowerProx> d);

/// F = f + psi with the problem metric, the default starting point and,
/// when known, the optimum.
struct CompositeObjective {
    SmoothPtr smooth;
    SimplePtr simple;
    MetricPtr metric;
    Vector x0;
    std::optional<double> f_star;
    std::optional<Vector> x_star;
    Json descriptor;  ///< reconstructible instance description

    std::ptrdiff_t dim() const { return x0.size(); }
    /// Counted value of F.
    double value(const Vector& x) const;
    /// Uncounted value of F.
    double peek_value(const Vector& x) const;
};

/// Eigenvalues 1/(1 + exp(alpha (n + 1 - 2i)/(n - 1))), i = 1..n.
Vector sigmoid_spectrum(int n, double alpha);
/// alpha for which lambda_min / lambda_max = q.
double alpha_for_condition(double q);

/// With `unit_solution` the uniform vector b is rescaled so that
/// ||A^{-1} b|| = 1, i.e. x* lies at unit distance from x0 = 0.
CompositeObjective quadratic_instance(int n, double alpha, std::uint64_t seed, bool unit_solution = true);
CompositeObjective lse_instance(int n, double mu, std::uint64_t seed);

/// Replaces psi by sigma * d with d the power prox of order p centred at x0.
void attach_power_regularizer(CompositeObjective& obj, double sigma, int p);

/// Rebuilds an instance from its descriptor (kind, sizes, seed, overrides).
CompositeObjective instance_from_descriptor(const Json& descriptor);

struct ReferenceOptimum {
    Vector x;
    double value = 0.0;
};

/// Most accurate available solve of min F: closed form for an unregularized
/// quadratic, damped Newton otherwise. Throws SolverError when the gradient
/// norm does not reach `tol`.
ReferenceOptimum reference_optimum(const CompositeObjective& obj, double tol);

/// Computes the optimum, stores it in obj (f_star, x_star) and in the
/// descriptor.
void attach_reference_optimum(CompositeObjective& obj, double tol = 1e-12);

}  // namespace cpm
