#pragma once

#include "cpm/tensor_steps.hpp"
#include "cpm/trace.hpp"

#include <functional>
#include <optional>
#include <string>

namespace cpm {

/// State (k, A_k, gamma_k, x_k, v_k) of the contracting proximal method.
struct OuterState {
    int k = 0;
    double A = 0.0;
    double gamma = 0.0;
    Vector x;
    Vector v;

    static OuterState initial(const Vector& x0, double gamma0);
};

/// Growth rule for the coefficients a_{k+1}.
class Schedule {
  public:
    enum class Kind { sublinear, geometric, custom };

    /// a_{k+1} = c (p+1) (k+1)^p, so c k^{p+1} <= A_k <= c (k+1)^{p+1}.
    static Schedule sublinear(double c, int p);
    /// a_1 given; a_{k+1} = omega/(1 - omega) A_k afterwards, so A_{k+1} = A_k/(1 - omega).
    static Schedule geometric(double omega, double a1);
    /// a_{k+1} = rule(k, A_k).
    static Schedule custom(std::string name, std::function<double(int, double)> rule);
    /// Positive root of a^2 = (a + A_k)/L.
    static Schedule accelerated_gradient(double lipschitz);

    double next(int k, double a_sum) const;
    Kind kind() const { return kind_; }
    double c() const { return c_; }
    int p() const { return p_; }
    double omega() const { return omega_; }
    double a1() const { return a1_; }
    Json describe() const;

  private:
    Kind kind_ = Kind::custom;
    double c_ = 0.0;
    int p_ = 1;
    double omega_ = 0.0;
    double a1_ = 0.0;
    std::string name_;
    std::function<double(int, double)> rule_;
};

/// c = p! gamma0 / (2^{p-1} (p+1)^{p+2} L_p).
double convex_schedule_constant(int p, double gamma0, double lipschitz);
/// omega = min{(sigma p! / (L_p (p+1) 2^{p-1}))^{1/(p+1)}, 1/2}.
double strongly_convex_omega(int p, double sigma, double lipschitz);

Schedule schedule_convex(int p, double gamma0, double lipschitz);
/// Geometric schedule with a_1 = c (p+1), c as in the convex case.
Schedule schedule_strongly_convex(int p, double sigma, double lipschitz, double gamma0 = 1.0);

/// Inner accuracies delta_k.
struct DeltaSchedule {
    enum class Kind { constant, power, theorem_convex, theorem_strongly_convex };
    Kind kind = Kind::power;
    double value = 0.0;  ///< constant delta (also the resolved theorem value)
    double c = 1.0;      ///< power: delta_k = c / k^s
    double s = 2.0;
    double eps = 0.0;    ///< theorem variants

    static DeltaSchedule constant(double delta);
    static DeltaSchedule power(double c, double s);
    static DeltaSchedule theorem_convex(double eps);
    static DeltaSchedule theorem_strongly_convex(double eps);
    /// Parses "const:<v>", "power:<c>,<s>" or "theorem".
    static DeltaSchedule parse(const std::string& text);

    /// delta_k for k >= 1; theorem kinds must be resolved first.
    double at(int k) const;
    std::string describe() const;
};

/// x_{k+1} = (a v + A_prev x_prev) / (A_prev + a).
Vector contraction_point(double a, double a_prev_sum, const Vector& v, const Vector& x_prev);

/// Solver for the regularized subproblem of one outer step.
class InnerSolver {
  public:
    virtual ~InnerSolver() = default;
    virtual InnerResult solve(const InnerSubproblem& sub, const Vector& z0, double delta, int cap) const = 0;
    virtual std::string name() const = 0;
};

/// Iterated tensor steps z_{t+1} = T_M(h; z_t).
class TensorInnerSolver final : public InnerSolver {
  public:
    explicit TensorInnerSolver(InnerOptions options = {}) : options_(options) {}
    InnerResult solve(const InnerSubproblem& sub, const Vector& z0, double delta, int cap) const override;
    std::string name() const override { return "tensor"; }

  private:
    InnerOptions options_;
};

/// Damped Newton on h with counted oracle calls; an exact solve for
/// quadratic h.
class NewtonInnerSolver final : public InnerSolver {
  public:
    InnerResult solve(const InnerSubproblem& sub, const Vector& z0, double delta, int cap) const override;
    std::string name() const override { return "newton"; }
};

struct StepOutcome {
    OuterState state;
    InnerResult inner;
    double a = 0.0;
};

/// One iteration of the contracting proximal method: builds h_{k+1}, finds
/// v_{k+1} with ||s||_* <= delta, contracts x, and updates A and gamma.
/// Throws SolverError when the inner solver fails.
StepOutcome cpm_step(const OuterState& state, const CompositeObjective& obj, const ProxPtr& d, double a_next,
                     double delta, const InnerSolver& inner, int inner_cap = 1000, double beta = 0.0);

/// R_k(p, delta) with gamma_i = gamma0 + sigma_d A_i. `deltas[i]` and
/// `a_sums[i]` belong to iteration i + 1.
double rk_bound(int p, double gamma0, double sigma_d, double bregman0, double sigma_unif,
                const std::vector<double>& deltas, const std::vector<double>& a_sums);

struct ComplexityBound {
    double delta = 0.0;
    int K = 0;
    double NK_bound = 0.0;
    double K_real = 0.0;  ///< value before the floor
    double log_term = 0.0;  ///< strongly convex case: the logarithm L
};

ComplexityBound complexity_convex(int p, double gamma0, double lipschitz, double bregman0, double eps);
ComplexityBound complexity_strongly_convex(int p, double gamma0, double lipschitz, double sigma, double bregman0,
                                           double eps);

/// delta(p) and K(p) with L/eps = beta_d = gamma0 = 1.
double curve_delta(int p);
double curve_k(int p);

enum class InnerKind { tensor, newton };

struct CptmConfig {
    int p = 1;
    double gamma0 = 1.0;
    std::optional<Schedule> schedule;  ///< default chosen from sigma_d(psi)
    DeltaSchedule delta = DeltaSchedule::power(1.0, 2.0);
    double eps = 1e-7;
    int cap_outer = 10000;
    int cap_inner = 0;            ///< 0: 4x the inner iteration bound when x* is known, else 1000
    double inner_cap_factor = 4.0;
    double beta = 0.0;            ///< 0: beta = p
    InnerKind inner = InnerKind::tensor;
    InnerOptions inner_options;
    std::optional<double> bregman0_bound;  ///< enables the certificate stop when F* is unknown
    std::string method_name = "cptm";
};

/// Contracting proximal tensor method. Stops when F(x_k) - F* <= eps
/// (F* known) or R_k/A_k <= eps (certificate). Never throws on solver
/// failure: the trace carries converged = false and the reason in `status`.
RunTrace run_cptm(const CompositeObjective& obj, const CptmConfig& config);

/// Same, with a caller-provided prox function (its order fixes p).
RunTrace run_cptm(const CompositeObjective& obj, const ProxPtr& d, const CptmConfig& config);

}  // namespace cpm
