#pragma once

#include "cpm/objectives.hpp"

#include <vector>

namespace cpm {

/// p-th order Taylor model Omega_p(f, x; y) of a function around `base`.
struct TaylorModel {
    Vector base;
    int order = 1;  ///< 1 or 2
    double value = 0.0;
    Vector gradient;
    Matrix hessian;  ///< used only when order == 2

    TaylorModel() = default;
    TaylorModel(Vector base, int order, const SmoothEval& at_base);

    /// Model value and its gradient in y.
    std::pair<double, Vector> eval(const Vector& y) const;
};

/// Evaluation of h = g + phi at a point, with the parts the tensor step needs.
struct SubproblemEval {
    Vector point;
    SmoothEval g;  ///< contracted smooth part, up to the requested order
    double phi = 0.0;
    double h = 0.0;
    Vector h_gradient;  ///< exact gradient of h: a valid element of its subdifferential
};

enum class SubsolverKind {
    newton,       ///< damped Newton on the step subproblem (default)
    first_order,  ///< backtracking gradient method on the step subproblem
};

/// Regularized contracted subproblem
///   h(z) = A_next f((a z + A_prev x_prev)/A_next) + a psi(z) + gamma beta_d(v; z)
/// with the tensor-step constant M = beta L_p(g) and L_p(g) = a^{p+1}/A_next^p L_p(f).
class InnerSubproblem {
  public:
    /// Subproblem of one outer step of the contracting proximal method.
    static InnerSubproblem contracted(const CompositeObjective& obj, ProxPtr d, double a, double a_prev_sum,
                                      Vector x_prev, Vector v, double gamma, double beta = 0.0);
    /// h = F itself (a = 1, A_prev = 0, gamma = 0), stepped with a fixed M.
    static InnerSubproblem direct(const CompositeObjective& obj, ProxPtr d, int p, double m_constant);

    int order() const { return p_; }
    double a() const { return a_; }
    double a_next() const { return a_next_; }
    double gamma() const { return gamma_; }
    double m_constant() const { return m_; }
    double beta() const { return beta_; }
    double lipschitz_g() const { return lipschitz_g_; }
    /// Certified strong-convexity modulus of h relative to d: gamma + a sigma_d(psi).
    double modulus() const { return modulus_; }
    const MetricOperator& metric() const { return *obj_->metric; }
    const ProxFunction& prox() const { return *d_; }
    const CompositeObjective& objective() const { return *obj_; }
    const Vector& v() const { return v_; }

    Vector contract(const Vector& z) const;

    /// Counted evaluation of h at z; g derivatives up to `order`.
    SubproblemEval evaluate(const Vector& z, int order) const;
    /// Uncounted evaluation, for diagnostics.
    SubproblemEval peek(const Vector& z, int order) const;

    double phi(const Vector& z) const;
    Vector phi_gradient(const Vector& z) const;
    Matrix phi_hessian(const Vector& z) const;

  private:
    InnerSubproblem() = default;
    SubproblemEval assemble(const Vector& z, SmoothEval f_at) const;

    const CompositeObjective* obj_ = nullptr;
    ProxPtr d_;
    int p_ = 1;
    double a_ = 1.0;
    double a_prev_sum_ = 0.0;
    double a_next_ = 1.0;
    Vector x_prev_;
    Vector v_;
    double gamma_ = 0.0;
    double beta_ = 1.0;
    double lipschitz_g_ = 0.0;
    double m_ = 0.0;
    double modulus_ = 0.0;
};

struct TensorStepResult {
    Vector point;                  ///< T_M(h; x)
    double model_value = 0.0;      ///< value of the step objective at T
    double residual_norm = 0.0;    ///< dual norm of the step objective's gradient at T
    int subsolver_iterations = 0;
};

/// T_M(h; x) = argmin_y Omega_p(g, x; y) + M/(p+1)! ||y - x||^{p+1} + phi(y),
/// solved to `inner_tol` in the dual norm of the step objective's gradient.
/// For p = 1 with a quadratic phi the Newton subsolver is a single linear solve.
TensorStepResult tensor_step(const InnerSubproblem& sub, const TaylorModel& model, double inner_tol,
                             SubsolverKind kind = SubsolverKind::newton);
/// Convenience overload that evaluates g at x (one counted oracle call).
TensorStepResult tensor_step(const InnerSubproblem& sub, const Vector& x, double inner_tol,
                             SubsolverKind kind = SubsolverKind::newton);

struct Subgradient {
    Vector exact;     ///< grad g(T) + grad phi(T)
    Vector from_step; ///< grad g(T) - grad_y Omega_p(g, x; T) - M/p! ||T - x||^{p-1} B (T - x)
    double exact_norm = 0.0;
    double from_step_norm = 0.0;
};

/// h'(T) computed from the step's characteristic condition and directly.
/// The two agree up to the step subsolver residual.
Subgradient extract_subgradient(const InnerSubproblem& sub, const TaylorModel& model, const SubproblemEval& at_t);
Subgradient extract_subgradient(const InnerSubproblem& sub, const Vector& x, const Vector& t);

struct InnerOptions {
    int cap = 1000;
    double subsolver_tol_factor = 0.1;  ///< step subproblem tolerance = factor * delta
    SubsolverKind subsolver = SubsolverKind::newton;
    double check_rtol = 1e-10;          ///< relative slack of the per-step inequality checks
    bool keep_history = false;
};

struct InnerStepRecord {
    double h = 0.0;
    double s_norm = 0.0;
    double decf_lhs = 0.0;
    double decf_rhs = 0.0;
    bool descent_ok = true;
    bool decf_ok = true;
};

struct InnerResult {
    Vector v;
    Vector s;
    double s_norm = 0.0;
    double h = 0.0;
    int iterations = 0;
    OracleCounters oracle;
    int descent_violations = 0;  ///< steps with h(z_{t+1}) > h(z_t)
    int decf_violations = 0;     ///< steps violating the gradient-progress inequality
    double max_step_residual = 0.0;
    double h_start = 0.0;
    std::vector<InnerStepRecord> history;  ///< entry 0 is z0 (when keep_history)
};

/// Right-hand side factor of the gradient-progress inequality for M = beta L_p(g):
/// <h'(T), x - T> >= factor * ||h'(T)||_*^{(p+1)/p}.
double gradient_progress_factor(int p, double lipschitz_g, double beta);

/// z_{t+1} = T_M(h; z_t) from z0 until ||h'(z_t)||_* <= delta.
/// Throws SolverError when `options.cap` steps do not suffice.
InnerResult inner_loop(const InnerSubproblem& sub, const Vector& z0, double delta, const InnerOptions& options = {});

/// Number of inner steps sufficient for ||h'(z_t)||_* <= delta:
/// 2 + max{1, l/mu} (p+1)/p log(l D / delta^{(p+1)/p}), with the logarithm
/// clipped at zero (two steps always suffice once l D <= delta^{(p+1)/p}).
double inner_iteration_bound(int p, double lipschitz_g, double gamma_next, double distance_term, double delta);

double factorial(int p);

}  // namespace cpm
