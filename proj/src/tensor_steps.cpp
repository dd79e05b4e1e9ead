#include "cpm/tensor_steps.hpp"

#include <algorithm>
#include <cmath>

namespace cpm {

double factorial(int p)
{
    double r = 1.0;
    for (int i = 2; i <= p; ++i) {
        r *= i;
    }
    return r;
}

TaylorModel::TaylorModel(Vector base_point, int p, const SmoothEval& at_base)
    : base(std::move(base_point)), order(p), value(at_base.value), gradient(at_base.gradient)
{
    if (order < 1 || order > 2) {
        throw InvalidArgument("Taylor models are available for orders 1 and 2");
    }
    if (order == 2) {
        if (at_base.hessian.size() == 0) {
            throw InvalidArgument("second-order Taylor model needs a Hessian");
        }
        hessian = at_base.hessian;
    }
}

std::pair<double, Vector> TaylorModel::eval(const Vector& y) const
{
    require_same_dim(y.size(), base.size(), "TaylorModel::eval");
    const Vector h = y - base;
    if (order == 1) {
        return {value + gradient.dot(h), gradient};
    }
    const Vector hh = hessian * h;
    return {value + gradient.dot(h) + 0.5 * hh.dot(h), gradient + hh};
}

InnerSubproblem InnerSubproblem::contracted(const CompositeObjective& obj, ProxPtr d, double a, double a_prev_sum,
                                            Vector x_prev, Vector v, double gamma, double beta)
{
    if (!d) {
        throw InvalidArgument("subproblem needs a prox function");
    }
    if (!(a > 0.0) || a_prev_sum < 0.0) {
        throw InvalidArgument("subproblem needs a > 0 and A_prev >= 0");
    }
    if (gamma < 0.0) {
        throw InvalidArgument("subproblem needs gamma >= 0");
    }
    InnerSubproblem sub;
    sub.obj_ = &obj;
    sub.d_ = std::move(d);
    sub.p_ = sub.d_->order();
    sub.a_ = a;
    sub.a_prev_sum_ = a_prev_sum;
    sub.a_next_ = a_prev_sum + a;
    sub.x_prev_ = std::move(x_prev);
    sub.v_ = std::move(v);
    sub.gamma_ = gamma;
    sub.beta_ = beta > 0.0 ? beta : static_cast<double>(sub.p_);
    const double lf = obj.smooth->lipschitz(sub.p_);
    sub.lipschitz_g_ = std::pow(a, sub.p_ + 1) / std::pow(sub.a_next_, sub.p_) * lf;
    sub.m_ = sub.beta_ * sub.lipschitz_g_;
    sub.modulus_ = gamma + a * obj.simple->modulus(*sub.d_);
    require_same_dim(sub.x_prev_.size(), obj.dim(), "InnerSubproblem");
    require_same_dim(sub.v_.size(), obj.dim(), "InnerSubproblem");
    return sub;
}

InnerSubproblem InnerSubproblem::direct(const CompositeObjective& obj, ProxPtr d, int p, double m_constant)
{
    if (!(m_constant > 0.0)) {
        throw InvalidArgument("tensor step constant M must be positive");
    }
    InnerSubproblem sub;
    sub.obj_ = &obj;
    sub.d_ = d ? std::move(d) : std::make_shared<const PowerProx>(p, obj.x0, obj.metric);
    sub.p_ = p;
    sub.a_ = 1.0;
    sub.a_prev_sum_ = 0.0;
    sub.a_next_ = 1.0;
    sub.x_prev_ = Vector::Zero(obj.dim());
    sub.v_ = obj.x0;
    sub.gamma_ = 0.0;
    sub.m_ = m_constant;
    sub.lipschitz_g_ = obj.smooth->has_lipschitz(p) ? obj.smooth->lipschitz(p) : m_constant;
    sub.beta_ = m_constant / sub.lipschitz_g_;
    sub.modulus_ = obj.simple->modulus(*sub.d_);
    return sub;
}

Vector InnerSubproblem::contract(const Vector& z) const
{
    if (a_prev_sum_ == 0.0) {
        return z;
    }
    return (a_ * z + a_prev_sum_ * x_prev_) / a_next_;
}

double InnerSubproblem::phi(const Vector& z) const
{
    double r = 0.0;
    if (!obj_->simple->is_zero()) {
        r += a_ * obj_->simple->value(z);
    }
    if (gamma_ > 0.0) {
        r += gamma_ * d_->bregman(v_, z);
    }
    return r;
}

Vector InnerSubproblem::phi_gradient(const Vector& z) const
{
    Vector g = Vector::Zero(z.size());
    if (!obj_->simple->is_zero()) {
        g += a_ * obj_->simple->subgradient(z);
    }
    if (gamma_ > 0.0) {
        g += gamma_ * (d_->gradient(z) - d_->gradient(v_));
    }
    return g;
}

Matrix InnerSubproblem::phi_hessian(const Vector& z) const
{
    Matrix h = Matrix::Zero(z.size(), z.size());
    if (!obj_->simple->is_zero()) {
        h += a_ * obj_->simple->hessian(z);
    }
    if (gamma_ > 0.0) {
        h += gamma_ * d_->hessian(z);
    }
    return h;
}

SubproblemEval InnerSubproblem::assemble(const Vector& z, SmoothEval f_at) const
{
    SubproblemEval e;
    e.point = z;
    e.g.value = a_next_ * f_at.value;
    if (f_at.gradient.size() > 0) {
        e.g.gradient = a_ * f_at.gradient;
    }
    if (f_at.hessian.size() > 0) {
        e.g.hessian = (a_ * a_ / a_next_) * f_at.hessian;
    }
    e.phi = phi(z);
    e.h = e.g.value + e.phi;
    if (e.g.gradient.size() > 0) {
        e.h_gradient = e.g.gradient + phi_gradient(z);
    }
    return e;
}

SubproblemEval InnerSubproblem::evaluate(const Vector& z, int order) const
{
    return assemble(z, obj_->smooth->evaluate(contract(z), order));
}

SubproblemEval InnerSubproblem::peek(const Vector& z, int order) const
{
    return assemble(z, obj_->smooth->peek(contract(z), order));
}

namespace {

/// Step objective m(y) = Omega_p(g, x; y) + M/p! * ||y - x||^{p+1}/(p+1) + phi(y).
SmoothEval step_objective(const InnerSubproblem& sub, const TaylorModel& model, const PowerProx& reg, double reg_weight,
                          const Vector& y, int order)
{
    auto [mv, mg] = model.eval(y);
    SmoothEval e;
    // The constant model.value is dropped: it does not move the minimizer and
    // would swamp the line search in roundoff when |g| is large.
    e.value = (mv - model.value) + reg_weight * reg.value(y) + sub.phi(y);
    if (order >= 1) {
        e.gradient = mg + reg_weight * reg.gradient(y) + sub.phi_gradient(y);
    }
    if (order >= 2) {
        e.hessian = reg_weight * reg.hessian(y) + sub.phi_hessian(y);
        if (model.order == 2) {
            e.hessian += model.hessian;
        }
    }
    return e;
}

}  // namespace

TensorStepResult tensor_step(const InnerSubproblem& sub, const TaylorModel& model, double inner_tol,
                             SubsolverKind kind)
{
    if (!(inner_tol > 0.0)) {
        throw InvalidArgument("tensor step tolerance must be positive");
    }
    if (model.order != sub.order()) {
        throw InvalidArgument("Taylor model order differs from the subproblem order");
    }
    const int p = sub.order();
    const auto metric = sub.objective().metric;
    const PowerProx reg(p, model.base, metric);
    const double reg_weight = sub.m_constant() / factorial(p);
    const SmoothFunction fn = [&](const Vector& y, int order) {
        return step_objective(sub, model, reg, reg_weight, y, order);
    };

    if (p == 1 && kind == SubsolverKind::newton && sub.objective().simple->is_quadratic() && sub.prox().order() == 1) {
        // Quadratic step objective: one linear solve.
        const SmoothEval at_base = fn(model.base, 2);
        Eigen::LLT<Matrix> llt(at_base.hessian);
        if (llt.info() != Eigen::Success) {
            throw SolverError("tensor step: step objective Hessian is not positive definite");
        }
        const Vector y = model.base - llt.solve(at_base.gradient);
        const SmoothEval at_y = fn(y, 1);
        return {y, at_y.value, metric->dual_norm(at_y.gradient), 1};
    }

    NewtonOptions opts;
    opts.tolerance = inner_tol;
    NewtonResult res;
    if (kind == SubsolverKind::newton) {
        opts.max_iterations = 200;
        res = newton_minimize(fn, model.base, *metric, opts);
    } else {
        opts.max_iterations = 200000;
        const double lip0 = std::max(1e-12, sub.m_constant() + sub.modulus());
        res = gradient_minimize(fn, model.base, *metric, opts, lip0);
    }
    if (!res.converged) {
        throw SolverError("tensor step subproblem did not converge: residual " + std::to_string(res.gradient_norm) +
                          " > " + std::to_string(inner_tol) + " after " + std::to_string(res.iterations) +
                          " iterations");
    }
    return {res.x, res.value, res.gradient_norm, res.iterations};
}

TensorStepResult tensor_step(const InnerSubproblem& sub, const Vector& x, double inner_tol, SubsolverKind kind)
{
    const SubproblemEval at_x = sub.evaluate(x, sub.order());
    return tensor_step(sub, TaylorModel(x, sub.order(), at_x.g), inner_tol, kind);
}

Subgradient extract_subgradient(const InnerSubproblem& sub, const TaylorModel& model, const SubproblemEval& at_t)
{
    const int p = sub.order();
    const MetricOperator& metric = sub.metric();
    const Vector u = at_t.point - model.base;
    const double r = metric.primal_norm(u);
    const Vector reg_grad = (sub.m_constant() / factorial(p)) * std::pow(r, p - 1) * metric.apply(u);
    Subgradient s;
    s.exact = at_t.h_gradient;
    s.from_step = at_t.g.gradient - model.eval(at_t.point).second - reg_grad;
    s.exact_norm = metric.dual_norm(s.exact);
    s.from_step_norm = metric.dual_norm(s.from_step);
    return s;
}

Subgradient extract_subgradient(const InnerSubproblem& sub, const Vector& x, const Vector& t)
{
    const SubproblemEval at_x = sub.evaluate(x, sub.order());
    const SubproblemEval at_t = sub.evaluate(t, 1);
    return extract_subgradient(sub, TaylorModel(x, sub.order(), at_x.g), at_t);
}

double gradient_progress_factor(int p, double lipschitz_g, double beta)
{
    const double base = std::pow(factorial(p) / ((p + 1) * lipschitz_g), 1.0 / p);
    if (p == 1) {
        return base / beta;
    }
    const double e = (p - 1.0) / (2.0 * p);
    return base * std::pow(beta * beta - 1.0, e) / beta * p / std::pow(p * p - 1.0, e);
}

InnerResult inner_loop(const InnerSubproblem& sub, const Vector& z0, double delta, const InnerOptions& options)
{
    if (!(delta > 0.0)) {
        throw InvalidArgument("inner accuracy delta must be positive");
    }
    const int p = sub.order();
    const MetricOperator& metric = sub.metric();
    const OracleCounters start = sub.objective().smooth->counters();
    const double decf_factor = gradient_progress_factor(p, sub.lipschitz_g(), sub.beta());
    const double sub_tol = options.subsolver_tol_factor * delta;

    InnerResult res;
    SubproblemEval cur = sub.evaluate(z0, p);
    res.h_start = cur.h;
    double s_norm = metric.dual_norm(cur.h_gradient);
    if (options.keep_history) {
        res.history.push_back({cur.h, s_norm, 0.0, 0.0, true, true});
    }

    while (s_norm > delta) {
        if (res.iterations >= options.cap) {
            throw SolverError("inner loop exceeded its cap of " + std::to_string(options.cap) +
                              " steps; last ||h'||_* = " + std::to_string(s_norm) + " > delta = " +
                              std::to_string(delta));
        }
        const TaylorModel model(cur.point, p, cur.g);
        const TensorStepResult step = tensor_step(sub, model, sub_tol, options.subsolver);
        SubproblemEval next = sub.evaluate(step.point, p);
        const Subgradient sg = extract_subgradient(sub, model, next);

        InnerStepRecord rec;
        rec.h = next.h;
        rec.s_norm = metric.dual_norm(next.h_gradient);
        rec.descent_ok = next.h <= cur.h + options.check_rtol * std::max(1.0, std::abs(cur.h));
        rec.decf_lhs = sg.from_step.dot(cur.point - step.point);
        rec.decf_rhs = decf_factor * std::pow(sg.from_step_norm, (p + 1.0) / p);
        // An inexact step moves <s, z - T> by at most ||r||_* ||z - T||.
        const double inexact = step.residual_norm * metric.primal_norm(cur.point - step.point);
        const double noise_floor = 1e-14 * std::max(1.0, std::abs(cur.h));
        rec.decf_ok = rec.decf_rhs <= noise_floor ||
                      rec.decf_lhs >= rec.decf_rhs - options.check_rtol * (std::abs(rec.decf_lhs) + rec.decf_rhs) -
                                          inexact - 1e-300;
        res.descent_violations += rec.descent_ok ? 0 : 1;
        res.decf_violations += rec.decf_ok ? 0 : 1;
        res.max_step_residual = std::max(res.max_step_residual, step.residual_norm);
        if (options.keep_history) {
            res.history.push_back(rec);
        }

        cur = std::move(next);
        s_norm = rec.s_norm;
        ++res.iterations;
    }

    res.v = cur.point;
    res.s = cur.h_gradient;
    res.s_norm = s_norm;
    res.h = cur.h;
    res.oracle = sub.objective().smooth->counters() - start;
    return res;
}

double inner_iteration_bound(int p, double lipschitz_g, double gamma_next, double distance_term, double delta)
{
    const double ell = std::pow((p + 1) * lipschitz_g / factorial(p), 1.0 / p);
    const double mu = std::pow(gamma_next * std::pow(2.0, 1 - p), 1.0 / p);
    const double arg = ell * distance_term / std::pow(delta, (p + 1.0) / p);
    const double log_term = arg > 1.0 ? std::log(arg) : 0.0;
    return 2.0 + std::max(1.0, ell / mu) * (p + 1.0) / p * log_term;
}

}  // namespace cpm
