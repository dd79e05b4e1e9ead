#include "cpm/contracting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>

namespace cpm {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double parse_number(const std::string& s, const std::string& context)
{
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw InvalidArgument("malformed number '" + s + "' in " + context);
    }
    if (used != s.size() || !std::isfinite(v)) {
        throw InvalidArgument("malformed number '" + s + "' in " + context);
    }
    return v;
}

}  // namespace

OuterState OuterState::initial(const Vector& x0, double gamma0)
{
    if (!(gamma0 > 0.0)) {
        throw InvalidArgument("gamma0 must be positive");
    }
    return OuterState{0, 0.0, gamma0, x0, x0};
}

Schedule Schedule::sublinear(double c, int p)
{
    if (!(c > 0.0) || p < 1) {
        throw InvalidArgument("sublinear schedule needs c > 0 and p >= 1");
    }
    Schedule s;
    s.kind_ = Kind::sublinear;
    s.c_ = c;
    s.p_ = p;
    s.a1_ = c * (p + 1);
    s.name_ = "sublinear";
    return s;
}

Schedule Schedule::geometric(double omega, double a1)
{
    if (!(omega > 0.0) || omega > 0.5 || !(a1 > 0.0)) {
        throw InvalidArgument("geometric schedule needs omega in (0, 1/2] and a1 > 0");
    }
    Schedule s;
    s.kind_ = Kind::geometric;
    s.omega_ = omega;
    s.a1_ = a1;
    s.name_ = "geometric";
    return s;
}

Schedule Schedule::custom(std::string name, std::function<double(int, double)> rule)
{
    if (!rule) {
        throw InvalidArgument("custom schedule needs a rule");
    }
    Schedule s;
    s.kind_ = Kind::custom;
    s.name_ = std::move(name);
    s.rule_ = std::move(rule);
    return s;
}

Schedule Schedule::accelerated_gradient(double lipschitz)
{
    if (!(lipschitz > 0.0)) {
        throw InvalidArgument("accelerated schedule needs L > 0");
    }
    Schedule s = custom("accelerated_gradient", [lipschitz](int, double a_sum) {
        return (1.0 + std::sqrt(1.0 + 4.0 * lipschitz * a_sum)) / (2.0 * lipschitz);
    });
    s.a1_ = 1.0 / lipschitz;
    return s;
}

double Schedule::next(int k, double a_sum) const
{
    switch (kind_) {
    case Kind::sublinear:
        return c_ * (p_ + 1) * std::pow(k + 1.0, p_);
    case Kind::geometric:
        return k == 0 ? a1_ : omega_ / (1.0 - omega_) * a_sum;
    case Kind::custom:
        break;
    }
    return rule_(k, a_sum);
}

Json Schedule::describe() const
{
    switch (kind_) {
    case Kind::sublinear:
        return Json{{"kind", "sublinear"}, {"c", c_}, {"p", p_}, {"a1", a1_}};
    case Kind::geometric:
        return Json{{"kind", "geometric"}, {"omega", omega_}, {"a1", a1_}};
    case Kind::custom:
        break;
    }
    return Json{{"kind", "custom"}, {"name", name_}};
}

double convex_schedule_constant(int p, double gamma0, double lipschitz)
{
    if (p < 1 || !(gamma0 > 0.0) || !(lipschitz > 0.0)) {
        throw InvalidArgument("schedule constant needs p >= 1, gamma0 > 0, L > 0");
    }
    return factorial(p) * gamma0 / (std::pow(2.0, p - 1) * std::pow(p + 1.0, p + 2) * lipschitz);
}

double strongly_convex_omega(int p, double sigma, double lipschitz)
{
    if (p < 1 || !(sigma > 0.0) || !(lipschitz > 0.0)) {
        throw InvalidArgument("omega needs p >= 1, sigma > 0, L > 0");
    }
    const double base = sigma * factorial(p) / (lipschitz * (p + 1) * std::pow(2.0, p - 1));
    return std::min(std::pow(base, 1.0 / (p + 1)), 0.5);
}

Schedule schedule_convex(int p, double gamma0, double lipschitz)
{
    return Schedule::sublinear(convex_schedule_constant(p, gamma0, lipschitz), p);
}

Schedule schedule_strongly_convex(int p, double sigma, double lipschitz, double gamma0)
{
    const double c = convex_schedule_constant(p, gamma0, lipschitz);
    return Schedule::geometric(strongly_convex_omega(p, sigma, lipschitz), c * (p + 1));
}

DeltaSchedule DeltaSchedule::constant(double delta)
{
    if (!(delta > 0.0)) {
        throw InvalidArgument("constant delta must be positive");
    }
    DeltaSchedule d;
    d.kind = Kind::constant;
    d.value = delta;
    return d;
}

DeltaSchedule DeltaSchedule::power(double c, double s)
{
    if (!(c > 0.0) || !(s > 1.0)) {
        throw InvalidArgument("power delta schedule needs c > 0 and s > 1");
    }
    DeltaSchedule d;
    d.kind = Kind::power;
    d.c = c;
    d.s = s;
    return d;
}

DeltaSchedule DeltaSchedule::theorem_convex(double eps)
{
    DeltaSchedule d;
    d.kind = Kind::theorem_convex;
    d.eps = eps;
    return d;
}

DeltaSchedule DeltaSchedule::theorem_strongly_convex(double eps)
{
    DeltaSchedule d;
    d.kind = Kind::theorem_strongly_convex;
    d.eps = eps;
    return d;
}

DeltaSchedule DeltaSchedule::parse(const std::string& text)
{
    if (text == "theorem") {
        return theorem_convex(0.0);
    }
    const auto colon = text.find(':');
    if (colon == std::string::npos) {
        throw InvalidArgument("delta schedule must be const:<v>, power:<c>,<s> or theorem; got '" + text + "'");
    }
    const std::string kind = text.substr(0, colon);
    const std::string rest = text.substr(colon + 1);
    if (kind == "const") {
        return constant(parse_number(rest, "delta schedule"));
    }
    if (kind == "power") {
        const auto comma = rest.find(',');
        if (comma == std::string::npos) {
            throw InvalidArgument("power delta schedule must be power:<c>,<s>; got '" + text + "'");
        }
        return power(parse_number(rest.substr(0, comma), "delta schedule"),
                     parse_number(rest.substr(comma + 1), "delta schedule"));
    }
    throw InvalidArgument("unknown delta schedule kind '" + kind + "'");
}

double DeltaSchedule::at(int k) const
{
    if (k < 1) {
        throw InvalidArgument("delta schedule is indexed from k = 1");
    }
    switch (kind) {
    case Kind::power:
        return c / std::pow(static_cast<double>(k), s);
    case Kind::constant:
        return value;
    default:
        if (!(value > 0.0)) {
            throw InvalidArgument("theorem delta schedule used before it was resolved");
        }
        return value;
    }
}

std::string DeltaSchedule::describe() const
{
    std::ostringstream out;
    out.precision(17);
    switch (kind) {
    case Kind::constant:
        out << "const:" << value;
        break;
    case Kind::power:
        out << "power:" << c << ',' << s;
        break;
    case Kind::theorem_convex:
        out << "theorem-convex:" << value;
        break;
    case Kind::theorem_strongly_convex:
        out << "theorem-strongly-convex:" << value;
        break;
    }
    return out.str();
}

Vector contraction_point(double a, double a_prev_sum, const Vector& v, const Vector& x_prev)
{
    if (!(a > 0.0) || a_prev_sum < 0.0) {
        throw InvalidArgument("contraction needs a > 0 and A_prev >= 0");
    }
    require_same_dim(v.size(), x_prev.size(), "contraction_point");
    if (a_prev_sum == 0.0) {
        return v;
    }
    return (a * v + a_prev_sum * x_prev) / (a + a_prev_sum);
}

InnerResult TensorInnerSolver::solve(const InnerSubproblem& sub, const Vector& z0, double delta, int cap) const
{
    InnerOptions opts = options_;
    opts.cap = cap;
    return inner_loop(sub, z0, delta, opts);
}

InnerResult NewtonInnerSolver::solve(const InnerSubproblem& sub, const Vector& z0, double delta, int cap) const
{
    if (!(delta > 0.0)) {
        throw InvalidArgument("inner accuracy delta must be positive");
    }
    const OracleCounters start = sub.objective().smooth->counters();
    const SmoothFunction fn = [&sub](const Vector& z, int order) {
        const SubproblemEval e = sub.evaluate(z, order);
        SmoothEval out;
        out.value = e.h;
        out.gradient = e.h_gradient;
        if (order >= 2) {
            out.hessian = e.g.hessian + sub.phi_hessian(z);
        }
        return out;
    };
    NewtonOptions opts;
    opts.tolerance = delta;
    opts.max_iterations = cap;
    const SubproblemEval first = sub.peek(z0, 0);
    const NewtonResult res = newton_minimize(fn, z0, sub.metric(), opts);
    if (!res.converged) {
        throw SolverError("Newton inner solver stopped at ||h'||_* = " + std::to_string(res.gradient_norm) +
                          " > delta = " + std::to_string(delta) + " after " + std::to_string(res.iterations) +
                          " iterations");
    }
    const SubproblemEval last = sub.peek(res.x, 1);
    InnerResult out;
    out.v = res.x;
    out.s = last.h_gradient;
    out.s_norm = sub.metric().dual_norm(out.s);
    out.h = last.h;
    out.h_start = first.h;
    out.iterations = res.iterations;
    out.oracle = sub.objective().smooth->counters() - start;
    return out;
}

StepOutcome cpm_step(const OuterState& state, const CompositeObjective& obj, const ProxPtr& d, double a_next,
                     double delta, const InnerSolver& inner, int inner_cap, double beta)
{
    if (!(a_next > 0.0)) {
        throw InvalidArgument("a_{k+1} must be positive");
    }
    const InnerSubproblem sub =
        InnerSubproblem::contracted(obj, d, a_next, state.A, state.x, state.v, state.gamma, beta);
    StepOutcome out;
    out.a = a_next;
    out.inner = inner.solve(sub, state.v, delta, inner_cap);
    out.state.k = state.k + 1;
    out.state.A = state.A + a_next;
    out.state.gamma = state.gamma + a_next * obj.simple->modulus(*d);
    out.state.v = out.inner.v;
    out.state.x = contraction_point(a_next, state.A, out.inner.v, state.x);
    return out;
}

double rk_bound(int p, double gamma0, double sigma_d, double bregman0, double sigma_unif,
                const std::vector<double>& deltas, const std::vector<double>& a_sums)
{
    if (deltas.size() != a_sums.size()) {
        throw InvalidArgument("rk_bound needs one A_i per delta_i");
    }
    if (p < 1 || !(gamma0 > 0.0) || sigma_d < 0.0 || bregman0 < 0.0 || !(sigma_unif > 0.0)) {
        throw InvalidArgument("rk_bound: invalid parameters");
    }
    const double q = p + 1.0;
    double sum = 0.0;
    for (std::size_t i = 0; i < deltas.size(); ++i) {
        const double gamma_i = gamma0 + sigma_d * a_sums[i];
        sum += deltas[i] / std::pow(gamma_i, 1.0 / q);
    }
    const double inner = std::pow(gamma0 * bregman0, p / q) + std::pow(q / sigma_unif, 1.0 / q) * sum;
    return std::pow(inner, q / p);
}

ComplexityBound complexity_convex(int p, double gamma0, double lipschitz, double bregman0, double eps)
{
    if (p < 1 || !(gamma0 > 0.0) || !(lipschitz > 0.0) || !(bregman0 > 0.0) || !(eps > 0.0)) {
        throw InvalidArgument("complexity_convex needs positive parameters");
    }
    const double pf = factorial(p);
    const double q = p + 1.0;
    ComplexityBound b;
    b.delta = std::pow(pf * eps / lipschitz, p / q) * gamma0 / (std::pow(2.0, p) * std::pow(q, q));
    b.K_real = 1.0 + std::pow(2.0, 1.0 / p) *
                         std::pow(std::pow(2.0, p - 1) * std::pow(q, p + 2) * lipschitz * bregman0 / (eps * pf), 1.0 / q);
    b.K = static_cast<int>(std::floor(b.K_real));
    const double log_arg = 4.0 * (1.0 + 1.0 / gamma0) * std::pow(q, 1.0 / p) * std::pow(b.K, p);
    b.NK_bound = b.K * (3.0 + q / p * std::log(log_arg));
    return b;
}

ComplexityBound complexity_strongly_convex(int p, double gamma0, double lipschitz, double sigma, double bregman0,
                                           double eps)
{
    if (p < 1 || !(gamma0 > 0.0) || !(lipschitz > 0.0) || !(sigma > 0.0) || !(bregman0 > 0.0) || !(eps > 0.0)) {
        throw InvalidArgument("complexity_strongly_convex needs positive parameters");
    }
    const double pf = factorial(p);
    const double q = p + 1.0;
    const double omega = strongly_convex_omega(p, sigma, lipschitz);
    ComplexityBound b;
    b.delta = std::pow(pf * eps / lipschitz, p / q) * gamma0 * p * omega /
              (std::pow(2.0, p) * std::pow(q, (q * q + 1.0) / q));
    const double first = std::pow(q, p) / std::pow(omega, q);
    const double second = lipschitz * bregman0 * std::pow(q, q) * std::pow(2.0, p + 1.0 / p) / (pf * eps);
    b.log_term = std::log(std::max(first, second));
    b.K_real = 2.0 + b.log_term / omega;
    b.K = static_cast<int>(std::floor(b.K_real));
    const double e = std::exp(1.0);
    const double lead = std::max(1.0, std::pow(4.0 * sigma * pf / (q * lipschitz), 1.0 / p));
    const double tail = lead * (1.0 + 1.0 / gamma0) * std::pow(q, (p + 2.0) / p) / std::pow(p, q / p) *
                        std::pow(2.0, (2.0 * p * p + p + 4.0) / p);
    b.NK_bound = b.K * (3.0 + (1.0 + e / ((e - 1.0) * p)) * (1.0 + b.log_term) + std::log(tail));
    return b;
}

double curve_delta(int p)
{
    const double q = p + 1.0;
    return std::pow(factorial(p), p / q) / (std::pow(2.0, p) * std::pow(q, q));
}

double curve_k(int p)
{
    return complexity_convex(p, 1.0, 1.0, 1.0, 1.0).K_real;
}

namespace {

double residual_of(const CompositeObjective& obj, double f)
{
    return obj.f_star ? f - *obj.f_star : kNaN;
}

}  // namespace

RunTrace run_cptm(const CompositeObjective& obj, const CptmConfig& config)
{
    const ProxPtr d = std::make_shared<const PowerProx>(config.p, obj.x0, obj.metric);
    return run_cptm(obj, d, config);
}

RunTrace run_cptm(const CompositeObjective& obj, const ProxPtr& d, const CptmConfig& config)
{
    if (!d) {
        throw InvalidArgument("run_cptm needs a prox function");
    }
    const int p = d->order();
    if (p > obj.smooth->max_order()) {
        throw InvalidArgument("objective does not provide derivatives of order " + std::to_string(p));
    }
    if (!(config.eps > 0.0) || config.cap_outer < 1 || !(config.gamma0 > 0.0)) {
        throw InvalidArgument("run_cptm needs eps > 0, cap_outer >= 1 and gamma0 > 0");
    }
    const double lipschitz = obj.smooth->lipschitz(p);
    const double sigma_psi = obj.simple->modulus(*d);
    const double sigma_unif = d->uniform_convexity_constant();
    const double beta = config.beta > 0.0 ? config.beta : static_cast<double>(p);

    std::optional<double> bregman0;
    if (obj.x_star) {
        bregman0 = d->bregman(obj.x0, *obj.x_star);
    } else if (config.bregman0_bound) {
        bregman0 = *config.bregman0_bound;
    }

    const Schedule schedule = config.schedule ? *config.schedule
                              : sigma_psi > 0.0 ? schedule_strongly_convex(p, sigma_psi, lipschitz, config.gamma0)
                                                : schedule_convex(p, config.gamma0, lipschitz);

    DeltaSchedule delta = config.delta;
    if (delta.kind == DeltaSchedule::Kind::theorem_convex || delta.kind == DeltaSchedule::Kind::theorem_strongly_convex) {
        const double eps = delta.eps > 0.0 ? delta.eps : config.eps;
        const bool strong = sigma_psi > 0.0;
        // The delta formulas do not involve beta_d(x0; x*); any positive value works here.
        const ComplexityBound b = strong ? complexity_strongly_convex(p, config.gamma0, lipschitz, sigma_psi, 1.0, eps)
                                         : complexity_convex(p, config.gamma0, lipschitz, 1.0, eps);
        delta.kind = strong ? DeltaSchedule::Kind::theorem_strongly_convex : DeltaSchedule::Kind::theorem_convex;
        delta.eps = eps;
        delta.value = b.delta;
    }

    std::unique_ptr<InnerSolver> inner;
    if (config.inner == InnerKind::newton) {
        inner = std::make_unique<NewtonInnerSolver>();
    } else {
        inner = std::make_unique<TensorInnerSolver>(config.inner_options);
    }

    RunTrace trace;
    trace.header = Json{{"method", config.method_name},
                        {"instance", obj.descriptor},
                        {"p", p},
                        {"gamma0", config.gamma0},
                        {"sigma_unif", sigma_unif},
                        {"sigma_psi", sigma_psi},
                        {"lipschitz", lipschitz},
                        {"beta", beta},
                        {"eps", config.eps},
                        {"schedule", schedule.describe()},
                        {"delta_schedule", delta.describe()},
                        {"inner_solver", inner->name()},
                        {"subsolver", config.inner_options.subsolver == SubsolverKind::newton ? "newton" : "first_order"},
                        {"subsolver_tol_factor", config.inner_options.subsolver_tol_factor},
                        {"cap_outer", config.cap_outer},
                        {"cap_inner", config.cap_inner},
                        {"inner_cap_factor", config.inner_cap_factor}};
    trace.header["f_star"] = obj.f_star ? Json(*obj.f_star) : Json(nullptr);
    trace.header["bregman0"] = bregman0 ? Json(*bregman0) : Json(nullptr);

    const OracleCounters start = obj.smooth->counters();
    OuterState state = OuterState::initial(obj.x0, config.gamma0);

    TraceRecord rec0;
    rec0.gamma = state.gamma;
    rec0.F = obj.peek_value(state.x);
    rec0.residual = residual_of(obj, rec0.F);
    rec0.delta_req = 0.0;
    rec0.s_norm = 0.0;
    rec0.breg_opt = obj.x_star ? d->bregman(state.v, *obj.x_star) : kNaN;
    rec0.inner_bound = 0.0;
    trace.append(rec0);

    std::vector<double> achieved;
    std::vector<double> a_sums;
    auto stop_reached = [&](const TraceRecord& r) {
        if (obj.f_star) {
            return r.residual <= config.eps;
        }
        if (bregman0 && r.A > 0.0) {
            const double rk = rk_bound(p, config.gamma0, sigma_psi, *bregman0, sigma_unif, achieved, a_sums);
            return rk / r.A <= config.eps;
        }
        return false;
    };
    if (stop_reached(rec0)) {
        trace.converged = true;
        trace.status = "converged";
        return trace;
    }

    double F_cur = rec0.F;
    for (int k = 0; k < config.cap_outer; ++k) {
        const double a_next = schedule.next(k, state.A);
        const double delta_k = delta.at(k + 1);

        double bound = kNaN;
        int cap = config.cap_inner > 0 ? config.cap_inner : 1000;
        if (obj.x_star && obj.f_star) {
            const double a_new = state.A + a_next;
            const double lip_g = std::pow(a_next, p + 1) / std::pow(a_new, p) * lipschitz;
            const double gamma_next = state.gamma + a_next * sigma_psi;
            const double ell = std::pow((p + 1) * lip_g / factorial(p), 1.0 / p);
            const double mu = std::pow(gamma_next * std::pow(2.0, 1 - p), 1.0 / p);
            const double b_opt = d->bregman(state.v, *obj.x_star);
            const double dist = state.A * std::max(0.0, F_cur - *obj.f_star) + state.gamma * b_opt +
                                std::pow(ell / mu, p) * b_opt;
            bound = inner_iteration_bound(p, lip_g, gamma_next, dist, delta_k);
            if (config.cap_inner <= 0) {
                cap = static_cast<int>(std::ceil(config.inner_cap_factor * bound));
            }
        }

        StepOutcome step;
        try {
            step = cpm_step(state, obj, d, a_next, delta_k, *inner, cap, beta);
        } catch (const SolverError& e) {
            trace.converged = false;
            trace.status = std::string("solver failure at k = ") + std::to_string(k + 1) + ": " + e.what();
            return trace;
        }

        TraceRecord r;
        r.k = step.state.k;
        r.A = step.state.A;
        r.gamma = step.state.gamma;
        r.a = step.a;
        r.F = obj.peek_value(step.state.x);
        r.residual = residual_of(obj, r.F);
        r.delta_req = delta_k;
        r.s_norm = step.inner.s_norm;
        r.inner_iterations = step.inner.iterations;
        r.oracle = obj.smooth->counters() - start;
        r.breg_step = d->bregman(state.v, step.state.v);
        r.breg_opt = obj.x_star ? d->bregman(step.state.v, *obj.x_star) : kNaN;
        r.inner_bound = bound;
        r.descent_violations = step.inner.descent_violations;
        r.decf_violations = step.inner.decf_violations;
        trace.append(r);

        achieved.push_back(step.inner.s_norm);
        a_sums.push_back(step.state.A);
        state = std::move(step.state);
        F_cur = r.F;

        if (!std::isfinite(r.F)) {
            trace.status = "non-finite objective at k = " + std::to_string(r.k);
            return trace;
        }
        if (stop_reached(r)) {
            trace.converged = true;
            trace.status = "converged";
            return trace;
        }
    }
    trace.status = "outer cap of " + std::to_string(config.cap_outer) + " iterations reached";
    return trace;
}

}  // namespace cpm
