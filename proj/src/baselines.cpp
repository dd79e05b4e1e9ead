#include "cpm/baselines.hpp"

#include "cpm/contracting.hpp"
#include "cpm/tensor_steps.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cpm {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Trace bookkeeping shared by the baselines: uncounted monitoring of F,
/// cumulative counters relative to the start of the run.
class Recorder {
  public:
    Recorder(const CompositeObjective& obj, const std::string& method, const BaselineConfig& config)
        : obj_(obj), config_(config), start_(obj.smooth->counters())
    {
        if (!(config.eps > 0.0) || config.cap < 1) {
            throw InvalidArgument(method + ": needs eps > 0 and cap >= 1");
        }
        trace_.header = Json{{"method", method},
                             {"instance", obj.descriptor},
                             {"eps", config.eps},
                             {"cap_outer", config.cap},
                             {"line_search", {{"initial", config.ls_initial},
                                              {"increase", config.ls_increase},
                                              {"decrease", config.ls_decrease}}}};
        trace_.header["f_star"] = obj.f_star ? Json(*obj.f_star) : Json(nullptr);
    }

    Json& header() { return trace_.header; }

    /// Appends row k; returns true when the stopping rule is met.
    bool record(int k, const Vector& x, TraceRecord r = {})
    {
        r.k = k;
        r.F = obj_.peek_value(x);
        r.residual = obj_.f_star ? r.F - *obj_.f_star : kNaN;
        r.oracle = obj_.smooth->counters() - start_;
        if (std::isnan(r.breg_step)) {
            r.breg_step = 0.0;
        }
        r.breg_opt = kNaN;
        trace_.append(r);
        if (!std::isfinite(r.F)) {
            trace_.status = "non-finite objective at k = " + std::to_string(k);
            finished_ = true;
            return true;
        }
        if (obj_.f_star && r.residual <= config_.eps) {
            trace_.converged = true;
            trace_.status = "converged";
            finished_ = true;
            return true;
        }
        return false;
    }

    RunTrace fail(int k, const std::string& what)
    {
        trace_.converged = false;
        trace_.status = "solver failure at k = " + std::to_string(k) + ": " + what;
        return std::move(trace_);
    }

    RunTrace finish()
    {
        if (!finished_) {
            trace_.status = "outer cap of " + std::to_string(config_.cap) + " iterations reached";
        }
        return std::move(trace_);
    }

  private:
    const CompositeObjective& obj_;
    const BaselineConfig& config_;
    OracleCounters start_;
    RunTrace trace_;
    bool finished_ = false;
};

void require_smooth_only(const CompositeObjective& obj, const std::string& method)
{
    if (!obj.simple->is_zero()) {
        throw InvalidArgument(method + " supports only psi = 0");
    }
}

void require_positive(double v, const std::string& what)
{
    if (!(v > 0.0)) {
        throw InvalidArgument(what + " must be positive");
    }
}

}  // namespace

RunTrace gradient_method_ls(const CompositeObjective& obj, const BaselineConfig& config)
{
    require_smooth_only(obj, "gm");
    require_positive(config.ls_initial, "line-search initial estimate");
    if (!(config.ls_increase > 1.0) || !(config.ls_decrease >= 1.0)) {
        throw InvalidArgument("line-search factors must satisfy increase > 1 and decrease >= 1");
    }
    Recorder rec(obj, "gm", config);
    const MetricOperator& metric = *obj.metric;
    Vector x = obj.x0;
    if (rec.record(0, x)) {
        return rec.finish();
    }
    SmoothEval cur = obj.smooth->evaluate(x, 1);
    double lip = config.ls_initial;
    for (int k = 1; k <= config.cap; ++k) {
        const Vector dir = metric.solve(cur.gradient);
        const double gnorm2 = cur.gradient.dot(dir);
        int trials = 0;
        bool accepted = false;
        while (trials < 200) {
            ++trials;
            const Vector y = x - dir / lip;
            SmoothEval next = obj.smooth->evaluate(y, 1);
            if (std::isfinite(next.value) && next.value <= cur.value - 0.5 * gnorm2 / lip) {
                x = y;
                cur = std::move(next);
                accepted = true;
                break;
            }
            lip *= config.ls_increase;
        }
        if (!accepted) {
            return rec.fail(k, "line search found no acceptable step");
        }
        TraceRecord r;
        r.inner_iterations = trials;
        r.a = 1.0 / lip;
        lip /= config.ls_decrease;
        if (rec.record(k, x, r)) {
            break;
        }
    }
    return rec.finish();
}

RunTrace accelerated_gradient(const CompositeObjective& obj, const BaselineConfig& config)
{
    require_smooth_only(obj, "agm");
    const double lip = obj.smooth->lipschitz(1);
    Recorder rec(obj, "agm", config);
    rec.header()["lipschitz"] = lip;
    rec.header()["schedule"] = Json{{"kind", "custom"}, {"name", "accelerated_gradient"}};
    const Schedule schedule = Schedule::accelerated_gradient(lip);
    const MetricOperator& metric = *obj.metric;
    Vector x = obj.x0;
    Vector v = obj.x0;
    double a_sum = 0.0;
    if (rec.record(0, x)) {
        return rec.finish();
    }
    for (int k = 1; k <= config.cap; ++k) {
        const double a = schedule.next(k - 1, a_sum);
        const double a_new = a_sum + a;
        const Vector y = (a_sum * x + a * v) / a_new;
        const SmoothEval at_y = obj.smooth->evaluate(y, 1);
        v -= a * metric.solve(at_y.gradient);
        x = (a_sum * x + a * v) / a_new;
        a_sum = a_new;
        TraceRecord r;
        r.a = a;
        r.A = a_sum;
        r.inner_iterations = 1;
        if (rec.record(k, x, r)) {
            break;
        }
    }
    return rec.finish();
}

RunTrace classical_ppa(const CompositeObjective& obj, const BaselineConfig& config)
{
    require_smooth_only(obj, "ppa");
    const double a = config.ppa_a > 0.0 ? config.ppa_a : 1.0 / obj.smooth->lipschitz(1);
    Recorder rec(obj, "ppa", config);
    rec.header()["ppa_a"] = a;
    rec.header()["inner_tolerance"] = "1/k^2";
    const MetricOperator& metric = *obj.metric;
    Vector x = obj.x0;
    if (rec.record(0, x)) {
        return rec.finish();
    }
    const double lip0 = 1.0 + a * (obj.smooth->has_lipschitz(1) ? obj.smooth->lipschitz(1) : config.ls_initial);
    for (int k = 1; k <= config.cap; ++k) {
        const Vector center = x;
        const SmoothFunction prox_objective = [&](const Vector& y, int order) {
            const SmoothEval f = obj.smooth->evaluate(y, std::min(order, 1));
            const Vector u = y - center;
            const Vector bu = metric.apply(u);
            SmoothEval e;
            e.value = a * f.value + 0.5 * u.dot(bu);
            if (order >= 1) {
                e.gradient = a * f.gradient + bu;
            }
            return e;
        };
        NewtonOptions opts;
        opts.tolerance = 1.0 / (static_cast<double>(k) * k);
        opts.max_iterations = config.ppa_inner_cap;
        const NewtonResult res = gradient_minimize(prox_objective, x, metric, opts, lip0);
        if (!res.converged) {
            return rec.fail(k, "proximal step did not reach its tolerance");
        }
        x = res.x;
        TraceRecord r;
        r.a = a;
        r.A = a * k;
        r.delta_req = opts.tolerance;
        r.s_norm = res.gradient_norm;
        r.inner_iterations = res.iterations;
        if (rec.record(k, x, r)) {
            break;
        }
    }
    return rec.finish();
}

namespace {

double cubic_step_tolerance(double gradient_norm)
{
    return std::max(1e-13, 1e-6 * gradient_norm);
}

}  // namespace

RunTrace cubic_newton(const CompositeObjective& obj, const BaselineConfig& config)
{
    require_positive(config.reg_m, "cubic regularization constant");
    Recorder rec(obj, "cn", config);
    rec.header()["reg_m"] = config.reg_m;
    const InnerSubproblem sub = InnerSubproblem::direct(obj, nullptr, 2, config.reg_m);
    const MetricOperator& metric = *obj.metric;
    Vector x = obj.x0;
    if (rec.record(0, x)) {
        return rec.finish();
    }
    for (int k = 1; k <= config.cap; ++k) {
        try {
            const SubproblemEval at_x = sub.evaluate(x, 2);
            const TaylorModel model(x, 2, at_x.g);
            const TensorStepResult step =
                tensor_step(sub, model, cubic_step_tolerance(metric.dual_norm(at_x.h_gradient)));
            x = step.point;
            TraceRecord r;
            r.inner_iterations = step.subsolver_iterations;
            if (rec.record(k, x, r)) {
                break;
            }
        } catch (const SolverError& e) {
            return rec.fail(k, e.what());
        }
    }
    return rec.finish();
}

RunTrace accelerated_cubic_newton(const CompositeObjective& obj, const BaselineConfig& config)
{
    require_smooth_only(obj, "acn");
    require_positive(config.reg_m, "cubic regularization constant");
    Recorder rec(obj, "acn", config);
    const double n_const = 6.0 * config.reg_m;
    rec.header()["reg_m"] = config.reg_m;
    rec.header()["estimate_n"] = n_const;
    const InnerSubproblem sub = InnerSubproblem::direct(obj, nullptr, 2, config.reg_m);
    const MetricOperator& metric = *obj.metric;

    auto step_from = [&](const Vector& y) {
        const SubproblemEval at_y = sub.evaluate(y, 2);
        const TaylorModel model(y, 2, at_y.g);
        return tensor_step(sub, model, cubic_step_tolerance(metric.dual_norm(at_y.h_gradient)));
    };

    Vector x = obj.x0;
    if (rec.record(0, x)) {
        return rec.finish();
    }
    Vector s = Vector::Zero(obj.dim());
    for (int k = 1; k <= config.cap; ++k) {
        try {
            TraceRecord r;
            if (k == 1) {
                const TensorStepResult step = step_from(x);
                x = step.point;
                r.inner_iterations = step.subsolver_iterations;
            } else {
                const int j = k - 1;
                const double s_norm = metric.dual_norm(s);
                Vector v = obj.x0;
                if (s_norm > 0.0) {
                    v -= std::sqrt(2.0 / (n_const * s_norm)) * metric.solve(s);
                }
                const Vector y = (j * x + 3.0 * v) / (j + 3.0);
                const TensorStepResult step = step_from(y);
                x = step.point;
                r.inner_iterations = step.subsolver_iterations;
                r.a = 0.5 * (j + 1.0) * (j + 2.0);
            }
            if (k >= 2) {
                s += 0.5 * k * (k + 1.0) * obj.smooth->evaluate(x, 1).gradient;
            }
            if (rec.record(k, x, r)) {
                break;
            }
        } catch (const SolverError& e) {
            return rec.fail(k, e.what());
        }
    }
    return rec.finish();
}

}  // namespace cpm
