#include "cpm/newton.hpp"

#include <algorithm>
#include <cmath>

namespace cpm {

namespace {

Vector newton_direction(const Matrix& hessian, const Vector& grad, const MetricOperator& metric)
{
    const Matrix& b = metric.matrix();
    double lambda = 0.0;
    const double scale = std::max(1.0, hessian.diagonal().cwiseAbs().maxCoeff());
    for (int attempt = 0; attempt < 40; ++attempt) {
        Eigen::LLT<Matrix> llt(hessian + lambda * b);
        if (llt.info() == Eigen::Success) {
            Vector d = -llt.solve(grad);
            if (d.allFinite() && d.dot(grad) < 0.0) {
                return d;
            }
        }
        lambda = lambda == 0.0 ? 1e-14 * scale : lambda * 10.0;
    }
    return -metric.solve(grad);
}

}  // namespace

NewtonResult newton_minimize(const SmoothFunction& fn, const Vector& x0, const MetricOperator& metric,
                             const NewtonOptions& options)
{
    NewtonResult res;
    res.x = x0;
    SmoothEval cur = fn(res.x, 2);
    res.value = cur.value;
    res.gradient_norm = metric.dual_norm(cur.gradient);

    while (res.gradient_norm > options.tolerance && res.iterations < options.max_iterations) {
        const Vector d = newton_direction(cur.hessian, cur.gradient, metric);
        const double slope = cur.gradient.dot(d);
        double t = 1.0;
        bool accepted = false;
        const double noise = 1e-12 * std::max(1.0, std::abs(cur.value));
        for (int ls = 0; ls < 60 && -t * slope > noise; ++ls) {
            const Vector trial = res.x + t * d;
            const double v = fn(trial, 0).value;
            // A full Newton step whose change is below roundoff is taken as is.
            const bool flat = t == 1.0 && std::abs(v - cur.value) <= 1e-13 * std::max(1.0, std::abs(cur.value));
            if (std::isfinite(v) && (v <= cur.value + options.armijo * t * slope || flat)) {
                res.x = trial;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        ++res.iterations;
        if (!accepted) {
            // Predicted decrease is below roundoff: take the full step if it
            // still shrinks the gradient.
            const Vector trial = res.x + d;
            SmoothEval at_trial = fn(trial, 2);
            const double gnorm = metric.dual_norm(at_trial.gradient);
            if (!(gnorm < res.gradient_norm)) {
                break;
            }
            res.x = trial;
            cur = std::move(at_trial);
            res.value = cur.value;
            res.gradient_norm = gnorm;
            continue;
        }
        cur = fn(res.x, 2);
        res.value = cur.value;
        res.gradient_norm = metric.dual_norm(cur.gradient);
    }
    res.converged = res.gradient_norm <= options.tolerance;
    return res;
}

NewtonResult gradient_minimize(const SmoothFunction& fn, const Vector& x0, const MetricOperator& metric,
                               const NewtonOptions& options, double initial_lipschitz)
{
    NewtonResult res;
    res.x = x0;
    SmoothEval cur = fn(res.x, 1);
    res.value = cur.value;
    res.gradient_norm = metric.dual_norm(cur.gradient);
    double lip = initial_lipschitz;

    while (res.gradient_norm > options.tolerance && res.iterations < options.max_iterations) {
        const Vector step = metric.solve(cur.gradient);
        bool accepted = false;
        for (int ls = 0; ls < 100; ++ls) {
            const Vector trial = res.x - step / lip;
            SmoothEval next = fn(trial, 1);
            const double model = cur.value - 0.5 * res.gradient_norm * res.gradient_norm / lip;
            bool ok = std::isfinite(next.value) && next.value <= model + 1e-15 * std::abs(cur.value);
            if (!ok && std::isfinite(next.value) &&
                std::abs(next.value - cur.value) <= 1e-12 * std::max(1.0, std::abs(cur.value))) {
                // Value differences are lost in roundoff; fall back to the
                // gradient form of the Lipschitz test.
                const Vector dg = next.gradient - cur.gradient;
                const double dx = metric.primal_norm(trial - res.x);
                ok = metric.dual_norm(dg) <= lip * dx;
            }
            if (ok) {
                res.x = trial;
                cur = std::move(next);
                accepted = true;
                break;
            }
            lip *= 2.0;
        }
        ++res.iterations;
        if (!accepted) {
            break;
        }
        lip = std::max(lip * 0.5, 1e-300);
        res.value = cur.value;
        res.gradient_norm = metric.dual_norm(cur.gradient);
    }
    res.converged = res.gradient_norm <= options.tolerance;
    return res;
}

}  // namespace cpm
