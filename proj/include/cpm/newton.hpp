#pragma once

#include "cpm/metric.hpp"

#include <functional>

namespace cpm {

/// Value, gradient and (optionally) Hessian of a smooth function at a point.
struct SmoothEval {
    double value = 0.0;
    Vector gradient;
    Matrix hessian;
};

using SmoothFunction = std::function<SmoothEval(const Vector&, int order)>;

struct NewtonOptions {
    double tolerance = 1e-12;  ///< stop when ||grad||_* <= tolerance
    int max_iterations = 200;
    double armijo = 1e-4;
};

struct NewtonResult {
    Vector x;
    double value = 0.0;
    double gradient_norm = 0.0;  ///< dual norm of the last gradient
    int iterations = 0;
    bool converged = false;
};

/// Damped Newton method with Armijo backtracking for a smooth convex
/// function. The direction solves (H + lambda B) d = -g, with lambda raised
/// only when the Hessian is numerically singular. Function values do not
/// increase beyond roundoff; once the predicted decrease drops below it, a
/// full step is taken only if it shrinks the gradient.
NewtonResult newton_minimize(const SmoothFunction& fn, const Vector& x0, const MetricOperator& metric,
                             const NewtonOptions& options = {});

/// Gradient method with backtracking on the local Lipschitz estimate,
/// measured in the metric B. Used as an independent cross-check of
/// `newton_minimize` on small problems.
NewtonResult gradient_minimize(const SmoothFunction& fn, const Vector& x0, const MetricOperator& metric,
                               const NewtonOptions& options = {}, double initial_lipschitz = 1.0);

}  // namespace cpm
