#pragma once

#include "cpm/trace.hpp"

namespace cpm {

struct BaselineConfig {
    double eps = 1e-7;
    int cap = 100000;
    double ls_initial = 1.0;   ///< initial local Lipschitz estimate of the line search
    double ls_increase = 2.0;  ///< factor applied on a rejected trial
    double ls_decrease = 2.0;  ///< divisor applied after an accepted step
    double ppa_a = 0.0;        ///< constant proximal coefficient; 0 means 1/L_1(f)
    int ppa_inner_cap = 100000;
    double reg_m = 1.0;        ///< cubic regularization constant M
};

/// Gradient method with backtracking on the local Lipschitz estimate.
RunTrace gradient_method_ls(const CompositeObjective& obj, const BaselineConfig& config);

/// Estimating-sequence accelerated gradient method with a^2 = (a + A)/L.
RunTrace accelerated_gradient(const CompositeObjective& obj, const BaselineConfig& config);

/// x_{k+1} = argmin a f(x) + 1/2 ||x - x_k||^2, each step solved by the
/// line-search gradient method to accuracy 1/k^2.
RunTrace classical_ppa(const CompositeObjective& obj, const BaselineConfig& config);

/// Cubically regularized Newton steps on F with constant M.
RunTrace cubic_newton(const CompositeObjective& obj, const BaselineConfig& config);

/// Accelerated cubic Newton method with the estimating sequence
/// f(x_1) + N/6 ||x - x0||^3 plus weighted linearizations, N = 6M.
RunTrace accelerated_cubic_newton(const CompositeObjective& obj, const BaselineConfig& config);

}  // namespace cpm
