#pragma once

#include "cpm/metric.hpp"

#include <cstdint>
#include <functional>
#include <random>

namespace cpm::testing {

inline Matrix random_spd(int n, std::uint64_t seed, double shift = 0.5)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            m(i, j) = g(rng);
        }
    }
    return m * m.transpose() / n + shift * Matrix::Identity(n, n);
}

inline Vector random_vector(int n, std::mt19937_64& rng, double scale = 1.0)
{
    std::normal_distribution<double> g(0.0, scale);
    Vector v(n);
    for (int i = 0; i < n; ++i) {
        v(i) = g(rng);
    }
    return v;
}

/// Central differences of a scalar function.
inline Vector fd_gradient(const std::function<double(const Vector&)>& f, const Vector& x, double h = 1e-6)
{
    Vector g(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        Vector e = Vector::Zero(x.size());
        e(i) = h;
        g(i) = (f(x + e) - f(x - e)) / (2 * h);
    }
    return g;
}

inline Matrix fd_jacobian(const std::function<Vector(const Vector&)>& f, const Vector& x, double h = 1e-6)
{
    Matrix j(x.size(), x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        Vector e = Vector::Zero(x.size());
        e(i) = h;
        j.col(i) = (f(x + e) - f(x - e)) / (2 * h);
    }
    return j;
}

}  // namespace cpm::testing
