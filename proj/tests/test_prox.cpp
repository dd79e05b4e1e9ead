#include "cpm/prox.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <cmath>

using namespace cpm;
using namespace cpm::testing;

namespace {

MetricPtr identity(int n) { return std::make_shared<MetricOperator>(MetricOperator::identity(n)); }

Vector vec2(double a, double b)
{
    Vector v(2);
    v << a, b;
    return v;
}

}  // namespace

TEST_SUITE("prox")
{
    TEST_CASE("hand values of the power prox")
    {
        const PowerProx d1(1, Vector::Zero(2), identity(2));
        CHECK(d1.value(vec2(3, 4)) == doctest::Approx(12.5));
        CHECK((d1.gradient(vec2(2, 1)) - vec2(2, 1)).norm() == doctest::Approx(0.0));
        CHECK(d1.value(Vector::Zero(2)) == 0.0);

        const PowerProx d2(2, Vector::Zero(2), identity(2));
        CHECK(d2.value(vec2(1, 0)) == doctest::Approx(1.0 / 3));
        CHECK((d2.gradient(vec2(1, 0)) - vec2(1, 0)).norm() == doctest::Approx(0.0));
        CHECK(d2.gradient(Vector::Zero(2)).norm() == 0.0);
        // d(y) - d(x) - <grad d(x), y - x> = 1/3 - 1/3 - <(1,0), (-1,1)> = 1.
        CHECK(d2.bregman(vec2(1, 0), vec2(0, 1)) == doctest::Approx(1.0));
    }

    TEST_CASE("uniform convexity constant is 2^(1-p)")
    {
        for (int p = 1; p <= 4; ++p) {
            const PowerProx d(p, Vector::Zero(3), identity(3));
            CHECK(d.uniform_convexity_constant() == doctest::Approx(std::pow(2.0, 1 - p)));
        }
    }

    TEST_CASE("gradient and Hessian match finite differences in a general metric")
    {
        const auto b = std::make_shared<MetricOperator>(random_spd(4, 21));
        std::mt19937_64 rng(4);
        for (int p = 1; p <= 3; ++p) {
            const Vector x0 = random_vector(4, rng);
            const PowerProx d(p, x0, b);
            for (int t = 0; t < 5; ++t) {
                const Vector x = random_vector(4, rng);
                const Vector g = fd_gradient([&](const Vector& y) { return d.value(y); }, x);
                CHECK((d.gradient(x) - g).norm() <= 1e-6 * (1 + g.norm()));
                const Matrix h = fd_jacobian([&](const Vector& y) { return d.gradient(y); }, x);
                CHECK((d.hessian(x) - h).norm() <= 1e-5 * (1 + h.norm()));
            }
        }
    }

    TEST_CASE("Bregman divergence equals the defining three-term formula")
    {
        const auto b = std::make_shared<MetricOperator>(random_spd(3, 8));
        std::mt19937_64 rng(12);
        for (int p = 1; p <= 3; ++p) {
            const PowerProx d(p, random_vector(3, rng), b);
            for (int t = 0; t < 10; ++t) {
                const Vector x = random_vector(3, rng);
                const Vector y = random_vector(3, rng);
                const double direct = d.value(y) - d.value(x) - d.gradient(x).dot(y - x);
                CHECK(d.bregman(x, y) == doctest::Approx(direct).epsilon(1e-9));
            }
        }
    }

    TEST_CASE("property: uniform convexity lower bound holds, beta(x; x) = 0")
    {
        const auto b = std::make_shared<MetricOperator>(random_spd(5, 30));
        std::mt19937_64 rng(99);
        for (int p = 1; p <= 4; ++p) {
            const PowerProx d(p, random_vector(5, rng), b);
            for (int t = 0; t < 200; ++t) {
                const Vector x = random_vector(5, rng, 2.0);
                const Vector y = random_vector(5, rng, 2.0);
                const double lower = d.uniform_convexity_lower_bound(x, y);
                CHECK(lower == doctest::Approx(d.uniform_convexity_constant() / (p + 1) *
                                               std::pow(b->primal_norm(x - y), p + 1)));
                CHECK(d.bregman(x, y) >= lower * (1 - 1e-10) - 1e-12);
                CHECK(d.bregman(x, x) == doctest::Approx(0.0));
            }
        }
    }

    TEST_CASE("p = 1 Bregman divergence is half the squared distance")
    {
        const auto b = std::make_shared<MetricOperator>(random_spd(4, 1));
        std::mt19937_64 rng(3);
        const PowerProx d(1, random_vector(4, rng), b);
        for (int t = 0; t < 10; ++t) {
            const Vector x = random_vector(4, rng);
            const Vector y = random_vector(4, rng);
            CHECK(d.bregman(x, y) == doctest::Approx(0.5 * (y - x).dot(b->matrix() * (y - x))).epsilon(1e-10));
        }
    }

    TEST_CASE("rejects order zero and mismatched center")
    {
        CHECK_THROWS_AS(PowerProx(0, Vector::Zero(2), identity(2)), InvalidArgument);
        CHECK_THROWS_AS(PowerProx(1, Vector::Zero(3), identity(2)), InvalidArgument);
    }
}
