#include "cpm/metric.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <cmath>

using namespace cpm;
using namespace cpm::testing;

TEST_SUITE("metric")
{
    TEST_CASE("identity metric gives Euclidean norms")
    {
        const MetricOperator m = MetricOperator::identity(2);
        CHECK(m.is_identity());
        Vector x(2);
        x << 3, 4;
        CHECK(m.primal_norm(x) == doctest::Approx(5.0));
        CHECK(m.dual_norm(x) == doctest::Approx(5.0));
    }

    TEST_CASE("diagonal metric by hand")
    {
        Matrix b = Matrix::Zero(2, 2);
        b(0, 0) = 4;
        b(1, 1) = 9;
        const MetricOperator m(b);
        Vector x(2);
        x << 1, 1;
        CHECK(m.primal_norm(x) == doctest::Approx(std::sqrt(13.0)));
        CHECK(m.dual_norm(x) == doctest::Approx(std::sqrt(1.0 / 4 + 1.0 / 9)));
    }

    TEST_CASE("dual norm matches the explicit inverse")
    {
        const Matrix b = random_spd(6, 3);
        const MetricOperator m(b);
        const Matrix inv = b.inverse();
        std::mt19937_64 rng(7);
        for (int t = 0; t < 20; ++t) {
            const Vector s = random_vector(6, rng);
            CHECK(m.dual_norm(s) == doctest::Approx(std::sqrt(s.dot(inv * s))).epsilon(1e-12));
            CHECK((m.solve(s) - inv * s).norm() <= 1e-10 * (1 + s.norm()));
            CHECK((m.apply(s) - b * s).norm() <= 1e-12 * (1 + s.norm()));
        }
    }

    TEST_CASE("property: Cauchy-Schwarz for the norm pair and attainment at B x")
    {
        const MetricOperator m(random_spd(5, 11));
        std::mt19937_64 rng(5);
        for (int t = 0; t < 50; ++t) {
            const Vector x = random_vector(5, rng);
            const Vector s = random_vector(5, rng);
            CHECK(std::abs(duality_pairing(s, x)) <= m.dual_norm(s) * m.primal_norm(x) * (1 + 1e-12));
            // ||Bx||_* = ||x|| and <Bx, x> = ||x||^2.
            CHECK(m.dual_norm(m.apply(x)) == doctest::Approx(m.primal_norm(x)).epsilon(1e-10));
        }
    }

    TEST_CASE("property: norms are homogeneous and satisfy the triangle inequality")
    {
        const MetricOperator m(random_spd(4, 2));
        std::mt19937_64 rng(9);
        for (int t = 0; t < 50; ++t) {
            const Vector x = random_vector(4, rng);
            const Vector y = random_vector(4, rng);
            CHECK(m.primal_norm(-2.5 * x) == doctest::Approx(2.5 * m.primal_norm(x)));
            CHECK(m.primal_norm(x + y) <= m.primal_norm(x) + m.primal_norm(y) + 1e-12);
        }
    }

    TEST_CASE("rejects non-symmetric, indefinite and non-square matrices")
    {
        Matrix ns(2, 2);
        ns << 2, 1, 0, 2;
        CHECK_THROWS_AS(MetricOperator{ns}, InvalidArgument);
        Matrix indef(2, 2);
        indef << 1, 0, 0, -1;
        CHECK_THROWS_AS(MetricOperator{indef}, InvalidArgument);
        CHECK_THROWS_AS(MetricOperator{Matrix::Identity(2, 3)}, InvalidArgument);
    }

    TEST_CASE("dimension mismatch is an error")
    {
        const MetricOperator m = MetricOperator::identity(3);
        CHECK_THROWS_AS(m.primal_norm(Vector::Zero(2)), InvalidArgument);
        CHECK_THROWS_AS(m.dual_norm(Vector::Zero(4)), InvalidArgument);
    }
}
