#include "cpm/baselines.hpp"
#include "cpm/validate.hpp"

#include <doctest.h>

#include <cmath>

using namespace cpm;

namespace {

CompositeObjective small_quadratic(double q = 1e-2)
{
    CompositeObjective obj = quadratic_instance(30, alpha_for_condition(q), 7);
    attach_reference_optimum(obj);
    return obj;
}

CompositeObjective small_lse()
{
    CompositeObjective obj = lse_instance(8, 1.0, 3);
    attach_reference_optimum(obj);
    return obj;
}

double half_distance_sq(const CompositeObjective& obj)
{
    const Vector d = obj.x0 - *obj.x_star;
    return 0.5 * d.dot(obj.metric->apply(d));
}

}  // namespace

TEST_SUITE("baselines")
{
    TEST_CASE("agm: coefficient identity and the 1/A_k rate")
    {
        const CompositeObjective obj = small_quadratic();
        BaselineConfig cfg;
        cfg.eps = 1e-8;
        const RunTrace t = accelerated_gradient(obj, cfg);
        REQUIRE(t.converged);
        const double lip = obj.smooth->lipschitz(1);
        const double r0 = half_distance_sq(obj);
        double prev_a_sum = 0.0;
        for (std::size_t i = 1; i < t.records.size(); ++i) {
            const auto& r = t.records[i];
            CHECK(lip * r.a * r.a == doctest::Approx(r.a + prev_a_sum).epsilon(1e-12));
            CHECK(r.A >= r.k * r.k / (4.0 * lip) * (1 - 1e-12));
            CHECK(r.residual <= r0 / r.A * (1 + 1e-9) + 1e-14);
            prev_a_sum = r.A;
        }
    }

    TEST_CASE("gm: one exact step on x^2/2")
    {
        CompositeObjective obj;
        auto oracle = std::make_shared<QuadraticOracle>(Matrix::Identity(1, 1), Vector::Zero(1));
        oracle->set_lipschitz(1, 1.0);
        obj.smooth = oracle;
        obj.simple = std::make_shared<const ZeroComponent>(1);
        obj.metric = std::make_shared<const MetricOperator>(MetricOperator::identity(1));
        obj.x0 = Vector::Constant(1, 3.0);
        obj.f_star = 0.0;
        obj.x_star = Vector::Zero(1);
        BaselineConfig cfg;
        cfg.eps = 1e-12;
        const RunTrace t = gradient_method_ls(obj, cfg);
        CHECK(t.converged);
        CHECK(t.iterations() == 1);
        CHECK(t.records.back().F == 0.0);
    }

    TEST_CASE("gm and cn are monotone and converge")
    {
        const CompositeObjective obj = small_lse();
        BaselineConfig cfg;
        cfg.eps = 1e-7;
        for (const RunTrace& t : {gradient_method_ls(obj, cfg), cubic_newton(obj, cfg)}) {
            CHECK(t.converged);
            CHECK(t.records.back().residual <= 1e-7);
            const ValidationReport rep = validate_trace(t);
            CHECK(rep.violations == 0);
            CHECK(rep.details.at("summary").contains("monotone"));
        }
    }

    TEST_CASE("ppa uses a = 1/L and converges")
    {
        const CompositeObjective obj = small_quadratic(1e-1);
        BaselineConfig cfg;
        cfg.eps = 1e-7;
        const RunTrace t = classical_ppa(obj, cfg);
        CHECK(t.converged);
        CHECK(t.header.at("ppa_a").get<double>() == doctest::Approx(1.0 / obj.smooth->lipschitz(1)));
        CHECK(validate_trace(t).violations == 0);
    }

    TEST_CASE("acn converges on log-sum-exp")
    {
        const CompositeObjective obj = small_lse();
        BaselineConfig cfg;
        cfg.eps = 1e-7;
        const RunTrace t = accelerated_cubic_newton(obj, cfg);
        CHECK(t.converged);
        CHECK(t.records.back().residual <= 1e-7);
    }

    TEST_CASE("cn handles a composite objective")
    {
        CompositeObjective obj = quadratic_instance(10, 2.0, 4);
        attach_power_regularizer(obj, 0.2, 1);
        attach_reference_optimum(obj);
        BaselineConfig cfg;
        cfg.eps = 1e-9;
        const RunTrace t = cubic_newton(obj, cfg);
        CHECK(t.converged);
        CHECK(validate_trace(t).violations == 0);
    }

    TEST_CASE("cap is reported through the trace")
    {
        const CompositeObjective obj = small_quadratic(1e-4);
        BaselineConfig cfg;
        cfg.eps = 1e-12;
        cfg.cap = 5;
        const RunTrace t = gradient_method_ls(obj, cfg);
        CHECK_FALSE(t.converged);
        CHECK(t.iterations() == 5);
    }

    TEST_CASE("baselines reject a nonzero simple part and bad options")
    {
        CompositeObjective obj = quadratic_instance(5, 1.0, 1);
        attach_power_regularizer(obj, 0.1, 1);
        CHECK_THROWS_AS(gradient_method_ls(obj, {}), InvalidArgument);
        CHECK_THROWS_AS(accelerated_gradient(obj, {}), InvalidArgument);
        CHECK_THROWS_AS(classical_ppa(obj, {}), InvalidArgument);
        CHECK_THROWS_AS(accelerated_cubic_newton(obj, {}), InvalidArgument);
        const CompositeObjective plain = small_quadratic();
        BaselineConfig bad;
        bad.eps = 0.0;
        CHECK_THROWS_AS(accelerated_gradient(plain, bad), InvalidArgument);
        BaselineConfig bad_ls;
        bad_ls.ls_increase = 1.0;
        CHECK_THROWS_AS(gradient_method_ls(plain, bad_ls), InvalidArgument);
    }
}
