#include "cpm/bench.hpp"

#include <doctest.h>

#include <algorithm>

using namespace cpm;

namespace {

double median_of(std::vector<double> v)
{
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

Json small_bench()
{
    return Json{{"suite", "quadratic"},
                {"sizes", {15}},
                {"params", {1e-2}},
                {"seeds", {1, 2, 3}},
                {"methods", {"gm", "agm", "cptm-p1"}},
                {"eps", 1e-6}};
}

}  // namespace

TEST_SUITE("bench")
{
    TEST_CASE("problem spec parsing and descriptor round trip")
    {
        const ProblemSpec s = ProblemSpec::from_json(Json{{"kind", "quadratic"}, {"n", 12}, {"q", 1e-3}, {"seed", 9}});
        CHECK(s.n == 12);
        CHECK(*s.q == 1e-3);
        CHECK(ProblemSpec::from_json(s.descriptor()).descriptor() == s.descriptor());
        CHECK_THROWS_AS(ProblemSpec::from_json(Json{{"kind", "quadratic"}, {"colour", 1}}), InvalidArgument);
        CHECK_THROWS_AS(ProblemSpec::from_json(Json{{"n", "ten"}}), InvalidArgument);
        CHECK_THROWS_AS(ProblemSpec::from_json(Json::array()), InvalidArgument);
    }

    TEST_CASE("solve options round trip and rejections")
    {
        SolveOptions o;
        o.eps = 1e-5;
        o.delta_schedule = "const:1e-9";
        o.cap_outer = 77;
        const SolveOptions back = SolveOptions::from_json(o.to_json());
        CHECK(back.to_json() == o.to_json());
        CHECK_THROWS_AS(SolveOptions::from_json(Json{{"eps", -1.0}}), InvalidArgument);
        CHECK_THROWS_AS(SolveOptions::from_json(Json{{"delta_schedule", "fancy"}}), InvalidArgument);
        CHECK_THROWS_AS(SolveOptions::from_json(Json{{"tolerance", 1e-3}}), InvalidArgument);
    }

    TEST_CASE("bench spec rejections")
    {
        CHECK_THROWS_AS(BenchSpec::from_json(Json{{"suite", "cubes"}}), InvalidArgument);
        CHECK_THROWS_AS(BenchSpec::from_json(Json{{"sizes", Json::array()}}), InvalidArgument);
        CHECK_THROWS_AS(BenchSpec::from_json(Json{{"methods", {"newton"}}}), InvalidArgument);
        CHECK_THROWS_AS(BenchSpec::from_json(Json{{"extra", true}}), InvalidArgument);
        CHECK(BenchSpec::from_json(Json{{"suite", "lse"}}).params == std::vector<double>{1.0, 0.1});
    }

    TEST_CASE("methods registry")
    {
        for (const auto& m : known_methods()) {
            CHECK(is_known_method(m));
        }
        CHECK_FALSE(is_known_method("cptm-p9"));
        ProblemSpec ps;
        ps.n = 5;
        ps.q = 0.5;
        const CompositeObjective obj = make_instance(ps);
        CHECK_THROWS_AS(run_method(obj, "cptm-p9", {}), InvalidArgument);
    }

    TEST_CASE("bench rows are medians of independent runs and the sweep is deterministic")
    {
        const BenchSpec spec = BenchSpec::from_json(small_bench());
        const Json report = run_bench(spec);
        CHECK(report.dump() == run_bench(spec).dump());
        CHECK(report.at("all_converged") == true);
        REQUIRE(report.at("rows").size() == 3);
        for (const auto& row : report.at("rows")) {
            const std::string m = row.at("method");
            std::vector<double> iters;
            std::vector<double> matvecs;
            for (std::uint64_t seed : {1, 2, 3}) {
                ProblemSpec ps;
                ps.n = 15;
                ps.q = 1e-2;
                ps.seed = seed;
                const RunTrace t = run_method(make_instance(ps), m, spec.options);
                CHECK(t.converged);
                iters.push_back(t.iterations());
                matvecs.push_back(static_cast<double>(t.oracle_totals().matvec));
            }
            CHECK(row.at("iterations").get<double>() == median_of(iters));
            CHECK(row.at("matvec").get<double>() == median_of(matvecs));
        }
        const std::string table = bench_table(report);
        CHECK(table.find("cptm-p1") != std::string::npos);
        CHECK(table.find("agm") != std::string::npos);
    }
}
