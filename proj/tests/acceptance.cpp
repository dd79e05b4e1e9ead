// Acceptance checks: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include "cpm/bench.hpp"
#include "cpm/validate.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdarg>
#include <cstring>
#include <functional>
#include <string>
#include <vector>

using namespace cpm;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...)
{
    char buf[1024];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

CompositeObjective instance(const std::string& kind, int n, double param, std::uint64_t seed)
{
    ProblemSpec ps;
    ps.kind = kind;
    ps.n = n;
    ps.seed = seed;
    if (kind == "quadratic") {
        ps.q = param;
    } else {
        ps.mu = param;
    }
    return make_instance(ps);
}

/// Least-squares slope of log(residual) against log(k) over k in [k0, k1].
double log_log_slope(const RunTrace& t, int k0, int k1, int* points)
{
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (const auto& r : t.records) {
        if (r.k >= k0 && r.k <= k1 && r.residual > 0.0) {
            const double x = std::log(r.k);
            const double y = std::log(r.residual);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
            ++n;
        }
    }
    *points = n;
    return n < 2 ? NAN : (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// Battery shared by criteria 1 and 2.
struct BatteryRun {
    std::string label;
    ValidationReport report;
};

std::vector<BatteryRun> g_battery;
double g_battery_seconds = 0.0;

void run_battery()
{
    const auto t0 = Clock::now();
    SolveOptions o;
    o.eps = 1e-8;
    for (int n : {20, 50}) {
        for (double q : {1e-1, 1e-2}) {
            for (std::uint64_t seed : {1, 2, 3}) {
                const RunTrace t = run_method(instance("quadratic", n, q, seed), "cptm-p1", o);
                g_battery.push_back({fmt("quadratic n=%d q=%g seed=%llu", n, q, (unsigned long long)seed),
                                     validate_trace(t, {1e-9, 1e-12, 4.0})});
            }
        }
        for (double mu : {1.0, 0.1}) {
            for (std::uint64_t seed : {1, 2}) {
                const RunTrace t = run_method(instance("lse", n, mu, seed), "cptm-p2", o);
                g_battery.push_back({fmt("lse n=%d mu=%g seed=%llu", n, mu, (unsigned long long)seed),
                                     validate_trace(t, {1e-9, 1e-12, 4.0})});
            }
        }
    }
    g_battery_seconds = seconds_since(t0);
}

Outcome summarize_battery(const std::vector<std::string>& checks)
{
    int count = 0;
    int failures = 0;
    std::string first;
    for (const auto& run : g_battery) {
        const Json& s = run.report.details.at("summary");
        for (const auto& name : checks) {
            if (!s.contains(name)) {
                continue;
            }
            count += s.at(name).at("count").get<int>();
            const int f = s.at(name).at("failures").get<int>();
            failures += f;
            if (f > 0 && first.empty()) {
                first = "; first: " + run.label + " " + name;
            }
        }
    }
    return {failures == 0 && count > 0, fmt("%d runs, %d checks, %d violations", (int)g_battery.size(), count,
                                            failures) + first};
}

Outcome criterion1()
{
    run_battery();
    Outcome o = summarize_battery({"certificate"});
    const bool fast = g_battery_seconds <= 120.0;
    o.pass = o.pass && fast && g_battery.size() == 20;
    o.detail += fmt(", slack 1e-9, %.1f s (limit 120 s)", g_battery_seconds);
    return o;
}

Outcome criterion2()
{
    if (g_battery.empty()) {
        run_battery();
    }
    return summarize_battery({"inner_descent", "inner_gradient_progress", "inner_iteration_bound"});
}

Outcome criterion3()
{
    SolveOptions o;
    o.eps = 1e-14;
    o.cap_outer = 200;
    o.delta_schedule = "const:1e-10";
    int n1 = 0;
    const RunTrace t1 = run_method(instance("quadratic", 50, 1e-1, 1), "cptm-p1", o);
    const double s1 = log_log_slope(t1, 5, 50, &n1);
    int n2 = 0;
    int n2_late = 0;
    const RunTrace t2 = run_method(instance("lse", 20, 1.0, 1), "cptm-p2", o);
    const double s2 = log_log_slope(t2, 5, 50, &n2);
    const double s2_late = log_log_slope(t2, 50, 200, &n2_late);
    const bool ok1 = s1 <= -1.8;
    const bool ok2 = s2 <= -2.5;
    return {ok1 && ok2, fmt("p=1 quadratic slope %.2f over k in [5,50] (<= -1.8: %s); p=2 lse slope %.2f over "
                            "k in [5,50] (<= -2.5: %s); p=2 slope over [50,200] is %.2f",
                            s1, ok1 ? "yes" : "no", s2, ok2 ? "yes" : "no", s2_late)};
}

Outcome criterion4()
{
    const double tol = 1e-12;
    std::vector<std::string> bad;
    auto expect = [&](bool ok, const std::string& what) {
        if (!ok) {
            bad.push_back(what);
        }
    };
    const ComplexityBound b = complexity_convex(1, 1.0, 1.0, 1.0, 1.0);
    expect(std::abs(b.delta - 0.125) <= tol, "delta(1)");
    expect(b.K == 6, "K(1)");
    expect(std::abs(convex_schedule_constant(2, 1.0, 1.0) - 1.0 / 81) <= tol, "c(p=2)");
    expect(std::abs(schedule_convex(2, 1.0, 1.0).next(0, 0.0) - 1.0 / 27) <= tol, "a_1(p=2)");
    for (int p : {1, 2}) {
        for (double s : {0.3, 1.0, 7.0}) {
            expect(std::abs(strongly_convex_omega(p, s, s) - 0.5) <= tol, fmt("omega(p=%d)", p));
        }
    }
    double worst_log = -1e300;
    for (int p = 1; p <= 6; ++p) {
        const double l = std::log2(curve_delta(p));
        worst_log = std::max(worst_log, l + p);
        expect(l <= -p + tol, fmt("log2 delta(%d)", p));
    }
    double worst_k = 0.0;
    for (int p = 1; p <= 10; ++p) {
        worst_k = std::max(worst_k, curve_k(p));
        expect(curve_k(p) <= 8.0 + tol, fmt("K(%d)", p));
    }
    std::string detail = fmt("delta(1)=%.15g K(1)=%d c=%.15g a1=%.15g max(log2 delta+p)=%.3f max K=%.4f", b.delta,
                             b.K, convex_schedule_constant(2, 1.0, 1.0), schedule_convex(2, 1.0, 1.0).next(0, 0.0),
                             worst_log, worst_k);
    for (const auto& s : bad) {
        detail += "; failed " + s;
    }
    return {bad.empty(), detail};
}

Outcome criterion5()
{
    const double tol = 1e-12;
    int checks = 0;
    int failures = 0;
    for (int p = 1; p <= 4; ++p) {
        const Schedule s = schedule_convex(p, 1.0, 1.0);
        double a_sum = 0.0;
        for (int k = 1; k <= 200; ++k) {
            a_sum += s.next(k - 1, a_sum);
            const double lo = s.c() * std::pow(k, p + 1);
            const double hi = s.c() * std::pow(k + 1.0, p + 1);
            failures += lo > a_sum * (1 + tol);
            failures += a_sum > hi * (1 + tol);
            checks += 2;
        }
        for (double sigma : {0.01, 0.1, 1.0}) {
            const Schedule g = schedule_strongly_convex(p, sigma, 1.0);
            double g_sum = 0.0;
            double a1 = 0.0;
            for (int k = 1; k <= 200; ++k) {
                g_sum += g.next(k - 1, g_sum);
                if (k == 1) {
                    a1 = g_sum;
                }
                failures += a1 * std::exp(g.omega() * (k - 1)) > g_sum * (1 + tol);
                ++checks;
            }
        }
    }
    return {failures == 0, fmt("%d envelope checks for p=1..4, k<=200, %d failures", checks, failures)};
}

Json bench_cells(const std::string& suite, int n, const std::vector<double>& params,
                 const std::vector<std::uint64_t>& seeds, const std::vector<std::string>& methods, double eps)
{
    BenchSpec spec;
    spec.suite = suite;
    spec.sizes = {n};
    spec.params = params;
    spec.seeds = seeds;
    spec.methods = methods;
    spec.options.eps = eps;
    return run_bench(spec);
}

double cell(const Json& report, double param, const std::string& method, const char* key)
{
    for (const auto& row : report.at("rows")) {
        const char* key_param = report.at("suite") == "quadratic" ? "q" : "mu";
        if (row.at(key_param).get<double>() == param && row.at("method") == method) {
            return row.at(key).get<double>();
        }
    }
    return NAN;
}

Outcome criterion6()
{
    const auto t0 = Clock::now();
    const std::vector<double> qs{1e-2, 1e-4};
    const Json rep =
        bench_cells("quadratic", 100, qs, {1, 2, 3, 4, 5}, {"gm", "agm", "ppa", "cptm-p1"}, 1e-7);
    const double secs = seconds_since(t0);
    bool ok = rep.at("all_converged").get<bool>() && secs <= 300.0;
    std::string detail;
    const double gm = cell(rep, 1e-4, "gm", "iterations");
    const double agm4 = cell(rep, 1e-4, "agm", "iterations");
    ok = ok && gm >= 5.0 * agm4;
    detail += fmt("q=1e-4 gm/agm=%.2f (>=5)", gm / agm4);
    for (double q : qs) {
        const double ratio = cell(rep, q, "cptm-p1", "iterations") / cell(rep, q, "agm", "iterations");
        const double mv_cpm = cell(rep, q, "cptm-p1", "matvec");
        const double mv_ppa = cell(rep, q, "ppa", "matvec");
        ok = ok && ratio >= 0.3 && ratio <= 3.0 && mv_cpm < mv_ppa;
        detail += fmt("; q=%g cpm/agm iters=%.2f matvec cpm=%.0f ppa=%.0f", q, ratio, mv_cpm, mv_ppa);
    }
    detail += fmt("; %.1f s (limit 300 s)", secs);
    return {ok, detail};
}

Outcome criterion7()
{
    const auto t0 = Clock::now();
    const std::vector<double> mus{1.0, 0.1};
    const Json rep = bench_cells("lse", 50, mus, {1, 2, 3}, {"cn", "cptm-p2"}, 1e-8);
    const double secs = seconds_since(t0);
    bool ok = rep.at("all_converged").get<bool>() && secs <= 600.0;
    std::string detail;
    for (double mu : mus) {
        const double it_cptm = cell(rep, mu, "cptm-p2", "iterations");
        const double it_cn = cell(rep, mu, "cn", "iterations");
        const double calls_cptm = cell(rep, mu, "cptm-p2", "oracle_calls");
        const double calls_cn = cell(rep, mu, "cn", "oracle_calls");
        ok = ok && it_cptm < it_cn && calls_cptm <= 5.0 * calls_cn;
        detail += fmt("mu=%g iterations cptm=%.0f cn=%.0f, oracle calls cptm=%.0f cn=%.0f (ratio %.2f); ", mu,
                      it_cptm, it_cn, calls_cptm, calls_cn, calls_cptm / calls_cn);
    }
    detail += fmt("%.1f s (limit 600 s)", secs);
    return {ok, detail};
}

Outcome criterion8()
{
    // f(x) = 1/2 x'Qx - b'x in R^2, Euclidean d = 1/2 |x - x0|^2, exact inner solves.
    Matrix qm(2, 2);
    qm << 2.0, 0.6, 0.6, 0.5;
    Vector b(2);
    b << 1.0, -0.7;
    const double lip = 0.5 * (qm.trace() + std::sqrt(std::pow(qm(0, 0) - qm(1, 1), 2) + 4 * qm(0, 1) * qm(0, 1)));
    CompositeObjective obj;
    auto oracle = std::make_shared<QuadraticOracle>(qm, b);
    oracle->set_lipschitz(1, lip);
    obj.smooth = oracle;
    obj.simple = std::make_shared<const ZeroComponent>(2);
    obj.metric = std::make_shared<const MetricOperator>(MetricOperator::identity(2));
    obj.x0 = Vector::Zero(2);
    auto d = std::make_shared<const PowerProx>(1, obj.x0, obj.metric);
    const double gamma0 = 1.0;
    const Schedule schedule = schedule_convex(1, gamma0, lip);

    OuterState state = OuterState::initial(obj.x0, gamma0);
    // Brute force: v minimizes A' f((a v + A x)/A') + gamma/2 |v - v_prev|^2, i.e.
    // (a^2/A' Q + gamma I) v = a b - a A/A' Q x + gamma v_prev, solved by Cramer's rule.
    double x1 = 0.0, x2 = 0.0, v1 = 0.0, v2 = 0.0, a_sum = 0.0;
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
        const double a = schedule.next(k, state.A);
        const double an = a_sum + a;
        const double m11 = a * a / an * qm(0, 0) + gamma0;
        const double m12 = a * a / an * qm(0, 1);
        const double m22 = a * a / an * qm(1, 1) + gamma0;
        const double qx1 = qm(0, 0) * x1 + qm(0, 1) * x2;
        const double qx2 = qm(1, 0) * x1 + qm(1, 1) * x2;
        const double r1 = a * b(0) - a * a_sum / an * qx1 + gamma0 * v1;
        const double r2 = a * b(1) - a * a_sum / an * qx2 + gamma0 * v2;
        const double det = m11 * m22 - m12 * m12;
        const double nv1 = (r1 * m22 - m12 * r2) / det;
        const double nv2 = (m11 * r2 - m12 * r1) / det;
        x1 = (a * nv1 + a_sum * x1) / an;
        x2 = (a * nv2 + a_sum * x2) / an;
        v1 = nv1;
        v2 = nv2;
        a_sum = an;

        const StepOutcome out = cpm_step(state, obj, d, a, 1e-12, NewtonInnerSolver{});
        state = out.state;
        worst = std::max({worst, std::abs(state.x(0) - x1), std::abs(state.x(1) - x2), std::abs(state.v(0) - v1),
                          std::abs(state.v(1) - v2)});
    }
    return {worst <= 1e-10, fmt("20 iterations, max |x_k - x_k^ref|, |v_k - v_k^ref| = %.3e (<= 1e-10)", worst)};
}

Outcome criterion9()
{
    ProblemSpec ps;
    ps.kind = "quadratic";
    ps.n = 50;
    ps.q = 1e-2;
    ps.seed = 1;
    ps.sigma = 0.1;
    ps.sigma_p = 1;
    const CompositeObjective obj = make_instance(ps);
    CptmConfig cfg;
    cfg.p = 1;
    cfg.eps = 1e-8;
    cfg.delta = DeltaSchedule::theorem_convex(0.0);
    const RunTrace t = run_cptm(obj, cfg);
    const double omega = t.header.at("schedule").at("omega").get<double>();
    const double bound = std::exp(-omega) * 1.1;
    double worst = 0.0;
    int worst_k = 0;
    int holds_from = 0;
    double r2 = NAN;
    for (std::size_t i = 1; i < t.records.size(); ++i) {
        const auto& prev = t.records[i - 1];
        const auto& r = t.records[i];
        if (prev.k == 2) {
            r2 = prev.residual;
        }
        if (prev.k >= 2 && prev.residual > 0.0) {
            const double ratio = r.residual / prev.residual;
            if (ratio > worst) {
                worst = ratio;
                worst_k = r.k;
            }
            if (ratio > bound) {
                holds_from = r.k + 1;
            }
        }
    }
    const auto& last = t.records.back();
    const double mean_ratio = std::pow(last.residual / r2, 1.0 / (last.k - 2));
    const double lip = obj.smooth->lipschitz(1);
    const double bregman0 = t.header.at("bregman0").get<double>();
    const ComplexityBound cb = complexity_strongly_convex(1, 1.0, lip, 0.1, bregman0, cfg.eps);
    const bool ok = t.converged && worst <= bound && t.iterations() <= cb.K;
    return {ok, fmt("omega=%.4f, per-step ratio after k=2 must be <= 1.1 e^-omega = %.4f: worst %.4f at k=%d, "
                    "holds from k=%d, mean ratio over [2,%d] %.4f; reached eps=1e-8 in %d iterations (K=%d)",
                    omega, bound, worst, worst_k, holds_from, last.k, mean_ratio, t.iterations(), cb.K)};
}

}  // namespace

int main(int argc, char** argv)
{
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"1 certificate suite", criterion1},   {"2 inner-method suite", criterion2},
        {"3 rate fits", criterion3},           {"4 formula checks", criterion4},
        {"5 schedule invariants", criterion5}, {"6 quadratic table", criterion6},
        {"7 log-sum-exp table", criterion7},   {"8 oracle equivalence", criterion8},
        {"9 strongly convex branch", criterion9}};
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        if (argc > 1 && std::strtol(argv[1], nullptr, 10) != static_cast<long>(i + 1)) {
            continue;
        }
        const auto t0 = Clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.pass;
        std::printf("%s criterion %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", criteria[i].first, o.detail.c_str(),
                    seconds_since(t0));
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
