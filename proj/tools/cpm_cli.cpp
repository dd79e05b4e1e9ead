// Command-line harness over the C API: solve | bench | validate | curves.

#include "cpm/cpm.h"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace {

using Json = nlohmann::json;
namespace fs = std::filesystem;

enum Exit { kOk = 0, kValidation = 1, kUsage = 2, kSolver = 3 };

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SolverFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void check(cpm_status st)
{
    if (st == CPM_OK) {
        return;
    }
    std::string msg = std::string(cpm_status_name(st)) + ": " + cpm_last_error();
    if (st == CPM_ERR_SOLVER || st == CPM_ERR_INTERNAL) {
        throw SolverFailure(msg);
    }
    throw UsageError(msg);
}

std::string take(char* s)
{
    std::string out = s != nullptr ? s : "";
    cpm_string_free(s);
    return out;
}

struct ProblemDeleter {
    void operator()(cpm_problem* p) const { cpm_problem_destroy(p); }
};
struct TraceDeleter {
    void operator()(cpm_trace* t) const { cpm_trace_destroy(t); }
};
using ProblemHandle = std::unique_ptr<cpm_problem, ProblemDeleter>;
using TraceHandle = std::unique_ptr<cpm_trace, TraceDeleter>;

void write_file(const fs::path& path, const std::string& text)
{
    std::ofstream f(path, std::ios::binary);
    f << text;
    if (!f) {
        throw SolverFailure("cannot write " + path.string());
    }
}

struct ProblemFlags {
    std::string kind = "quadratic";
    int n = 50;
    std::optional<double> q;
    std::optional<double> alpha;
    std::optional<double> mu;
    std::uint64_t seed = 1;
    std::optional<double> sigma;
    std::optional<int> sigma_p;
    std::optional<double> lipschitz2;
    std::optional<std::string> b_scaling;

    void add(CLI::App& cmd)
    {
        cmd.add_option("--problem", kind, "quadratic or lse")->check(CLI::IsMember({"quadratic", "lse"}));
        cmd.add_option("--n", n, "dimension");
        cmd.add_option("--q", q, "quadratic: lambda_min / lambda_max");
        cmd.add_option("--alpha", alpha, "quadratic: sigmoid spectrum parameter");
        cmd.add_option("--mu", mu, "lse: smoothing parameter");
        cmd.add_option("--seed", seed, "generator seed");
        cmd.add_option("--sigma", sigma, "add psi = sigma * d");
        cmd.add_option("--sigma-p", sigma_p, "order of the prox function in psi");
        cmd.add_option("--L2", lipschitz2, "override the Hessian Lipschitz constant");
        cmd.add_option("--b-scaling", b_scaling, "quadratic: unit_solution or raw");
    }

    Json to_json() const
    {
        Json j{{"kind", kind}, {"n", n}, {"seed", seed}};
        if (kind == "quadratic" && !q && !alpha) {
            j["q"] = 1e-2;
        }
        if (q) {
            j["q"] = *q;
        }
        if (alpha) {
            j["alpha"] = *alpha;
        }
        if (mu) {
            j["mu"] = *mu;
        }
        if (sigma) {
            j["sigma"] = *sigma;
        }
        if (sigma_p) {
            j["sigma_p"] = *sigma_p;
        }
        if (lipschitz2) {
            j["L2"] = *lipschitz2;
        }
        if (b_scaling) {
            j["b_scaling"] = *b_scaling;
        }
        return j;
    }
};

struct SolveFlags {
    double eps = 1e-7;
    std::optional<std::string> delta_schedule;
    std::optional<int> cap_outer;
    std::optional<int> cap_inner;
    std::optional<double> gamma0;
    std::optional<double> reg_m;

    void add(CLI::App& cmd)
    {
        cmd.add_option("--eps", eps, "target residual F(x) - F*");
        cmd.add_option("--delta-schedule", delta_schedule, "const:<v> | power:<c>,<s> | theorem");
        cmd.add_option("--cap-outer", cap_outer, "outer iteration cap");
        cmd.add_option("--cap-inner", cap_inner, "inner iteration cap per outer step");
        cmd.add_option("--gamma0", gamma0, "initial prox coefficient");
        cmd.add_option("--reg-m", reg_m, "cubic regularization constant of the baselines");
    }

    Json to_json() const
    {
        Json j{{"eps", eps}};
        if (delta_schedule) {
            j["delta_schedule"] = *delta_schedule;
        }
        if (cap_outer) {
            j["cap_outer"] = *cap_outer;
        }
        if (cap_inner) {
            j["cap_inner"] = *cap_inner;
        }
        if (gamma0) {
            j["gamma0"] = *gamma0;
        }
        if (reg_m) {
            j["reg_m"] = *reg_m;
        }
        return j;
    }
};

void require_known_methods(const std::vector<std::string>& methods)
{
    for (const auto& m : methods) {
        if (!cpm_is_known_method(m.c_str())) {
            throw UsageError("unknown method '" + m + "' (known: gm, agm, ppa, cn, acn, cptm-p1, cptm-p2, cpm-exact)");
        }
    }
}

int run_solve(const ProblemFlags& pf, const SolveFlags& sf, const std::vector<std::string>& methods,
              const std::string& out_dir, bool quiet)
{
    require_known_methods(methods);
    const Json options = sf.to_json();
    cpm_problem* raw = nullptr;
    check(cpm_problem_from_json(pf.to_json().dump().c_str(), &raw));
    ProblemHandle problem(raw);

    // Everything is computed before the first file is written, so a usage
    // error leaves the output directory untouched.
    struct Run {
        std::string method;
        TraceHandle trace;
        Json summary;
        Json validation;
    };
    std::vector<Run> runs;
    bool all_converged = true;
    for (const auto& m : methods) {
        cpm_trace* t = nullptr;
        check(cpm_solve(problem.get(), m.c_str(), options.dump().c_str(), &t));
        Run r{m, TraceHandle(t), {}, {}};
        char* s = nullptr;
        check(cpm_trace_summary(t, &s));
        r.summary = Json::parse(take(s));
        int violations = 0;
        char* v = nullptr;
        check(cpm_validate(t, nullptr, &violations, &v));
        const Json details = Json::parse(take(v));
        r.validation = Json{{"checks", details.at("checks")}, {"violations", violations}};
        all_converged = all_converged && r.summary.at("converged").get<bool>();
        runs.push_back(std::move(r));
    }

    char* d = nullptr;
    check(cpm_problem_descriptor(problem.get(), &d));
    const Json descriptor = Json::parse(take(d));
    Json report{{"instance", descriptor}, {"options", options}, {"runs", Json::array()}, {"all_converged", all_converged}};

    const fs::path dir(out_dir);
    fs::create_directories(dir);
    write_file(dir / "instance.json", descriptor.dump(2) + "\n");
    for (auto& r : runs) {
        const std::string file = "trace_" + r.method + ".csv";
        check(cpm_trace_write_csv(r.trace.get(), (dir / file).string().c_str()));
        Json entry = r.summary;
        entry["trace"] = file;
        entry["validation"] = r.validation;
        report["runs"].push_back(entry);
        if (!quiet) {
            std::printf("%-10s iterations=%-7d oracle_calls=%-9lld %s\n", r.method.c_str(),
                        r.summary.at("iterations").get<int>(), r.summary.at("oracle_calls").get<long long>(),
                        r.summary.at("status").get<std::string>().c_str());
        }
    }
    write_file(dir / "report.json", report.dump(2) + "\n");
    return all_converged ? kOk : kSolver;
}

int run_bench(const std::string& suite, const std::vector<int>& sizes, const std::vector<double>& params,
              const std::vector<std::uint64_t>& seeds, const std::vector<std::string>& methods, const SolveFlags& sf,
              const std::optional<std::string>& out_dir)
{
    require_known_methods(methods);
    Json spec = sf.to_json();
    spec["suite"] = suite;
    if (!sizes.empty()) {
        spec["sizes"] = sizes;
    }
    if (!params.empty()) {
        spec["params"] = params;
    }
    if (!seeds.empty()) {
        spec["seeds"] = seeds;
    }
    if (!methods.empty()) {
        spec["methods"] = methods;
    }
    char* report_text = nullptr;
    char* table_text = nullptr;
    check(cpm_bench(spec.dump().c_str(), &report_text, &table_text));
    const Json report = Json::parse(take(report_text));
    const std::string table = take(table_text);
    std::cout << table;
    if (out_dir) {
        const fs::path dir(*out_dir);
        fs::create_directories(dir);
        write_file(dir / "bench.json", report.dump(2) + "\n");
        write_file(dir / "bench.txt", table);
    }
    if (!report.at("all_converged").get<bool>()) {
        return kSolver;
    }
    return report.at("orderings_pass").get<bool>() ? kOk : kValidation;
}

int run_validate(const std::string& trace_path, const std::optional<std::string>& instance_path,
                 const std::optional<double>& slack, const std::optional<std::string>& out_path)
{
    cpm_trace* raw = nullptr;
    check(cpm_trace_read_csv(trace_path.c_str(), &raw));
    TraceHandle trace(raw);
    if (instance_path) {
        std::ifstream f(*instance_path);
        if (!f) {
            throw UsageError("cannot open instance descriptor " + *instance_path);
        }
        Json given;
        try {
            given = Json::parse(f);
        } catch (const Json::exception& e) {
            throw UsageError("malformed instance descriptor: " + std::string(e.what()));
        }
        char* h = nullptr;
        check(cpm_trace_header(trace.get(), &h));
        const Json recorded = Json::parse(take(h)).value("instance", Json::object());
        for (const char* key : {"kind", "n", "seed", "f_star"}) {
            if (given.contains(key) && recorded.contains(key) && given.at(key) != recorded.at(key)) {
                throw UsageError(std::string("instance descriptor disagrees with the trace on '") + key + "'");
            }
        }
    }
    Json options = Json::object();
    if (slack) {
        options["slack"] = *slack;
    }
    int violations = 0;
    char* details_text = nullptr;
    check(cpm_validate(trace.get(), options.dump().c_str(), &violations, &details_text));
    const Json details = Json::parse(take(details_text));
    for (const auto& [name, s] : details.at("summary").items()) {
        std::printf("%-5s %-24s checks=%-6d failures=%-5d worst_margin=%.3e (k=%d)\n",
                    s.at("pass").get<bool>() ? "PASS" : "FAIL", name.c_str(), s.at("count").get<int>(),
                    s.at("failures").get<int>(), s.at("worst_margin").get<double>(), s.at("worst_k").get<int>());
    }
    std::printf("%s: %d violations in %d checks\n", violations == 0 ? "valid" : "INVALID", violations,
                details.at("checks").get<int>());
    if (out_path) {
        write_file(*out_path, details.dump(2) + "\n");
    }
    return violations == 0 ? kOk : kValidation;
}

int run_curves(int p_min, int p_max, const std::optional<std::string>& out_path)
{
    if (p_min < 1 || p_max > 10 || p_min > p_max) {
        throw UsageError("p range must satisfy 1 <= p-min <= p-max <= 10");
    }
    std::string text = "p,delta,log2_delta,K\n";
    for (int p = p_min; p <= p_max; ++p) {
        double delta = 0.0;
        double k = 0.0;
        check(cpm_curve_point(p, &delta, &k));
        char line[128];
        std::snprintf(line, sizeof line, "%d,%.17g,%.17g,%.17g\n", p, delta, std::log2(delta), k);
        text += line;
    }
    std::cout << text;
    if (out_path) {
        write_file(*out_path, text);
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Contracting proximal methods: solve, bench, validate, curves"};
    app.require_subcommand(1);

    ProblemFlags solve_problem;
    SolveFlags solve_flags;
    std::vector<std::string> solve_methods;
    std::string solve_out = ".";
    bool quiet = false;
    auto* solve = app.add_subcommand("solve", "run methods on one instance, write traces and a report");
    solve_problem.add(*solve);
    solve_flags.add(*solve);
    solve->add_option("--method", solve_methods, "method (repeatable)")->required();
    solve->add_option("--out", solve_out, "output directory");
    solve->add_flag("--quiet", quiet, "no per-method lines");

    std::string suite = "quadratic";
    std::vector<int> bench_sizes;
    std::vector<double> bench_q;
    std::vector<double> bench_mu;
    std::vector<std::uint64_t> bench_seeds;
    std::vector<std::string> bench_methods;
    SolveFlags bench_flags;
    std::optional<std::string> bench_out;
    auto* bench = app.add_subcommand("bench", "median sweep over sizes, conditionings and seeds");
    bench->add_option("--problem,--suite", suite, "quadratic or lse")->check(CLI::IsMember({"quadratic", "lse"}));
    bench->add_option("--n", bench_sizes, "sizes (repeatable)");
    auto* q_opt = bench->add_option("--q", bench_q, "quadratic conditionings (repeatable)");
    auto* mu_opt = bench->add_option("--mu", bench_mu, "lse smoothing parameters (repeatable)");
    q_opt->excludes(mu_opt);
    bench->add_option("--seed", bench_seeds, "seeds (repeatable)");
    bench->add_option("--method", bench_methods, "methods (repeatable); default per suite");
    bench_flags.add(*bench);
    bench->add_option("--out", bench_out, "directory for bench.json and bench.txt");

    std::string trace_path;
    std::optional<std::string> instance_path;
    std::optional<double> slack;
    std::optional<std::string> validate_out;
    auto* validate = app.add_subcommand("validate", "check the run-time inequalities of a trace");
    validate->add_option("--trace", trace_path, "trace CSV")->required();
    validate->add_option("--instance", instance_path, "instance descriptor JSON to cross-check");
    validate->add_option("--slack", slack, "relative slack of the certificate check");
    validate->add_option("--out", validate_out, "report JSON path");

    int p_min = 1;
    int p_max = 10;
    std::optional<std::string> curves_out;
    auto* curves = app.add_subcommand("curves", "delta(p) and K(p) of the convex complexity bound");
    curves->add_option("--p-min", p_min, "smallest p");
    curves->add_option("--p-max", p_max, "largest p");
    curves->add_option("--out", curves_out, "CSV path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }

    try {
        if (*solve) {
            if (solve_problem.kind == "lse" && !solve->count("--eps")) {
                solve_flags.eps = 1e-8;
            }
            return run_solve(solve_problem, solve_flags, solve_methods, solve_out, quiet);
        }
        if (*bench) {
            if (suite == "lse" && !bench->count("--eps")) {
                bench_flags.eps = 1e-8;
            }
            if (suite == "quadratic" && !bench_mu.empty()) {
                throw UsageError("--mu applies to the lse suite");
            }
            if (suite == "lse" && !bench_q.empty()) {
                throw UsageError("--q applies to the quadratic suite");
            }
            return run_bench(suite, bench_sizes, suite == "quadratic" ? bench_q : bench_mu, bench_seeds,
                             bench_methods, bench_flags, bench_out);
        }
        if (*validate) {
            return run_validate(trace_path, instance_path, slack, validate_out);
        }
        return run_curves(p_min, p_max, curves_out);
    } catch (const UsageError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kUsage;
    } catch (const SolverFailure& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kSolver;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kSolver;
    }
}
