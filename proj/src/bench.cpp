#include "cpm/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <initializer_list>
#include <map>
#include <sstream>

namespace cpm {

Json ProblemSpec::descriptor() const
{
    Json j{{"kind", kind}, {"n", n}, {"seed", seed}};
    if (kind == "quadratic") {
        if (q) {
            j["q"] = *q;
        }
        if (alpha) {
            j["alpha"] = *alpha;
        }
        j["b_scaling"] = raw_b ? "raw" : "unit_solution";
    } else {
        j["mu"] = mu;
    }
    if (sigma > 0.0) {
        j["sigma"] = sigma;
        j["sigma_p"] = sigma_p;
    }
    if (lipschitz1) {
        j["L1"] = *lipschitz1;
    }
    if (lipschitz2) {
        j["L2"] = *lipschitz2;
    }
    return j;
}

namespace {

void reject_unknown_keys(const Json& j, std::initializer_list<const char*> allowed, const std::string& what)
{
    if (!j.is_object()) {
        throw InvalidArgument(what + " must be a JSON object");
    }
    for (const auto& item : j.items()) {
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* k) { return item.key() == k; })) {
            throw InvalidArgument("unknown " + what + " key '" + item.key() + "'");
        }
    }
}

template <class T>
T get_as(const Json& j, const char* key, const std::string& what)
{
    try {
        return j.at(key).get<T>();
    } catch (const Json::exception&) {
        throw InvalidArgument(what + " key '" + key + "' has the wrong type");
    }
}

}  // namespace

ProblemSpec ProblemSpec::from_json(const Json& j)
{
    reject_unknown_keys(j, {"kind", "n", "q", "alpha", "mu", "seed", "sigma", "sigma_p", "L1", "L2", "b_scaling"},
                        "problem");
    const std::string what = "problem";
    ProblemSpec s;
    if (j.contains("kind")) {
        s.kind = get_as<std::string>(j, "kind", what);
    }
    if (j.contains("n")) {
        s.n = get_as<int>(j, "n", what);
    }
    if (j.contains("q")) {
        s.q = get_as<double>(j, "q", what);
    }
    if (j.contains("alpha")) {
        s.alpha = get_as<double>(j, "alpha", what);
    }
    if (j.contains("mu")) {
        s.mu = get_as<double>(j, "mu", what);
    }
    if (j.contains("seed")) {
        s.seed = get_as<std::uint64_t>(j, "seed", what);
    }
    if (j.contains("sigma")) {
        s.sigma = get_as<double>(j, "sigma", what);
    }
    if (j.contains("sigma_p")) {
        s.sigma_p = get_as<int>(j, "sigma_p", what);
    }
    if (j.contains("L1")) {
        s.lipschitz1 = get_as<double>(j, "L1", what);
    }
    if (j.contains("L2")) {
        s.lipschitz2 = get_as<double>(j, "L2", what);
    }
    if (j.contains("b_scaling")) {
        const auto b = get_as<std::string>(j, "b_scaling", what);
        if (b != "raw" && b != "unit_solution") {
            throw InvalidArgument("b_scaling must be raw or unit_solution");
        }
        s.raw_b = b == "raw";
    }
    if (s.n < 1) {
        throw InvalidArgument("problem size n must be positive");
    }
    if (!(s.mu > 0.0)) {
        throw InvalidArgument("mu must be positive");
    }
    if (s.sigma < 0.0 || s.sigma_p < 1) {
        throw InvalidArgument("regularizer needs sigma >= 0 and sigma_p >= 1");
    }
    return s;
}

Json SolveOptions::to_json() const
{
    return Json{{"eps", eps},
                {"cap_outer", cap_outer},
                {"cap_inner", cap_inner},
                {"delta_schedule", delta_schedule},
                {"gamma0", gamma0},
                {"reg_m", reg_m}};
}

SolveOptions SolveOptions::from_json(const Json& j)
{
    reject_unknown_keys(j, {"eps", "cap_outer", "cap_inner", "delta_schedule", "gamma0", "reg_m"}, "solve option");
    const std::string what = "solve option";
    SolveOptions o;
    if (j.contains("eps")) {
        o.eps = get_as<double>(j, "eps", what);
    }
    if (j.contains("cap_outer")) {
        o.cap_outer = get_as<int>(j, "cap_outer", what);
    }
    if (j.contains("cap_inner")) {
        o.cap_inner = get_as<int>(j, "cap_inner", what);
    }
    if (j.contains("delta_schedule")) {
        o.delta_schedule = get_as<std::string>(j, "delta_schedule", what);
    }
    if (j.contains("gamma0")) {
        o.gamma0 = get_as<double>(j, "gamma0", what);
    }
    if (j.contains("reg_m")) {
        o.reg_m = get_as<double>(j, "reg_m", what);
    }
    if (!(o.eps > 0.0)) {
        throw InvalidArgument("eps must be positive");
    }
    if (o.cap_outer < 0 || o.cap_inner < 0) {
        throw InvalidArgument("caps must be nonnegative");
    }
    if (!(o.gamma0 > 0.0) || !(o.reg_m > 0.0)) {
        throw InvalidArgument("gamma0 and reg_m must be positive");
    }
    DeltaSchedule::parse(o.delta_schedule);
    return o;
}

CompositeObjective make_instance(const ProblemSpec& spec)
{
    CompositeObjective obj;
    if (spec.kind == "quadratic") {
        if (spec.q && spec.alpha) {
            throw InvalidArgument("give either q or alpha for the quadratic, not both");
        }
        double alpha = 0.0;
        if (spec.alpha) {
            alpha = *spec.alpha;
        } else if (spec.q) {
            if (!(*spec.q > 0.0) || !(*spec.q < 1.0)) {
                throw InvalidArgument("q must lie in (0, 1)");
            }
            alpha = alpha_for_condition(*spec.q);
        } else {
            throw InvalidArgument("quadratic instance needs q or alpha");
        }
        if (!(alpha > 0.0)) {
            throw InvalidArgument("alpha must be positive");
        }
        obj = quadratic_instance(spec.n, alpha, spec.seed, !spec.raw_b);
        if (spec.q) {
            obj.descriptor["q"] = *spec.q;
        }
    } else if (spec.kind == "lse") {
        obj = lse_instance(spec.n, spec.mu, spec.seed);
    } else {
        throw InvalidArgument("unknown problem kind '" + spec.kind + "' (expected quadratic or lse)");
    }
    if (spec.lipschitz1) {
        obj.smooth->set_lipschitz(1, *spec.lipschitz1);
        obj.descriptor["L1"] = *spec.lipschitz1;
    }
    if (spec.lipschitz2) {
        obj.smooth->set_lipschitz(2, *spec.lipschitz2);
        obj.descriptor["L2"] = *spec.lipschitz2;
    }
    if (spec.sigma > 0.0) {
        attach_power_regularizer(obj, spec.sigma, spec.sigma_p);
    }
    attach_reference_optimum(obj, 1e-12);
    return obj;
}

const std::vector<std::string>& known_methods()
{
    static const std::vector<std::string> names{"gm", "agm", "ppa", "cn", "acn", "cptm-p1", "cptm-p2", "cpm-exact"};
    return names;
}

bool is_known_method(const std::string& name)
{
    const auto& names = known_methods();
    return std::find(names.begin(), names.end(), name) != names.end();
}

RunTrace run_method(const CompositeObjective& obj, const std::string& method, const SolveOptions& options)
{
    if (!is_known_method(method)) {
        throw InvalidArgument("unknown method '" + method + "'");
    }
    if (method.rfind("cp", 0) == 0) {
        CptmConfig config;
        config.p = method == "cptm-p2" ? 2 : 1;
        config.gamma0 = options.gamma0;
        config.delta = DeltaSchedule::parse(options.delta_schedule);
        config.eps = options.eps;
        config.cap_outer = options.cap_outer > 0 ? options.cap_outer : 10000;
        config.cap_inner = options.cap_inner;
        config.inner = method == "cpm-exact" ? InnerKind::newton : InnerKind::tensor;
        config.method_name = method;
        return run_cptm(obj, config);
    }
    BaselineConfig config;
    config.eps = options.eps;
    config.cap = options.cap_outer > 0 ? options.cap_outer : 100000;
    config.reg_m = options.reg_m;
    if (method == "gm") {
        return gradient_method_ls(obj, config);
    }
    if (method == "agm") {
        return accelerated_gradient(obj, config);
    }
    if (method == "ppa") {
        return classical_ppa(obj, config);
    }
    if (method == "cn") {
        return cubic_newton(obj, config);
    }
    return accelerated_cubic_newton(obj, config);
}

BenchSpec BenchSpec::from_json(const Json& j)
{
    reject_unknown_keys(j,
                        {"suite", "sizes", "params", "seeds", "methods", "eps", "cap_outer", "cap_inner",
                         "delta_schedule", "gamma0", "reg_m"},
                        "bench");
    const std::string what = "bench";
    BenchSpec s;
    if (j.contains("suite")) {
        s.suite = get_as<std::string>(j, "suite", what);
    }
    if (s.suite != "quadratic" && s.suite != "lse") {
        throw InvalidArgument("bench suite must be quadratic or lse");
    }
    if (s.suite == "lse") {
        s.params = {1.0, 0.1};
        s.sizes = {50};
        s.seeds = {1, 2, 3};
    }
    if (j.contains("sizes")) {
        s.sizes = get_as<std::vector<int>>(j, "sizes", what);
    }
    if (j.contains("params")) {
        s.params = get_as<std::vector<double>>(j, "params", what);
    }
    if (j.contains("seeds")) {
        s.seeds = get_as<std::vector<std::uint64_t>>(j, "seeds", what);
    }
    if (j.contains("methods")) {
        s.methods = get_as<std::vector<std::string>>(j, "methods", what);
    }
    Json opts = Json::object();
    for (const char* k : {"eps", "cap_outer", "cap_inner", "delta_schedule", "gamma0", "reg_m"}) {
        if (j.contains(k)) {
            opts[k] = j.at(k);
        }
    }
    s.options = SolveOptions::from_json(opts);
    if (s.sizes.empty() || s.params.empty() || s.seeds.empty()) {
        throw InvalidArgument("bench grids must be nonempty");
    }
    for (const auto& m : s.methods) {
        if (!is_known_method(m)) {
            throw InvalidArgument("unknown method '" + m + "'");
        }
    }
    return s;
}

namespace {

double median(std::vector<double> v)
{
    if (v.empty()) {
        return std::nan("");
    }
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

struct Ordering {
    std::string smaller;
    std::string larger;
    std::string metric;
    double factor = 1.0;  ///< require factor * smaller < larger
};

}  // namespace

Json run_bench(const BenchSpec& spec)
{
    std::vector<std::string> methods = spec.methods;
    if (methods.empty()) {
        methods = spec.suite == "quadratic" ? std::vector<std::string>{"gm", "agm", "ppa", "cptm-p1"}
                                            : std::vector<std::string>{"cn", "acn", "cptm-p2"};
    }
    for (const auto& m : methods) {
        if (!is_known_method(m)) {
            throw InvalidArgument("unknown method '" + m + "'");
        }
    }
    DeltaSchedule::parse(spec.options.delta_schedule);

    const std::vector<Ordering> orderings =
        spec.suite == "quadratic"
            ? std::vector<Ordering>{{"cptm-p1", "ppa", "iterations"}, {"agm", "gm", "iterations"}}
            : std::vector<Ordering>{{"cptm-p2", "cn", "iterations"}};

    Json rows = Json::array();
    Json checks = Json::array();
    bool all_converged = true;
    bool all_orderings = true;
    for (int n : spec.sizes) {
        for (double param : spec.params) {
            std::map<std::string, std::vector<double>> iters;
            std::map<std::string, std::vector<double>> calls;
            std::map<std::string, std::vector<double>> matvecs;
            std::map<std::string, Json> failures;
            std::map<std::string, int> converged;
            Json instances = Json::array();
            for (auto seed : spec.seeds) {
                ProblemSpec ps;
                ps.kind = spec.suite;
                ps.n = n;
                ps.seed = seed;
                if (spec.suite == "quadratic") {
                    ps.q = param;
                } else {
                    ps.mu = param;
                }
                CompositeObjective obj;
                try {
                    obj = make_instance(ps);
                } catch (const std::exception& e) {
                    for (const auto& m : methods) {
                        failures[m].push_back(Json{{"seed", seed}, {"error", e.what()}});
                    }
                    all_converged = false;
                    continue;
                }
                instances.push_back(obj.descriptor);
                for (const auto& m : methods) {
                    const RunTrace t = run_method(obj, m, spec.options);
                    if (!t.converged) {
                        failures[m].push_back(Json{{"seed", seed}, {"status", t.status}});
                        all_converged = false;
                        continue;
                    }
                    ++converged[m];
                    iters[m].push_back(t.iterations());
                    calls[m].push_back(static_cast<double>(t.oracle_totals().total()));
                    matvecs[m].push_back(static_cast<double>(t.oracle_totals().matvec));
                }
            }
            std::map<std::string, Json> cell;
            for (const auto& m : methods) {
                Json row{{"n", n},
                         {spec.suite == "quadratic" ? "q" : "mu", param},
                         {"method", m},
                         {"iterations", median(iters[m])},
                         {"oracle_calls", median(calls[m])},
                         {"matvec", median(matvecs[m])},
                         {"converged", converged[m]},
                         {"seeds", spec.seeds.size()},
                         {"failures", failures.count(m) ? failures[m] : Json::array()},
                         {"instances", instances}};
                cell[m] = row;
                rows.push_back(row);
            }
            for (const auto& o : orderings) {
                if (!cell.count(o.smaller) || !cell.count(o.larger)) {
                    continue;
                }
                const Json& ja = cell[o.smaller][o.metric];
                const Json& jb = cell[o.larger][o.metric];
                const double a = ja.is_number() ? ja.get<double>() : std::nan("");
                const double b = jb.is_number() ? jb.get<double>() : std::nan("");
                const bool pass = std::isfinite(a) && std::isfinite(b) && o.factor * a < b;
                all_orderings = all_orderings && pass;
                checks.push_back(Json{{"n", n},
                                      {"param", param},
                                      {"relation", o.smaller + " " + o.metric + " < " + o.larger + " " + o.metric},
                                      {"lhs", a},
                                      {"rhs", b},
                                      {"pass", pass}});
            }
        }
    }
    return Json{{"suite", spec.suite},
                {"eps", spec.options.eps},
                {"delta_schedule", spec.options.delta_schedule},
                {"methods", methods},
                {"rows", rows},
                {"orderings", checks},
                {"all_converged", all_converged},
                {"orderings_pass", all_orderings}};
}

std::string bench_table(const Json& report)
{
    const std::string param = report.value("suite", "") == "quadratic" ? "q" : "mu";
    std::ostringstream out;
    char line[160];
    std::snprintf(line, sizeof line, "%6s %10s %-10s %12s %14s %12s %10s\n", "n", param.c_str(), "method", "iterations",
                  "oracle_calls", "matvec", "converged");
    out << line;
    for (const auto& r : report.at("rows")) {
        std::snprintf(line, sizeof line, "%6d %10.3g %-10s %12.1f %14.1f %12.1f %7d/%-2d\n", r.at("n").get<int>(),
                      r.at(param).get<double>(), r.at("method").get<std::string>().c_str(),
                      r.at("iterations").is_number() ? r.at("iterations").get<double>() : std::nan(""),
                      r.at("oracle_calls").is_number() ? r.at("oracle_calls").get<double>() : std::nan(""),
                      r.at("matvec").is_number() ? r.at("matvec").get<double>() : std::nan(""),
                      r.at("converged").get<int>(), r.at("seeds").get<int>());
        out << line;
    }
    for (const auto& c : report.at("orderings")) {
        out << (c.at("pass").get<bool>() ? "PASS " : "FAIL ") << "n=" << c.at("n") << ' ' << param << '='
            << c.at("param") << ": " << c.at("relation").get<std::string>() << " (" << c.at("lhs") << " vs "
            << c.at("rhs") << ")\n";
    }
    return out.str();
}

}  // namespace cpm
