#pragma once

#include "cpm/baselines.hpp"
#include "cpm/contracting.hpp"

#include <optional>
#include <string>
#include <vector>

namespace cpm {

/// Instance description: quadratic{n, q or alpha, seed} or lse{n, mu, seed},
/// optionally with psi = sigma d and overridden Lipschitz constants.
struct ProblemSpec {
    std::string kind = "quadratic";
    int n = 50;
    std::optional<double> q;
    std::optional<double> alpha;
    double mu = 1.0;
    std::uint64_t seed = 1;
    double sigma = 0.0;  ///< psi = sigma d when positive
    int sigma_p = 1;     ///< order of the prox function in psi
    std::optional<double> lipschitz1;
    std::optional<double> lipschitz2;
    bool raw_b = false;  ///< keep b uniform[-1,1] without rescaling

    Json descriptor() const;
    /// Keys: kind, n, q, alpha, mu, seed, sigma, sigma_p, L1, L2, b_scaling.
    /// Unknown keys are rejected.
    static ProblemSpec from_json(const Json& j);
};

/// Builds the instance and attaches its reference optimum.
CompositeObjective make_instance(const ProblemSpec& spec);

struct SolveOptions {
    double eps = 1e-7;
    int cap_outer = 0;  ///< 0: method default
    int cap_inner = 0;  ///< 0: 4x the inner bound
    std::string delta_schedule = "power:1,2";
    double gamma0 = 1.0;
    double reg_m = 1.0;

    Json to_json() const;
    /// Keys as in to_json; unknown keys are rejected.
    static SolveOptions from_json(const Json& j);
};

/// gm, agm, ppa, cn, acn, cptm-p1, cptm-p2, cpm-exact.
const std::vector<std::string>& known_methods();
bool is_known_method(const std::string& name);

/// Runs one method. Throws InvalidArgument for unknown names or bad options;
/// solver failures are reported in the returned trace.
RunTrace run_method(const CompositeObjective& obj, const std::string& method, const SolveOptions& options);

struct BenchSpec {
    std::string suite = "quadratic";  ///< quadratic | lse
    std::vector<int> sizes{100};
    std::vector<double> params{1e-2, 1e-4};  ///< q for quadratic, mu for lse
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
    std::vector<std::string> methods;       ///< empty: suite default
    SolveOptions options;

    static BenchSpec from_json(const Json& j);
};

/// Cartesian sweep with medians over seeds, per-row ordering checks and a
/// plain-text table. Failures are recorded per cell and the sweep continues.
Json run_bench(const BenchSpec& spec);

/// Fixed-width table of the rows of a bench report.
std::string bench_table(const Json& report);

}  // namespace cpm
