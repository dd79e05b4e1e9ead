#include "cpm/cpm.h"

#include "cpm/bench.hpp"
#include "cpm/validate.hpp"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>

struct cpm_problem {
    cpm::CompositeObjective obj;
};

struct cpm_trace {
    cpm::RunTrace trace;
};

namespace {

thread_local std::string g_last_error;

cpm_status fail(cpm_status status, const std::string& message)
{
    g_last_error = message;
    return status;
}

/// Maps exceptions escaping the core onto status codes.
template <class F>
cpm_status guarded(F&& body)
{
    try {
        g_last_error.clear();
        body();
        return CPM_OK;
    } catch (const cpm::InvalidArgument& e) {
        return fail(CPM_ERR_INVALID_ARGUMENT, e.what());
    } catch (const cpm::ParseError& e) {
        return fail(CPM_ERR_PARSE, e.what());
    } catch (const cpm::Json::exception& e) {
        return fail(CPM_ERR_PARSE, std::string("JSON: ") + e.what());
    } catch (const cpm::SolverError& e) {
        return fail(CPM_ERR_SOLVER, e.what());
    } catch (const std::ios_base::failure& e) {
        return fail(CPM_ERR_IO, e.what());
    } catch (const std::exception& e) {
        return fail(CPM_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(CPM_ERR_INTERNAL, "unknown error");
    }
}

void require(bool cond, const char* what)
{
    if (!cond) {
        throw cpm::InvalidArgument(what);
    }
}

char* copy_string(const std::string& s)
{
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out == nullptr) {
        throw std::bad_alloc();
    }
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

cpm::Json parse_optional(const char* text)
{
    if (text == nullptr || *text == '\0') {
        return cpm::Json::object();
    }
    return cpm::Json::parse(text);
}

cpm_status make_problem(const cpm::ProblemSpec& spec, cpm_problem** out)
{
    return guarded([&] {
        require(out != nullptr, "output handle pointer is null");
        *out = nullptr;
        auto p = std::make_unique<cpm_problem>();
        p->obj = cpm::make_instance(spec);
        *out = p.release();
    });
}

}  // namespace

extern "C" {

const char* cpm_version(void) { return "1.0.0"; }

const char* cpm_last_error(void) { return g_last_error.c_str(); }

const char* cpm_status_name(cpm_status status)
{
    switch (status) {
    case CPM_OK:
        return "ok";
    case CPM_ERR_INVALID_ARGUMENT:
        return "invalid argument";
    case CPM_ERR_SOLVER:
        return "solver failure";
    case CPM_ERR_PARSE:
        return "parse error";
    case CPM_ERR_IO:
        return "i/o error";
    case CPM_ERR_INTERNAL:
        return "internal error";
    }
    return "unknown status";
}

void cpm_string_free(char* s) { std::free(s); }

cpm_status cpm_problem_from_json(const char* spec_json, cpm_problem** out)
{
    cpm::ProblemSpec spec;
    const cpm_status st = guarded([&] {
        require(spec_json != nullptr, "problem spec is null");
        spec = cpm::ProblemSpec::from_json(cpm::Json::parse(spec_json));
    });
    if (st != CPM_OK) {
        if (out != nullptr) {
            *out = nullptr;
        }
        return st;
    }
    return make_problem(spec, out);
}

cpm_status cpm_problem_quadratic(int n, double q, unsigned long long seed, cpm_problem** out)
{
    cpm::ProblemSpec spec;
    spec.kind = "quadratic";
    spec.n = n;
    spec.q = q;
    spec.seed = seed;
    return make_problem(spec, out);
}

cpm_status cpm_problem_lse(int n, double mu, unsigned long long seed, cpm_problem** out)
{
    cpm::ProblemSpec spec;
    spec.kind = "lse";
    spec.n = n;
    spec.mu = mu;
    spec.seed = seed;
    return make_problem(spec, out);
}

cpm_status cpm_problem_dim(const cpm_problem* problem, int* n)
{
    return guarded([&] {
        require(problem != nullptr && n != nullptr, "null argument");
        *n = static_cast<int>(problem->obj.dim());
    });
}

cpm_status cpm_problem_descriptor(const cpm_problem* problem, char** json)
{
    return guarded([&] {
        require(problem != nullptr && json != nullptr, "null argument");
        *json = copy_string(problem->obj.descriptor.dump());
    });
}

cpm_status cpm_problem_optimum(const cpm_problem* problem, double* f_star)
{
    return guarded([&] {
        require(problem != nullptr && f_star != nullptr, "null argument");
        if (!problem->obj.f_star) {
            throw cpm::SolverError("optimum is unknown for this problem");
        }
        *f_star = *problem->obj.f_star;
    });
}

cpm_status cpm_problem_value(const cpm_problem* problem, const double* x, size_t n, double* value)
{
    return guarded([&] {
        require(problem != nullptr && x != nullptr && value != nullptr, "null argument");
        require(static_cast<std::ptrdiff_t>(n) == problem->obj.dim(), "point has the wrong dimension");
        const cpm::Vector v = Eigen::Map<const cpm::Vector>(x, static_cast<Eigen::Index>(n));
        *value = problem->obj.peek_value(v);
    });
}

void cpm_problem_destroy(cpm_problem* problem) { delete problem; }

int cpm_is_known_method(const char* method) { return method != nullptr && cpm::is_known_method(method) ? 1 : 0; }

cpm_status cpm_solve(const cpm_problem* problem, const char* method, const char* options_json, cpm_trace** out)
{
    return guarded([&] {
        require(out != nullptr, "output handle pointer is null");
        *out = nullptr;
        require(problem != nullptr && method != nullptr, "null argument");
        const cpm::SolveOptions options = cpm::SolveOptions::from_json(parse_optional(options_json));
        auto t = std::make_unique<cpm_trace>();
        t->trace = cpm::run_method(problem->obj, method, options);
        *out = t.release();
    });
}

cpm_status cpm_trace_write_csv(const cpm_trace* trace, const char* path)
{
    return guarded([&] {
        require(trace != nullptr && path != nullptr, "null argument");
        std::ofstream f(path, std::ios::binary);
        if (!f) {
            throw std::ios_base::failure(std::string("cannot open '") + path + "' for writing");
        }
        cpm::write_trace_csv(trace->trace, f);
        if (!f) {
            throw std::ios_base::failure(std::string("write to '") + path + "' failed");
        }
    });
}

cpm_status cpm_trace_read_csv(const char* path, cpm_trace** out)
{
    return guarded([&] {
        require(out != nullptr, "output handle pointer is null");
        *out = nullptr;
        require(path != nullptr, "null path");
        std::ifstream f(path, std::ios::binary);
        if (!f) {
            throw std::ios_base::failure(std::string("cannot open '") + path + "'");
        }
        auto t = std::make_unique<cpm_trace>();
        t->trace = cpm::read_trace_csv(f);
        *out = t.release();
    });
}

cpm_status cpm_trace_to_csv(const cpm_trace* trace, char** csv)
{
    return guarded([&] {
        require(trace != nullptr && csv != nullptr, "null argument");
        std::ostringstream s;
        cpm::write_trace_csv(trace->trace, s);
        *csv = copy_string(s.str());
    });
}

cpm_status cpm_trace_summary(const cpm_trace* trace, char** json)
{
    return guarded([&] {
        require(trace != nullptr && json != nullptr, "null argument");
        *json = copy_string(cpm::trace_summary(trace->trace).dump());
    });
}

cpm_status cpm_trace_header(const cpm_trace* trace, char** json)
{
    return guarded([&] {
        require(trace != nullptr && json != nullptr, "null argument");
        *json = copy_string(trace->trace.header.dump());
    });
}

cpm_status cpm_trace_converged(const cpm_trace* trace, int* converged)
{
    return guarded([&] {
        require(trace != nullptr && converged != nullptr, "null argument");
        *converged = trace->trace.converged ? 1 : 0;
    });
}

cpm_status cpm_trace_status(const cpm_trace* trace, char** status)
{
    return guarded([&] {
        require(trace != nullptr && status != nullptr, "null argument");
        *status = copy_string(trace->trace.status);
    });
}

cpm_status cpm_trace_iterations(const cpm_trace* trace, int* iterations)
{
    return guarded([&] {
        require(trace != nullptr && iterations != nullptr, "null argument");
        *iterations = trace->trace.iterations();
    });
}

void cpm_trace_destroy(cpm_trace* trace) { delete trace; }

cpm_status cpm_validate(const cpm_trace* trace, const char* options_json, int* violations, char** report_json)
{
    return guarded([&] {
        require(trace != nullptr, "null trace");
        const cpm::Json j = parse_optional(options_json);
        cpm::ValidationOptions opts;
        for (const auto& item : j.items()) {
            if (item.key() == "slack") {
                opts.slack = item.value().get<double>();
            } else if (item.key() == "identity_tol") {
                opts.identity_tol = item.value().get<double>();
            } else if (item.key() == "inner_factor") {
                opts.inner_factor = item.value().get<double>();
            } else {
                throw cpm::InvalidArgument("unknown validation option '" + item.key() + "'");
            }
        }
        const cpm::ValidationReport report = cpm::validate_trace(trace->trace, opts);
        if (violations != nullptr) {
            *violations = report.violations;
        }
        if (report_json != nullptr) {
            *report_json = copy_string(report.details.dump());
        }
    });
}

cpm_status cpm_bench(const char* spec_json, char** report_json, char** table)
{
    return guarded([&] {
        require(spec_json != nullptr, "bench spec is null");
        const cpm::BenchSpec spec = cpm::BenchSpec::from_json(cpm::Json::parse(spec_json));
        const cpm::Json report = cpm::run_bench(spec);
        if (report_json != nullptr) {
            *report_json = copy_string(report.dump());
        }
        if (table != nullptr) {
            *table = copy_string(cpm::bench_table(report));
        }
    });
}

cpm_status cpm_curve_point(int p, double* delta, double* k)
{
    return guarded([&] {
        require(p >= 1 && p <= 10, "p must lie in [1, 10]");
        require(delta != nullptr && k != nullptr, "null argument");
        *delta = cpm::curve_delta(p);
        *k = cpm::curve_k(p);
    });
}

}  // extern "C"
