#include "cpm/validate.hpp"

#include "cpm/contracting.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace cpm {

namespace {

constexpr std::size_t kMaxListedFailures = 50;

class Collector {
  public:
    void record(const std::string& name, int k, bool pass, double lhs, double rhs)
    {
        auto& s = summary_[name];
        ++s.count;
        ++checks;
        const double margin = rhs - lhs;
        if (s.count == 1 || margin < s.worst_margin) {
            s.worst_margin = margin;
            s.worst_k = k;
        }
        if (!pass) {
            ++s.failures;
            ++violations;
            if (failures_.size() < kMaxListedFailures) {
                failures_.push_back(Json{{"check", name}, {"k", k}, {"lhs", lhs}, {"rhs", rhs}});
            }
        }
    }

    Json summary() const
    {
        Json out = Json::object();
        for (const auto& [name, s] : summary_) {
            out[name] = Json{{"count", s.count},
                             {"failures", s.failures},
                             {"worst_margin", s.worst_margin},
                             {"worst_k", s.worst_k},
                             {"pass", s.failures == 0}};
        }
        return out;
    }

    const Json& failures() const { return failures_; }

    int checks = 0;
    int violations = 0;

  private:
    struct Summary {
        int count = 0;
        int failures = 0;
        double worst_margin = 0.0;
        int worst_k = 0;
    };
    std::map<std::string, Summary> summary_;
    Json failures_ = Json::array();
};

double header_number(const Json& h, const char* key, double fallback)
{
    auto it = h.find(key);
    if (it == h.end() || !it->is_number()) {
        return fallback;
    }
    return it->get<double>();
}

bool is_contracting(const std::string& method)
{
    return method.rfind("cptm", 0) == 0 || method.rfind("cpm", 0) == 0;
}

bool is_monotone_method(const std::string& method)
{
    return method == "gm" || method == "ppa" || method == "cn";
}

void check_schedule(const RunTrace& trace, const Json& schedule, double tol, Collector& out)
{
    const std::string kind = schedule.value("kind", "");
    if (kind == "sublinear") {
        const double c = schedule.value("c", 0.0);
        const int p = schedule.value("p", 1);
        for (const auto& r : trace.records) {
            if (r.k < 1) {
                continue;
            }
            const double lo = c * std::pow(r.k, p + 1);
            const double hi = c * std::pow(r.k + 1.0, p + 1);
            out.record("schedule_lower", r.k, lo <= r.A * (1.0 + tol), lo, r.A);
            out.record("schedule_upper", r.k, r.A <= hi * (1.0 + tol), r.A, hi);
        }
    } else if (kind == "geometric") {
        const double omega = schedule.value("omega", 0.0);
        const double a1 = schedule.value("a1", 0.0);
        const double e = std::exp(1.0);
        for (const auto& r : trace.records) {
            if (r.k < 1) {
                continue;
            }
            const double lo = a1 * std::exp(omega * (r.k - 1));
            const double hi = a1 * std::exp(omega * e / (e - 1.0) * (r.k - 1));
            out.record("schedule_lower", r.k, lo <= r.A * (1.0 + tol), lo, r.A);
            out.record("schedule_upper", r.k, r.A <= hi * (1.0 + tol), r.A, hi);
        }
    }
}

}  // namespace

ValidationReport validate_trace(const RunTrace& trace, const ValidationOptions& options)
{
    const Json& h = trace.header;
    const std::string method = h.value("method", "");
    const double tol = options.identity_tol;
    Collector out;
    Json certificate = Json::array();

    for (std::size_t i = 1; i < trace.records.size(); ++i) {
        const auto& prev = trace.records[i - 1];
        const auto& r = trace.records[i];
        out.record("k_increments", r.k, r.k == prev.k + 1, r.k, prev.k + 1);
    }

    if (is_contracting(method) && !trace.records.empty()) {
        const int p = h.value("p", 1);
        const double gamma0 = header_number(h, "gamma0", 1.0);
        const double sigma_psi = header_number(h, "sigma_psi", 0.0);
        const double sigma_unif = header_number(h, "sigma_unif", std::pow(2.0, 1 - p));
        const double bregman0 = header_number(h, "bregman0", std::nan(""));

        for (std::size_t i = 0; i < trace.records.size(); ++i) {
            const auto& r = trace.records[i];
            const double expected_gamma = gamma0 + sigma_psi * r.A;
            out.record("gamma_identity", r.k,
                       std::abs(r.gamma - expected_gamma) <= tol * std::max(1.0, std::abs(expected_gamma)), r.gamma,
                       expected_gamma);
            if (i > 0) {
                const auto& prev = trace.records[i - 1];
                const double expected_a = prev.A + r.a;
                out.record("a_sum_identity", r.k,
                           std::abs(r.A - expected_a) <= tol * std::max(1.0, std::abs(expected_a)), r.A, expected_a);
                out.record("a_positive", r.k, r.a > 0.0, 0.0, r.a);
            }
        }
        if (h.contains("schedule") && h["schedule"].is_object()) {
            check_schedule(trace, h["schedule"], tol, out);
        }

        // Certificate: A_k (F(x_k) - F*) + gamma_k beta(v_k; x*) + sum_i gamma_{i-1} beta(v_{i-1}; v_i) <= R_k,
        // with R_k built from the achieved subgradient norms.
        if (std::isfinite(bregman0)) {
            std::vector<double> deltas;
            std::vector<double> a_sums;
            double path = 0.0;
            for (std::size_t i = 0; i < trace.records.size(); ++i) {
                const auto& r = trace.records[i];
                if (i > 0) {
                    path += trace.records[i - 1].gamma * r.breg_step;
                    deltas.push_back(r.s_norm);
                    a_sums.push_back(r.A);
                }
                if (std::isnan(r.residual) || std::isnan(r.breg_opt)) {
                    continue;
                }
                const double lhs = r.A * r.residual + r.gamma * r.breg_opt + path;
                const double rhs = rk_bound(p, gamma0, sigma_psi, bregman0, sigma_unif, deltas, a_sums);
                const bool pass = lhs <= rhs * (1.0 + options.slack);
                out.record("certificate", r.k, pass, lhs, rhs);
                certificate.push_back(Json{{"k", r.k}, {"lhs", lhs}, {"rhs", rhs}, {"margin", rhs - lhs}, {"pass", pass}});
            }
        }

        const double factor =
            options.inner_factor > 0.0 ? options.inner_factor : header_number(h, "inner_cap_factor", 4.0);
        for (const auto& r : trace.records) {
            if (r.k < 1) {
                continue;
            }
            if (std::isfinite(r.inner_bound) && r.inner_bound > 0.0) {
                out.record("inner_iteration_bound", r.k, r.inner_iterations <= factor * r.inner_bound,
                           r.inner_iterations, factor * r.inner_bound);
            }
            out.record("inner_descent", r.k, r.descent_violations == 0, r.descent_violations, 0.0);
            out.record("inner_gradient_progress", r.k, r.decf_violations == 0, r.decf_violations, 0.0);
            out.record("inner_accuracy", r.k, r.s_norm <= r.delta_req, r.s_norm, r.delta_req);
        }
    }

    if (is_monotone_method(method)) {
        for (std::size_t i = 1; i < trace.records.size(); ++i) {
            const auto& prev = trace.records[i - 1];
            const auto& r = trace.records[i];
            const double allowed = prev.F + tol * std::max(1.0, std::abs(prev.F));
            out.record("monotone", r.k, r.F <= allowed, r.F, allowed);
        }
    }

    ValidationReport report;
    report.violations = out.violations;
    report.checks = out.checks;
    report.details = Json{{"method", method},
                          {"records", trace.records.size()},
                          {"checks", out.checks},
                          {"violations", out.violations},
                          {"pass", out.violations == 0},
                          {"summary", out.summary()},
                          {"certificate", certificate},
                          {"failures", out.failures()}};
    return report;
}

}  // namespace cpm
