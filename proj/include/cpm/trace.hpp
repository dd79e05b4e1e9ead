#pragma once

#include "cpm/objectives.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace cpm {

/// One row of a run trace. Oracle counters are cumulative from the start
/// of the run.
struct TraceRecord {
    int k = 0;
    double A = 0.0;
    double gamma = 0.0;
    double a = 0.0;
    double F = 0.0;
    double residual = 0.0;  ///< F(x_k) - F*, NaN when F* is unknown
    double delta_req = 0.0;
    double s_norm = 0.0;  ///< achieved dual norm of the certified subgradient
    int inner_iterations = 0;
    OracleCounters oracle;
    double breg_step = 0.0;  ///< beta_d(v_{k-1}; v_k)
    double breg_opt = 0.0;   ///< beta_d(v_k; x*), NaN when x* is unknown
    double inner_bound = 0.0;
    int descent_violations = 0;
    int decf_violations = 0;
};

/// Append-only record of a run plus a JSON header describing the instance,
/// method and parameters.
struct RunTrace {
    Json header;
    std::vector<TraceRecord> records;
    bool converged = false;
    std::string status;

    void append(const TraceRecord& r) { records.push_back(r); }
    int iterations() const { return records.empty() ? 0 : records.back().k; }
    OracleCounters oracle_totals() const { return records.empty() ? OracleCounters{} : records.back().oracle; }
    int inner_iterations_total() const;
};

extern const std::vector<std::string> kTraceColumns;

/// Writes "# <header json>" followed by the CSV header row and the records.
void write_trace_csv(const RunTrace& trace, std::ostream& out);
void write_trace_csv(const RunTrace& trace, const std::string& path);

/// Parses the format produced by write_trace_csv. Throws ParseError on
/// malformed input.
RunTrace read_trace_csv(std::istream& in);
RunTrace read_trace_csv(const std::string& path);

class ParseError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Compact JSON summary: method, iterations, oracle totals, final residual.
Json trace_summary(const RunTrace& trace);

}  // namespace cpm
