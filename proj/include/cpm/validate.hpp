#pragma once

#include "cpm/trace.hpp"

namespace cpm {

struct ValidationOptions {
    double slack = 1e-9;            ///< relative slack of the certificate inequality
    double identity_tol = 1e-12;    ///< relative tolerance of the exact recurrences
    double inner_factor = 0.0;      ///< allowed t_k / bound ratio; 0 reads it from the header (default 4)
};

struct ValidationReport {
    int violations = 0;
    int checks = 0;
    Json details;  ///< per-check summaries, certificate margins, first failures

    bool ok() const { return violations == 0; }
};

/// Checks a trace against the guarantees that apply to its method:
/// the certificate inequality of the contracting proximal method at every k,
/// gamma_k = gamma0 + sigma A_k, A_k = A_{k-1} + a_k, the schedule
/// envelopes, inner iteration counts against their bound, the
/// per-step checks recorded by the inner loop, and monotonicity for the
/// descent baselines.
ValidationReport validate_trace(const RunTrace& trace, const ValidationOptions& options = {});

}  // namespace cpm
