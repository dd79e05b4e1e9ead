#include "cpm/trace.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace cpm {

const std::vector<std::string> kTraceColumns = {
    "k",        "A_k",      "gamma_k",  "a_k",    "F",         "residual",  "delta_req",
    "s_norm",   "t_k",      "oracle_f", "oracle_g", "oracle_h", "matvec",    "breg_step",
    "breg_opt", "t_bound",  "descent_viol", "decf_viol"};

int RunTrace::inner_iterations_total() const
{
    int total = 0;
    for (const auto& r : records) {
        total += r.inner_iterations;
    }
    return total;
}

namespace {

std::string fmt(double v)
{
    if (std::isnan(v)) {
        return "nan";
    }
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_double(const std::string& s)
{
    if (s == "nan") {
        return std::numeric_limits<double>::quiet_NaN();
    }
    if (s == "inf") {
        return std::numeric_limits<double>::infinity();
    }
    if (s == "-inf") {
        return -std::numeric_limits<double>::infinity();
    }
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw ParseError("malformed number '" + s + "'");
    }
    if (used != s.size()) {
        throw ParseError("malformed number '" + s + "'");
    }
    return v;
}

std::uint64_t parse_count(const std::string& s)
{
    const double v = parse_double(s);
    if (!(v >= 0.0) || v != std::floor(v)) {
        throw ParseError("malformed counter '" + s + "'");
    }
    return static_cast<std::uint64_t>(v);
}

std::vector<std::string> split(const std::string& line)
{
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        out.push_back(cell);
    }
    if (!line.empty() && line.back() == ',') {
        out.emplace_back();
    }
    return out;
}

}  // namespace

void write_trace_csv(const RunTrace& trace, std::ostream& out)
{
    Json header = trace.header;
    header["converged"] = trace.converged;
    header["status"] = trace.status;
    out << "# " << header.dump() << '\n';
    for (std::size_t i = 0; i < kTraceColumns.size(); ++i) {
        out << (i ? "," : "") << kTraceColumns[i];
    }
    out << '\n';
    for (const auto& r : trace.records) {
        out << r.k << ',' << fmt(r.A) << ',' << fmt(r.gamma) << ',' << fmt(r.a) << ',' << fmt(r.F) << ','
            << fmt(r.residual) << ',' << fmt(r.delta_req) << ',' << fmt(r.s_norm) << ',' << r.inner_iterations << ','
            << r.oracle.value << ',' << r.oracle.gradient << ',' << r.oracle.hessian << ',' << r.oracle.matvec << ','
            << fmt(r.breg_step) << ',' << fmt(r.breg_opt) << ',' << fmt(r.inner_bound) << ','
            << r.descent_violations << ',' << r.decf_violations << '\n';
    }
}

void write_trace_csv(const RunTrace& trace, const std::string& path)
{
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("unable to open '" + path + "' for writing");
    }
    write_trace_csv(trace, out);
    if (!out) {
        throw std::runtime_error("failed writing '" + path + "'");
    }
}

RunTrace read_trace_csv(std::istream& in)
{
    RunTrace trace;
    std::string line;
    if (!std::getline(in, line) || line.rfind("# ", 0) != 0) {
        throw ParseError("trace must start with a '# {json}' header line");
    }
    try {
        trace.header = Json::parse(line.substr(2));
    } catch (const Json::exception& e) {
        throw ParseError(std::string("malformed trace header: ") + e.what());
    }
    trace.converged = trace.header.value("converged", false);
    trace.status = trace.header.value("status", "");

    if (!std::getline(in, line)) {
        throw ParseError("trace is missing the column header");
    }
    if (split(line) != kTraceColumns) {
        throw ParseError("unexpected trace columns: " + line);
    }
    int lineno = 2;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) {
            continue;
        }
        const auto cells = split(line);
        if (cells.size() != kTraceColumns.size()) {
            throw ParseError("line " + std::to_string(lineno) + ": expected " + std::to_string(kTraceColumns.size()) +
                             " fields, got " + std::to_string(cells.size()));
        }
        TraceRecord r;
        try {
            r.k = static_cast<int>(parse_count(cells[0]));
            r.A = parse_double(cells[1]);
            r.gamma = parse_double(cells[2]);
            r.a = parse_double(cells[3]);
            r.F = parse_double(cells[4]);
            r.residual = parse_double(cells[5]);
            r.delta_req = parse_double(cells[6]);
            r.s_norm = parse_double(cells[7]);
            r.inner_iterations = static_cast<int>(parse_count(cells[8]));
            r.oracle.value = parse_count(cells[9]);
            r.oracle.gradient = parse_count(cells[10]);
            r.oracle.hessian = parse_count(cells[11]);
            r.oracle.matvec = parse_count(cells[12]);
            r.breg_step = parse_double(cells[13]);
            r.breg_opt = parse_double(cells[14]);
            r.inner_bound = parse_double(cells[15]);
            r.descent_violations = static_cast<int>(parse_count(cells[16]));
            r.decf_violations = static_cast<int>(parse_count(cells[17]));
        } catch (const ParseError& e) {
            throw ParseError("line " + std::to_string(lineno) + ": " + e.what());
        }
        trace.records.push_back(r);
    }
    return trace;
}

RunTrace read_trace_csv(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ParseError("unable to open trace '" + path + "'");
    }
    return read_trace_csv(in);
}

Json trace_summary(const RunTrace& trace)
{
    const OracleCounters o = trace.oracle_totals();
    Json j{{"method", trace.header.value("method", "")},
           {"iterations", trace.iterations()},
           {"inner_iterations", trace.inner_iterations_total()},
           {"oracle", {{"value", o.value}, {"gradient", o.gradient}, {"hessian", o.hessian}, {"matvec", o.matvec}}},
           {"oracle_calls", o.total()},
           {"converged", trace.converged},
           {"status", trace.status}};
    if (!trace.records.empty()) {
        const auto& last = trace.records.back();
        j["final_F"] = last.F;
        if (!std::isnan(last.residual)) {
            j["final_residual"] = last.residual;
        }
    }
    return j;
}

}  // namespace cpm
