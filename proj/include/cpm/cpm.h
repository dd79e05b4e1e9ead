/* C interface to the contracting proximal methods library.
 *
 * Objects are opaque handles owned by the caller and released with the
 * matching destroy function. Every function returns a cpm_status; on
 * failure cpm_last_error() describes the problem for the calling thread.
 * Strings returned through char** are allocated by the library and must be
 * released with cpm_string_free. */
#ifndef CPM_CPM_H
#define CPM_CPM_H

#include <stddef.h>

#if defined(_WIN32)
#  if defined(CPM_BUILDING_LIBRARY)
#    define CPM_API __declspec(dllexport)
#  else
#    define CPM_API __declspec(dllimport)
#  endif
#else
#  define CPM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cpm_status {
    CPM_OK = 0,
    CPM_ERR_INVALID_ARGUMENT = 1,
    CPM_ERR_SOLVER = 2,
    CPM_ERR_PARSE = 3,
    CPM_ERR_IO = 4,
    CPM_ERR_INTERNAL = 5
} cpm_status;

typedef struct cpm_problem cpm_problem;
typedef struct cpm_trace cpm_trace;

CPM_API const char* cpm_version(void);
/* Message of the last failed call on this thread; empty when none. */
CPM_API const char* cpm_last_error(void);
CPM_API const char* cpm_status_name(cpm_status status);
CPM_API void cpm_string_free(char* s);

/* Problem from a JSON spec with keys kind ("quadratic" | "lse"), n, q or
 * alpha, mu, seed, sigma, sigma_p, L1, L2, b_scaling. The reference optimum
 * is computed on creation. */
CPM_API cpm_status cpm_problem_from_json(const char* spec_json, cpm_problem** out);
CPM_API cpm_status cpm_problem_quadratic(int n, double q, unsigned long long seed, cpm_problem** out);
CPM_API cpm_status cpm_problem_lse(int n, double mu, unsigned long long seed, cpm_problem** out);
CPM_API cpm_status cpm_problem_dim(const cpm_problem* problem, int* n);
/* Reconstructible descriptor including the stored optimum value. */
CPM_API cpm_status cpm_problem_descriptor(const cpm_problem* problem, char** json);
CPM_API cpm_status cpm_problem_optimum(const cpm_problem* problem, double* f_star);
/* Uncounted F at x (length n). */
CPM_API cpm_status cpm_problem_value(const cpm_problem* problem, const double* x, size_t n, double* value);
CPM_API void cpm_problem_destroy(cpm_problem* problem);

CPM_API int cpm_is_known_method(const char* method);
/* Runs one method. options_json may be NULL; keys eps, cap_outer,
 * cap_inner, delta_schedule, gamma0, reg_m. Solver failures during the run
 * are reported by the trace (cpm_trace_converged, cpm_trace_status), not by
 * the return code. */
CPM_API cpm_status cpm_solve(const cpm_problem* problem, const char* method, const char* options_json,
                             cpm_trace** out);

CPM_API cpm_status cpm_trace_write_csv(const cpm_trace* trace, const char* path);
CPM_API cpm_status cpm_trace_read_csv(const char* path, cpm_trace** out);
CPM_API cpm_status cpm_trace_to_csv(const cpm_trace* trace, char** csv);
CPM_API cpm_status cpm_trace_summary(const cpm_trace* trace, char** json);
/* Run header: method, instance descriptor and parameters. */
CPM_API cpm_status cpm_trace_header(const cpm_trace* trace, char** json);
CPM_API cpm_status cpm_trace_converged(const cpm_trace* trace, int* converged);
CPM_API cpm_status cpm_trace_status(const cpm_trace* trace, char** status);
CPM_API cpm_status cpm_trace_iterations(const cpm_trace* trace, int* iterations);
CPM_API void cpm_trace_destroy(cpm_trace* trace);

/* Checks the run-time inequalities recorded in a trace. options_json may be
 * NULL; keys slack, identity_tol, inner_factor. */
CPM_API cpm_status cpm_validate(const cpm_trace* trace, const char* options_json, int* violations,
                                char** report_json);

/* Cartesian sweep; spec keys suite, sizes, params, seeds, methods, eps,
 * cap_outer, cap_inner, delta_schedule, gamma0, reg_m. Either output may be
 * NULL. */
CPM_API cpm_status cpm_bench(const char* spec_json, char** report_json, char** table);

/* delta(p) and K(p) of the convex complexity bound at L/eps = beta_d = gamma0 = 1. */
CPM_API cpm_status cpm_curve_point(int p, double* delta, double* k);

#ifdef __cplusplus
}
#endif

#endif
