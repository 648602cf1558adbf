#ifndef EMERGENCE_EMERGENCE_H
#define EMERGENCE_EMERGENCE_H

/* C interface to the emergence diagnostics library. Every call returns an
 * emc_status; on failure emc_last_error() describes the most recent error
 * raised on the calling thread. Handles are opaque and owned by the caller. */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define EMC_API __declspec(dllexport)
#else
#define EMC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum emc_status {
  EMC_OK = 0,
  EMC_NON_SQUARE = 1,
  EMC_NEGATIVE_ENTRY = 2,
  EMC_ROW_SUM_OUT_OF_TOLERANCE = 3,
  EMC_DIMENSION_MISMATCH = 4,
  EMC_NOT_IRREDUCIBLE = 5,
  EMC_NOT_CONVERGED = 6,
  EMC_INVALID_DISTRIBUTION = 7,
  EMC_INVALID_LENS = 8,
  EMC_INVALID_PROTOTYPE = 9,
  EMC_TAU_ZERO = 10,
  EMC_NOT_A_REFINEMENT = 11,
  EMC_EXPLOSION_CAP = 12,
  EMC_SHAPE_MISMATCH = 13,
  EMC_NO_COMMON_STATIONARY = 14,
  EMC_INVALID_PROTOCOL = 15,
  EMC_REV_VIOLATION = 16,
  EMC_EDGE_MISSING = 17,
  EMC_ROW_STARVED = 18,
  EMC_NOT_REVERSIBLE = 19,
  EMC_BUDGET_EXCEEDED = 20,
  EMC_BAD_WINDOW = 21,
  EMC_INVALID_SCHEDULE = 22,
  EMC_INVALID_ARGUMENT = 23,
  EMC_PARSE_ERROR = 24,
  EMC_SCHEMA_ERROR = 25,
  EMC_INTERNAL = 26
} emc_status;

typedef struct emc_kernel emc_kernel;
typedef struct emc_lens emc_lens;

EMC_API const char* emc_version(void);
/* Message of the last failed call on this thread; "" if none. */
EMC_API const char* emc_last_error(void);
EMC_API const char* emc_status_name(emc_status status);

/* Validates an n x n row-major stochastic matrix with default tolerances. */
EMC_API emc_status emc_kernel_create(const double* entries, size_t n, emc_kernel** out);
EMC_API void emc_kernel_free(emc_kernel* kernel);
EMC_API size_t emc_kernel_dim(const emc_kernel* kernel);
/* Writes the stationary distribution of an irreducible kernel into pi[0..n). */
EMC_API emc_status emc_kernel_stationary(const emc_kernel* kernel, double* pi);

/* Block index per state; blocks are labelled "0".."k-1" and must all be used. */
EMC_API emc_status emc_lens_create(const size_t* assignment, size_t n, emc_lens** out);
EMC_API void emc_lens_free(emc_lens* lens);
EMC_API size_t emc_lens_block_count(const emc_lens* lens);

/* Path reversal asymmetry over horizon T from rho (length n). An infinite
 * result sets *infinite = 1 and *value = +inf. */
EMC_API emc_status emc_sigma(const emc_kernel* kernel, const double* rho, size_t horizon,
                             double* value, int* infinite);

/* Fundamental-cycle affinities. Writes up to `capacity` values and the cycle
 * rank into *count; call with capacity 0 to query the size. */
EMC_API emc_status emc_affinities(const emc_kernel* kernel, double* out, size_t capacity,
                                  size_t* count);

/* Idempotence defect and retention error with uniform prototypes. */
EMC_API emc_status emc_defect(const emc_kernel* kernel, const emc_lens* lens, size_t tau,
                              double* defect, double* retention);

/* Probability that a uniform predicate is definable under the lens. The
 * exact value 2^-(N-K) is returned as a string in *dyadic (free with
 * emc_string_free). */
EMC_API emc_status emc_forcing(const emc_lens* lens, double* probability, char** dyadic);

/* Runs a report subcommand on a JSON request and returns the rendered
 * report in *out (free with emc_string_free) and the process exit code. */
EMC_API emc_status emc_report_run(const char* command, const char* request_json, char** out,
                                  int* exit_code);

/* JSON schema for a document name such as "kernel" or "report.sigma"; NULL
 * when unknown. The string is static. */
EMC_API const char* emc_schema(const char* name);
/* Comma-separated list of schema names. */
EMC_API const char* emc_schema_names(void);

EMC_API void emc_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* EMERGENCE_EMERGENCE_H */
