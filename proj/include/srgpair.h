/* C interface to the operator-pair graph library. All functions return a
 * status code; on failure srgpair_last_error() holds a thread-local message.
 * Strings returned through char** are heap copies released with
 * srgpair_string_free(); handles are released with their matching _free().
 */
#ifndef SRGPAIR_H
#define SRGPAIR_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum srgpair_status {
  SRGPAIR_OK = 0,
  SRGPAIR_ERROR_INVALID_ARGUMENT = 1,
  SRGPAIR_ERROR_PARSE = 2,
  SRGPAIR_ERROR_DIMENSION_MISMATCH = 3,
  SRGPAIR_ERROR_EMPTY_DOMAIN = 4,
  SRGPAIR_ERROR_UNSUPPORTED = 5,
  SRGPAIR_ERROR_SOLVER_FAILURE = 6,
  SRGPAIR_ERROR_IO = 7,
  SRGPAIR_ERROR_INTERNAL = 8
} srgpair_status;

typedef struct srgpair_op srgpair_op;
typedef struct srgpair_cloud srgpair_cloud;
typedef struct srgpair_region srgpair_region;

const char* srgpair_version(void);
const char* srgpair_last_error(void);
void srgpair_string_free(char* text);

/* ------------------------------------------------------------------ ops -- */

srgpair_status srgpair_op_from_json(const char* json, srgpair_op** out);
/* Parses {"schema":1, "a":..., "b":...}; both outputs must be freed. */
srgpair_status srgpair_pair_from_json(const char* json, srgpair_op** a_out, srgpair_op** b_out);
/* Returns -1 when op is null. */
int64_t srgpair_op_dim(const srgpair_op* op);
void srgpair_op_free(srgpair_op* op);

/* ------------------------------------------------------------- sampling -- */

typedef struct srgpair_sample_options {
  int32_t n_inputs;       /* <= 0 picks the default (200) */
  uint64_t seed;
  double eps_den;         /* <= 0 picks the default (1e-9) */
  uint64_t max_combos;    /* 0 picks the default */
  int32_t max_selections; /* <= 0 picks the default */
  int32_t threads;        /* 0 consults SRG_THREADS, then the hardware */
} srgpair_sample_options;

typedef struct srgpair_cloud_stats {
  uint64_t input_pairs;
  uint64_t combos;
  uint64_t finite;
  uint64_t infinite;
  uint64_t degenerate;
  int32_t has_infinity;
  int32_t truncated;
} srgpair_cloud_stats;

srgpair_status srgpair_sample_pair(const srgpair_op* a, const srgpair_op* b,
                                   const srgpair_sample_options* options, srgpair_cloud** out);
srgpair_status srgpair_cloud_get_stats(const srgpair_cloud* cloud, srgpair_cloud_stats* out);
srgpair_status srgpair_cloud_to_csv(const srgpair_cloud* cloud, char** out);
/* region may be NULL; when given its outline is drawn behind the points. */
srgpair_status srgpair_cloud_to_svg(const srgpair_cloud* cloud, const srgpair_region* region, char** out);
void srgpair_cloud_free(srgpair_cloud* cloud);

/* -------------------------------------------------------------- regions -- */

typedef struct srgpair_containment {
  int32_t pass;
  int32_t infinity_ok;
  double worst_margin;
} srgpair_containment;

srgpair_status srgpair_region_from_json(const char* json, srgpair_region** out);
srgpair_status srgpair_region_describe(const srgpair_region* region, char** out);
srgpair_status srgpair_region_contains_cloud(const srgpair_region* region, const srgpair_cloud* cloud,
                                             double tol, srgpair_containment* out);
void srgpair_region_free(srgpair_region* region);

/* --------------------------------------------------------- certificates -- */

typedef struct srgpair_semimonotone_report {
  int32_t direct_pass;
  int32_t containment_pass;
  int32_t agree;
  int32_t saw_infinity;
  int32_t infinity_allowed;
  double direct_margin;
  double containment_margin;
  uint64_t combos;
  uint64_t finite_points;
} srgpair_semimonotone_report;

srgpair_status srgpair_check_semimonotone(const srgpair_op* a, const srgpair_op* b, double mu, double rho,
                                          const srgpair_sample_options* options, double tol,
                                          srgpair_semimonotone_report* out);

/* ------------------------------------------------------------- circuits -- */

/* Runs the circuit described by the JSON config. sweep_csv_out receives the
 * solution table. When trace_sample >= 0, trace_csv_out (if non-NULL)
 * receives the iteration trace of that sample. report_text_out is a short
 * human-readable summary, report_json_out a one-line machine summary; any
 * output pointer may be NULL to skip it. */
srgpair_status srgpair_circuit_solve_json(const char* config_json, int64_t trace_sample,
                                          char** sweep_csv_out, char** trace_csv_out,
                                          char** report_text_out, char** report_json_out);

/* ------------------------------------------------------------- calculus -- */

/* Runs the cloud-transformation rule suite. all_passed_out (may be NULL)
 * receives 1 when every rule held. */
srgpair_status srgpair_calculus_suite(uint64_t seed, int32_t n_inputs, double tol, char** report_text_out,
                                      char** report_json_out, int32_t* all_passed_out);

#ifdef __cplusplus
}
#endif

#endif /* SRGPAIR_H */
