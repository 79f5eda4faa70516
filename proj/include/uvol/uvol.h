/* C interface to the union volume estimators and the benchmark harness. */
#ifndef UVOL_UVOL_H
#define UVOL_UVOL_H

#include <stddef.h>
#include <stdint.h>

#if defined(UVOL_BUILDING)
#define UVOL_API __attribute__((visibility("default")))
#else
#define UVOL_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum uvol_status {
    UVOL_OK = 0,
    UVOL_E_PARAMETER = 1,
    UVOL_E_USAGE = 2,
    UVOL_E_UNSUPPORTED = 3,
    UVOL_E_DEGENERATE = 4,
    UVOL_E_PARSE = 5,
    UVOL_E_CONFIG = 6,
    UVOL_E_INTERNAL = 7,
    UVOL_E_UNBOUNDED = 8,
    UVOL_E_IO = 9
} uvol_status;

typedef struct uvol_object uvol_object;
typedef struct uvol_estimator uvol_estimator;

/* Message for the last failing call on this thread; empty after success. */
UVOL_API const char* uvol_last_error(void);
UVOL_API const char* uvol_status_name(uvol_status s);
UVOL_API const char* uvol_version(void);

/* Objects. Coordinates are dense arrays of length d (vertices: (d+1)*d). */
UVOL_API uvol_status uvol_object_from_json(const char* json, uvol_object** out);
UVOL_API uvol_status uvol_object_box(int d, const double* lo, const double* hi, uvol_object** out);
UVOL_API uvol_status uvol_object_simplex(int d, const double* vertices, uvol_object** out);
UVOL_API uvol_status uvol_object_ball(int d, const double* center, double radius, uvol_object** out);
UVOL_API void uvol_object_free(uvol_object* x);
UVOL_API uvol_status uvol_object_size(const uvol_object* x, double* out);
UVOL_API uvol_status uvol_object_contains(const uvol_object* x, const double* point, int* out);
UVOL_API uvol_status uvol_object_sample(const uvol_object* x, uint64_t seed, double* point_out);

typedef enum uvol_estimator_kind {
    UVOL_DYNAMIC = 0,
    UVOL_SUFFIX = 1,
    UVOL_CONVEX = 2
} uvol_estimator_kind;

typedef struct uvol_estimator_config {
    double n;
    double eps;
    uint64_t seed;
    /* Non-zero lifts the admissible volume range (dynamic and suffix). */
    int range_wrap;
    /* Convex stream only. */
    int d;
    double R;
    double r;
    int copies;
    double lambda; /* 0 selects the default grid scale */
} uvol_estimator_config;

UVOL_API void uvol_estimator_config_default(uvol_estimator_config* cfg);
UVOL_API uvol_status uvol_estimator_create(uvol_estimator_kind kind, const uvol_estimator_config* cfg,
                                           uvol_estimator** out);
UVOL_API void uvol_estimator_free(uvol_estimator* e);
UVOL_API uvol_status uvol_estimator_insert(uvol_estimator* e, const uvol_object* x);
/* Dynamic and convex only; x must be the handle passed to insert. */
UVOL_API uvol_status uvol_estimator_delete(uvol_estimator* e, const uvol_object* x);
UVOL_API uvol_status uvol_estimator_estimate(uvol_estimator* e, double* out);
/* Suffix only: union of the objects inserted at times s..now. */
UVOL_API uvol_status uvol_estimator_estimate_suffix(uvol_estimator* e, int64_t s, double* out);

/* Static constant-factor estimate of a union. */
UVOL_API uvol_status uvol_klm_estimate(const uvol_object* const* objects, size_t count, double n, uint64_t seed,
                                       double* out);

/* Harness. Specs are JSON objects; outputs land in out_dir. Returned strings are freed with uvol_string_free.
   A non-null seed pointer replaces the spec seed; the UVOL_SEED environment variable overrides both. */
UVOL_API uvol_status uvol_generate(const char* spec_json, const uint64_t* seed, const char* out_dir);
UVOL_API uvol_status uvol_run(const char* spec_json, const uint64_t* seed, const char* out_dir, char** summary_json);
UVOL_API uvol_status uvol_sweep(const char* spec_json, const uint64_t* seed, uint64_t trials, unsigned threads,
                                const char* out_dir, char** summary_json);
UVOL_API uvol_status uvol_verify(const char* suite, uint64_t seed, char** report_json, int* all_pass);
UVOL_API void uvol_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif
