#ifndef FTC_FTC_H
#define FTC_FTC_H

#include <stddef.h>

#if defined(_WIN32)
#if defined(FTC_BUILDING)
#define FTC_API __declspec(dllexport)
#else
#define FTC_API __declspec(dllimport)
#endif
#else
#define FTC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes. Values 4..7 are non-error outcomes of ftc_run. */
typedef enum ftc_status {
  FTC_OK = 0,
  FTC_ERR_CONFIG = 2,
  FTC_ERR_DIVERGENCE = 3,
  FTC_AUDIT_FAIL = 4,
  FTC_LAMBDA_EMPTY = 5,
  FTC_ATTAIN_REFUSED = 6,
  FTC_ATTAIN_FAILED = 7,
  FTC_ERR_INPUT = 10,
  FTC_ERR_DOMAIN = 11,
  FTC_ERR_LOOKUP = 12,
  FTC_ERR_UNSUPPORTED = 13,
  FTC_ERR_INTERNAL = 20
} ftc_status;

typedef struct ftc_scenario ftc_scenario;
typedef struct ftc_result ftc_result;

FTC_API const char* ftc_version(void);

/* Message of the last failing call on this thread; empty after success. */
FTC_API const char* ftc_last_error(void);

/* params_json may be NULL, otherwise an object such as {"omega": 6.28, "j": 3}. */
FTC_API ftc_status ftc_scenario_open(const char* id, const char* params_json, ftc_scenario** out);
FTC_API void ftc_scenario_close(ftc_scenario* sc);

FTC_API ftc_status ftc_scenario_dims(const ftc_scenario* sc, int* n, int* r);

/* f(t, x, u) into out[n]. */
FTC_API ftc_status ftc_eval_dynamics(const ftc_scenario* sc, double t, const double* x,
                                     const double* u, double* out);

/* Row-major n x n state Jacobian into out. */
FTC_API ftc_status ftc_eval_jacobian(const ftc_scenario* sc, double t, const double* x,
                                     const double* u, double* out);

/* M(t, x, psi) and a maximizer (witness[r], may be NULL). */
FTC_API ftc_status ftc_max_function(const ftc_scenario* sc, double t, const double* x,
                                    const double* psi, double* value, double* witness);

/* Runs a command (simulate, audit, lambda, chatter, attain, value) on a JSON
   request. On FTC_OK and on outcomes 4..7 *out holds the report; the caller
   releases it with ftc_result_free. */
FTC_API ftc_status ftc_run(const char* command, const char* request_json, ftc_result** out);

FTC_API const char* ftc_result_json(const ftc_result* res);
FTC_API size_t ftc_result_artifact_count(const ftc_result* res);
FTC_API const char* ftc_result_artifact_name(const ftc_result* res, size_t i);
FTC_API const char* ftc_result_artifact_data(const ftc_result* res, size_t i, size_t* size);
FTC_API void ftc_result_free(ftc_result* res);

#ifdef __cplusplus
}
#endif

#endif
