#ifndef SUBELL_H
#define SUBELL_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SubellStatus {
  SUBELL_STATUS_OK = 0,
  SUBELL_STATUS_NULL_POINTER = 1,
  SUBELL_STATUS_INVALID_ARGUMENT = 2,
  SUBELL_STATUS_IO = 3,
  SUBELL_STATUS_PARSE = 4,
  SUBELL_STATUS_INVALID_PROBLEM = 5,
  SUBELL_STATUS_SOLVER = 6,
  SUBELL_STATUS_CERTIFICATE = 7,
  SUBELL_STATUS_TERMINATED = 8,
  SUBELL_STATUS_BUFFER_TOO_SMALL = 9,
  SUBELL_STATUS_PANIC = 10,
} SubellStatus;

typedef enum SubellTermination {
  SUBELL_TERMINATION_RUNNING = 0,
  SUBELL_TERMINATION_MAX_ITER = 1,
  SUBELL_TERMINATION_SMALL_SUPPORT = 2,
  SUBELL_TERMINATION_EXACT_SOLUTION = 3,
} SubellTermination;

typedef enum SubellVariant {
  SUBELL_VARIANT_SUBGRADIENT = 0,
  SUBELL_VARIANT_ELLIPSOID = 1,
  SUBELL_VARIANT_ELLIPSOID_CERT = 2,
  SUBELL_VARIANT_SUBGRAD_ELLIPSOID = 3,
} SubellVariant;

typedef struct SubellCertificate SubellCertificate;

typedef struct SubellProblem SubellProblem;

typedef struct SubellSolver SubellSolver;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. The pointer stays
// valid until the next failing call on the same thread.
const char *subell_last_error(void);

// # Safety
// `path` must be a nul-terminated string; `out` must be writable.
enum SubellStatus subell_problem_load(const char *path, struct SubellProblem **out);

// # Safety
// `json` must be a nul-terminated string; `out` must be writable.
enum SubellStatus subell_problem_from_json(const char *json, struct SubellProblem **out);

// # Safety
// `problem` must come from a problem constructor; `out` must be writable.
enum SubellStatus subell_problem_dim(const struct SubellProblem *problem, uintptr_t *out);

// # Safety
// `problem` must come from a problem constructor and not be used afterwards.
void subell_problem_free(struct SubellProblem *problem);

// Create a solver for `problem`. `horizon = 0` selects the time-varying
// schedule, otherwise `β_i = 1/√horizon`; `delta ≤ 0` disables early
// termination. The solver keeps its own copy of the problem.
//
// # Safety
// `problem` must be a live handle; `out` must be writable.
enum SubellStatus subell_solver_new(const struct SubellProblem *problem,
                                    enum SubellVariant variant,
                                    uintptr_t horizon,
                                    double delta,
                                    struct SubellSolver **out);

// Query the oracle at the current point and advance one iteration.
//
// # Safety
// `solver` must be a live handle; `out` must be writable or null.
enum SubellStatus subell_solver_step(struct SubellSolver *solver, enum SubellTermination *out);

// Advance up to `max_iter` iterations, stopping early on termination.
//
// # Safety
// `solver` must be a live handle; `out` must be writable or null.
enum SubellStatus subell_solver_run(struct SubellSolver *solver,
                                    uintptr_t max_iter,
                                    enum SubellTermination *out);

// # Safety
// `solver` must be a live handle; `out` must be writable.
enum SubellStatus subell_solver_iteration(const struct SubellSolver *solver, uintptr_t *out);

// Copy the current test point into `buf`, which holds `len` values.
//
// # Safety
// `solver` must be a live handle; `buf` must hold `len` doubles.
enum SubellStatus subell_solver_point(const struct SubellSolver *solver,
                                      double *buf,
                                      uintptr_t len);

// # Safety
// `solver` must be a live handle; `out` must be writable.
enum SubellStatus subell_solver_sliding_gap(const struct SubellSolver *solver, double *out);

// # Safety
// `solver` must be a live handle; `out` must be writable.
enum SubellStatus subell_solver_avrad(const struct SubellSolver *solver, double *out);

// # Safety
// `solver` must be a live handle and not be used afterwards.
void subell_solver_free(struct SubellSolver *solver);

// Build a certificate for the solver's current iterate.
//
// # Safety
// `solver` must be a live handle; `out` must be writable.
enum SubellStatus subell_certify(const struct SubellSolver *solver, struct SubellCertificate **out);

// Gap of the certificate over the initial ball.
//
// # Safety
// `cert` must be a live handle; `out` must be writable.
enum SubellStatus subell_certificate_gap(const struct SubellCertificate *cert, double *out);

// Residual of the certificate; fails when no productive step has weight.
//
// # Safety
// `cert` must be a live handle; `out` must be writable.
enum SubellStatus subell_certificate_residual(const struct SubellCertificate *cert, double *out);

// Number of weights in the certificate.
//
// # Safety
// `cert` must be a live handle; `out` must be writable.
enum SubellStatus subell_certificate_len(const struct SubellCertificate *cert, uintptr_t *out);

// # Safety
// `cert` must be a live handle; `buf` must hold `len` doubles.
enum SubellStatus subell_certificate_weights(const struct SubellCertificate *cert,
                                             double *buf,
                                             uintptr_t len);

// # Safety
// `cert` must be a live handle and not be used afterwards.
void subell_certificate_free(struct SubellCertificate *cert);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SUBELL_H */
