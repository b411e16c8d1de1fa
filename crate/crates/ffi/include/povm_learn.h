#ifndef POVM_LEARN_H
#define POVM_LEARN_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PovmStatus {
  POVM_STATUS_OK = 0,
  POVM_STATUS_NULL_POINTER = 1,
  POVM_STATUS_INVALID_ARGUMENT = 2,
  POVM_STATUS_CONTRACT = 3,
  POVM_STATUS_DEGENERATE = 4,
  POVM_STATUS_WEAK_SIGNAL = 5,
  POVM_STATUS_INVALID_PRIORS = 6,
  POVM_STATUS_COS_THETA_OUT_OF_RANGE = 7,
  POVM_STATUS_CONFIG = 8,
  POVM_STATUS_IO = 9,
  // The experiment has not been run yet.
  POVM_STATUS_NOT_RUN = 10,
  POVM_STATUS_PANIC = 11,
} PovmStatus;

typedef enum PovmPlaneKind {
  POVM_PLANE_KIND_XZ = 0,
  POVM_PLANE_KIND_CONST_Z = 1,
} PovmPlaneKind;

typedef enum PovmCase {
  POVM_CASE_A = 0,
  POVM_CASE_B = 1,
} PovmCase;

typedef enum PovmFormat {
  POVM_FORMAT_CSV = 0,
  POVM_FORMAT_JSON = 1,
} PovmFormat;

// Opaque experiment handle.
typedef struct PovmExperiment PovmExperiment;

typedef struct PovmBlochVec {
  double x;
  double y;
  double z;
} PovmBlochVec;

// Measurement plane; `kind` is a `PovmPlaneKind` and `n_z` is read only
// for `POVM_PLANE_KIND_CONST_Z`.
typedef struct PovmPlane {
  uint32_t kind;
  double n_z;
} PovmPlane;

typedef struct PovmHelstrom {
  struct PovmBlochVec p0_axis;
  double lambda;
  double success;
} PovmHelstrom;

// One trial row. Fields guarded by a `has_` flag are zero when the flag is false.
typedef struct PovmTrialRow {
  uint64_t trial;
  // -1 when the scenario has no case, 0 for A, 1 for B.
  int32_t case_tag;
  // `POVM_STATUS_OK` or the error that stopped the trial.
  int32_t status;
  double eta0;
  double theta_true;
  double alpha_true;
  double beta_true;
  bool has_axis;
  struct PovmBlochVec axis;
  double alpha_hat;
  bool has_success_emp;
  double success_emp;
  bool has_success_analytic;
  double success_analytic;
  bool has_success_oracle;
  double success_oracle;
  bool has_z_score;
  double z_score;
  uint64_t shots_learn;
  uint64_t shots_holdout;
} PovmTrialRow;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *povm_version(void);

// Copies the calling thread's last error message into `buf` (truncated,
// always NUL-terminated when `len > 0`). Returns the full message length
// excluding the terminator; 0 when there is no error recorded.
//
// # Safety
// `buf` must be null or valid for `len` bytes of writes.
size_t povm_last_error(char *buf, size_t len);

// Born probability of the `+1` outcome of axis `s` on state `n`.
//
// # Safety
// `out` must be valid for writes.
enum PovmStatus povm_prob_plus(struct PovmBlochVec s, struct PovmBlochVec n, double *out);

// In-plane unit vector at +90 degrees from `n`.
//
// # Safety
// `out` must be valid for writes.
enum PovmStatus povm_perp_in_plane(struct PovmBlochVec n,
                                   struct PovmPlane plane,
                                   struct PovmBlochVec *out);

// Helstrom measurement for two equiprobable states with Bloch vectors `m0`, `m1`.
//
// # Safety
// `out` must be valid for writes.
enum PovmStatus povm_helstrom(struct PovmBlochVec m0,
                              struct PovmBlochVec m1,
                              struct PovmHelstrom *out);

// `cos(theta)` between the two states from the ensemble vector length.
//
// # Safety
// `out` must be valid for writes.
enum PovmStatus povm_cos_theta(double n_norm, double eta0, double *out);

// `cos(theta)` between the in-plane parts for a constant-z plane.
//
// # Safety
// `out` must be valid for writes.
enum PovmStatus povm_cos_theta_z(double r_norm, double n_z, double eta0, double *out);

// Success probability of the equal-count measurement, averaged over cases.
//
// # Safety
// `out` must be valid for writes.
enum PovmStatus povm_success_prob(double eta0, double theta, double n_norm, double *out);

// Pure states of one case (a `PovmCase`) reproducing the x-z ensemble vector `n`.
//
// # Safety
// `n0` and `n1` must be valid for writes.
enum PovmStatus povm_decompose(struct PovmBlochVec n,
                               double theta,
                               double eta0,
                               uint32_t case_,
                               struct PovmBlochVec *n0,
                               struct PovmBlochVec *n1);

// Bloch vectors of the two case-averaged mixtures.
//
// # Safety
// `m0` and `m1` must be valid for writes.
enum PovmStatus povm_mixture_targets(struct PovmBlochVec n,
                                     double theta,
                                     double eta0,
                                     struct PovmBlochVec *m0,
                                     struct PovmBlochVec *m1);

// Recovers `alpha` in `[0, 2 pi)` from the two tuning differences.
//
// # Safety
// `out` must be valid for writes.
enum PovmStatus povm_solve_alpha(double delta0,
                                 double delta1,
                                 double phi0,
                                 double weak_threshold,
                                 double *out);

// Creates an experiment from `key = value` text (the config-file format).
// With `allow_lists` false, comma lists are rejected.
//
// # Safety
// `config` must be a NUL-terminated string; `out` must be valid for writes.
enum PovmStatus povm_experiment_new(const char *config,
                                    bool allow_lists,
                                    struct PovmExperiment **out);

// Runs all trials, replacing any earlier results.
//
// # Safety
// `exp` must be a live handle.
enum PovmStatus povm_experiment_run(struct PovmExperiment *exp);

// # Safety
// `exp` must be a live handle; `out` must be valid for writes.
enum PovmStatus povm_experiment_row_count(struct PovmExperiment *exp, size_t *out);

// # Safety
// `exp` must be a live handle; `out` must be valid for writes.
enum PovmStatus povm_experiment_get_row(struct PovmExperiment *exp,
                                        size_t index,
                                        struct PovmTrialRow *out);

// Writes the results to `path` in `format`, a `PovmFormat`.
//
// # Safety
// `exp` must be a live handle; `path` a NUL-terminated string.
enum PovmStatus povm_experiment_write(struct PovmExperiment *exp,
                                      const char *path,
                                      uint32_t format);

// Releases a handle; null is ignored.
//
// # Safety
// `exp` must be null or a handle not yet freed.
void povm_experiment_free(struct PovmExperiment *exp);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* POVM_LEARN_H */
