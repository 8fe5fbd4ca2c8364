#ifndef SCM_H
#define SCM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stddef.h>
#include <stdint.h>

// Result code of every fallible call.
typedef enum ScmStatus {
  SCM_STATUS_OK = 0,
  SCM_STATUS_NULL_POINTER = 1,
  SCM_STATUS_DIMENSION_MISMATCH = 2,
  SCM_STATUS_INVALID_ARGUMENT = 3,
  SCM_STATUS_INVALID_CONFIG = 4,
  SCM_STATUS_UNKNOWN_PRESET = 5,
  SCM_STATUS_IO = 6,
  SCM_STATUS_INDEX_OUT_OF_RANGE = 7,
  SCM_STATUS_PANIC = 8,
} ScmStatus;

// Opaque experiment configuration.
typedef struct ScmConfig ScmConfig;

// Opaque committee machine.
typedef struct ScmMachine ScmMachine;

// Opaque experiment result: the mean curve and every trial's curve.
typedef struct ScmResult ScmResult;

// One measurement on a learning curve.
typedef struct ScmErrorPoint {
  double t;
  double mse_learn;
  double mse_test;
} ScmErrorPoint;

// Library version as a static NUL-terminated string.
const char *scm_version(void);

// Message of the last failure on this thread, or NULL. The pointer stays
// valid until the next failing call on the same thread.
const char *scm_last_error_message(void);

// Frees a string returned by this library.
//
// # Safety
// `s` must be NULL or a pointer returned by [`scm_config_render`].
void scm_string_free(char *s);

// Hidden-unit activation `erf(x / sqrt(2))`.
double scm_activation(double x);

// Derivative of the activation.
double scm_activation_deriv(double x);

// Creates a machine with Gaussian weights of variance `1/n_inputs`.
//
// # Safety
// `out` must be a valid pointer to writable storage for one handle.
enum ScmStatus scm_machine_new_random(size_t n_inputs,
                                      size_t n_hidden,
                                      uint64_t seed,
                                      struct ScmMachine **out);

// Creates a machine from `n_hidden * n_inputs` row-major weights.
//
// # Safety
// `weights` must point to `n_hidden * n_inputs` readable doubles and
// `out` to writable storage for one handle.
enum ScmStatus scm_machine_from_weights(size_t n_inputs,
                                        size_t n_hidden,
                                        const double *weights,
                                        struct ScmMachine **out);

// # Safety
// `m` must be NULL or a handle that has not been freed.
void scm_machine_free(struct ScmMachine *m);

// Input dimension, or 0 for NULL.
//
// # Safety
// `m` must be NULL or a live handle.
size_t scm_machine_n_inputs(const struct ScmMachine *m);

// Hidden units, or 0 for NULL.
//
// # Safety
// `m` must be NULL or a live handle.
size_t scm_machine_n_hidden(const struct ScmMachine *m);

// Copies the row-major weights into `buf`, which must hold exactly
// `n_hidden * n_inputs` values.
//
// # Safety
// `buf` must point to `len` writable doubles.
enum ScmStatus scm_machine_weights(const struct ScmMachine *m, double *buf, size_t len);

// Network output for input `x` of length `len`.
//
// # Safety
// `x` must point to `len` readable doubles and `out` to one writable double.
enum ScmStatus scm_machine_forward(const struct ScmMachine *m,
                                   const double *x,
                                   size_t len,
                                   double *out);

// One plain SGD step towards `teacher_output`, in place.
//
// # Safety
// `m` must be a live handle and `x` must point to `len` readable doubles.
enum ScmStatus scm_sgd_step(struct ScmMachine *m,
                            double teacher_output,
                            const double *x,
                            size_t len,
                            double eta);

// One SGD step with weight decay `alpha`, in place.
//
// # Safety
// As [`scm_sgd_step`].
enum ScmStatus scm_l2_sgd_step(struct ScmMachine *m,
                               double teacher_output,
                               const double *x,
                               size_t len,
                               double eta,
                               double alpha);

// One dropout step, in place. `dropped` lists the `n_dropped` excluded
// units; `n_dropped` must equal `round(p * n_hidden)`.
//
// # Safety
// As [`scm_sgd_step`]; `dropped` must point to `n_dropped` readable values.
enum ScmStatus scm_dropout_step(struct ScmMachine *m,
                                const size_t *dropped,
                                size_t n_dropped,
                                double p,
                                double teacher_output,
                                const double *x,
                                size_t len,
                                double eta);

// Draws a dropout mask of `round(p * k_hidden)` units from `seed`. The
// sorted indices are written to `buf` (capacity `cap`) and their number
// to `out_len`.
//
// # Safety
// `buf` must point to `cap` writable values and `out_len` to one.
enum ScmStatus scm_draw_mask(size_t k_hidden,
                             double p,
                             uint64_t seed,
                             size_t *buf,
                             size_t cap,
                             size_t *out_len);

// Dropout inference: `scale * sum_k g(y_k)`.
//
// # Safety
// As [`scm_machine_forward`].
enum ScmStatus scm_dropout_predict(const struct ScmMachine *m,
                                   double scale,
                                   const double *x,
                                   size_t len,
                                   double *out);

// Parses a single-experiment config text.
//
// # Safety
// `text` must be a NUL-terminated string and `out` writable.
enum ScmStatus scm_config_parse(const char *text, struct ScmConfig **out);

// Number of arms in a named preset.
//
// # Safety
// `name` must be a NUL-terminated string and `out` writable.
enum ScmStatus scm_preset_len(const char *name, size_t *out);

// Config of arm `index` of a named preset.
//
// # Safety
// `name` must be a NUL-terminated string and `out` writable.
enum ScmStatus scm_preset_config(const char *name, size_t index, struct ScmConfig **out);

// # Safety
// `c` must be NULL or a handle that has not been freed.
void scm_config_free(struct ScmConfig *c);

// Overrides seed, trial count, duration and measurement interval.
// Negative `duration` or `measure_every` and zero `trials` keep the
// current value.
//
// # Safety
// `c` must be a live handle.
enum ScmStatus scm_config_override(struct ScmConfig *c,
                                   uint64_t seed,
                                   size_t trials,
                                   double duration,
                                   double measure_every);

// Canonical config text; free with [`scm_string_free`].
//
// # Safety
// `c` must be NULL or a live handle.
char *scm_config_render(const struct ScmConfig *c);

// Runs every trial of an experiment on `threads` workers.
//
// # Safety
// `c` must be a live handle and `out` writable.
enum ScmStatus scm_run_experiment(const struct ScmConfig *c,
                                  size_t threads,
                                  struct ScmResult **out);

// # Safety
// `r` must be NULL or a handle that has not been freed.
void scm_result_free(struct ScmResult *r);

// Number of trials, or 0 for NULL.
//
// # Safety
// `r` must be NULL or a live handle.
size_t scm_result_trials(const struct ScmResult *r);

// Number of points per curve, or 0 for NULL.
//
// # Safety
// `r` must be NULL or a live handle.
size_t scm_result_points(const struct ScmResult *r);

// Point `j` of trial `trial`, or of the mean curve when `trial < 0`.
//
// # Safety
// `r` must be a live handle and `out` writable.
enum ScmStatus scm_result_point(const struct ScmResult *r,
                                int64_t trial,
                                size_t j,
                                struct ScmErrorPoint *out);

// Writes the result as CSV (`t,mse_learn,mse_test,trial`).
//
// # Safety
// `r` must be a live handle and `path` a NUL-terminated string.
enum ScmStatus scm_result_write_csv(const struct ScmResult *r, const char *path);

#endif  /* SCM_H */
