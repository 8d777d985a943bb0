#ifndef BEAM_ATTRACTOR_H
#define BEAM_ATTRACTOR_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum BeamStatus {
  BEAM_STATUS_OK = 0,
  BEAM_STATUS_NULL_POINTER = 1,
  BEAM_STATUS_INVALID_INPUT = 2,
  BEAM_STATUS_CONFIG = 3,
  BEAM_STATUS_DIMENSION_MISMATCH = 4,
  BEAM_STATUS_DIVERGENCE = 5,
  BEAM_STATUS_NO_CONVERGENCE = 6,
  BEAM_STATUS_SINGULAR_JACOBIAN = 7,
  BEAM_STATUS_IO = 8,
  BEAM_STATUS_OTHER = 9,
  BEAM_STATUS_PANIC = 10,
} BeamStatus;

/**
 * Model built from an experiment file.
 */
typedef struct BeamModel BeamModel;

/**
 * Sampled trajectory.
 */
typedef struct BeamRecord BeamRecord;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread (empty after a success).
 * The pointer stays valid until the next call on the same thread.
 */
const char *beam_last_error_message(void);

/**
 * Library version, static storage.
 */
const char *beam_version(void);

/**
 * Parse an experiment file (UTF-8, `key = value` lines) into a model.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` a valid pointer.
 */
enum BeamStatus beam_model_from_config(const char *text, struct BeamModel **out);

/**
 * # Safety
 * `model` must come from [`beam_model_from_config`] and not be used afterwards. Null is ignored.
 */
void beam_model_free(struct BeamModel *model);

/**
 * Number of Galerkin modes, 0 for a null model.
 *
 * # Safety
 * `model` must be null or a live handle.
 */
uintptr_t beam_model_mode_count(const struct BeamModel *model);

/**
 * Energy of the state `(y, v)`.
 *
 * # Safety
 * `y`, `v` must point to `modes` doubles; `out` to one.
 */
enum BeamStatus beam_model_energy(const struct BeamModel *model,
                                  const double *y,
                                  const double *v,
                                  uintptr_t modes,
                                  double *out);

/**
 * Modal accelerations `ÿ` at `(y, v)` into `out`.
 *
 * # Safety
 * `y`, `v`, `out` must point to `modes` doubles.
 */
enum BeamStatus beam_model_acceleration(const struct BeamModel *model,
                                        const double *y,
                                        const double *v,
                                        uintptr_t modes,
                                        double *out);

/**
 * Newton solve for a stationary displacement starting from `guess`.
 *
 * # Safety
 * `guess`, `out_y` must point to `modes` doubles; `out_iterations` may be null.
 */
enum BeamStatus beam_model_stationary_solve(const struct BeamModel *model,
                                            const double *guess,
                                            uintptr_t modes,
                                            double tol,
                                            uintptr_t max_iter,
                                            double *out_y,
                                            uintptr_t *out_iterations);

/**
 * Integrate from `(y0, v0)` over `[0, t_final]`, keeping every `stride`-th step.
 * `dt <= 0` selects the automatic step; the scheme follows the model's experiment file.
 * On divergence the status is `Divergence` and no record is returned.
 *
 * # Safety
 * `y0`, `v0` must point to `modes` doubles; `out` must be valid.
 */
enum BeamStatus beam_simulate(const struct BeamModel *model,
                              const double *y0,
                              const double *v0,
                              uintptr_t modes,
                              double t_final,
                              double dt,
                              uintptr_t stride,
                              struct BeamRecord **out);

/**
 * # Safety
 * `record` must come from [`beam_simulate`] and not be used afterwards. Null is ignored.
 */
void beam_record_free(struct BeamRecord *record);

/**
 * Number of samples, 0 for a null record.
 *
 * # Safety
 * `record` must be null or a live handle.
 */
uintptr_t beam_record_len(const struct BeamRecord *record);

/**
 * Copy sample `index`: time, displacement, velocity and energy. Any output may be null.
 *
 * # Safety
 * Non-null `y`, `v` must point to `modes` doubles.
 */
enum BeamStatus beam_record_sample(const struct BeamRecord *record,
                                   uintptr_t index,
                                   uintptr_t modes,
                                   double *t,
                                   double *y,
                                   double *v,
                                   double *energy);

/**
 * Relative energy-balance residual of the record.
 *
 * # Safety
 * `out` must point to one double.
 */
enum BeamStatus beam_record_energy_residual(const struct BeamRecord *record, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BEAM_ATTRACTOR_H */
