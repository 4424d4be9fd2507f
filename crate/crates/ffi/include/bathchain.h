#ifndef BATHCHAIN_H
#define BATHCHAIN_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum BcMappingKind {
  BC_MAPPING_KIND_LANCZOS_X = 0,
  BC_MAPPING_KIND_LANCZOS_Z = 1,
  BC_MAPPING_KIND_BLOCK_LANCZOS = 2,
} BcMappingKind;

/*
 Result of every fallible call.
 */
typedef enum BcStatus {
  BC_STATUS_OK = 0,
  BC_STATUS_NULL_POINTER = 1,
  BC_STATUS_INVALID_ARGUMENT = 2,
  BC_STATUS_CONFIG_ERROR = 3,
  BC_STATUS_DEGENERATE_SEEDS = 4,
  BC_STATUS_BREAKDOWN = 5,
  BC_STATUS_NUMERICAL_FAILURE = 6,
  BC_STATUS_BUFFER_TOO_SMALL = 7,
  BC_STATUS_IO = 8,
  BC_STATUS_INTERNAL = 9,
} BcStatus;

/*
 A chain mapping of a model's bath.
 */
typedef struct BcMapping BcMapping;

/*
 An open-system model with its discretized bath.
 */
typedef struct BcModel BcModel;

/*
 Recorded observables of one run.
 */
typedef struct BcTrajectory BcTrajectory;

/*
 Evolution settings. Times in ps.
 */
typedef struct BcEvolutionConfig {
  double dt_ps;
  double t_final_ps;
  double svd_cutoff;
  size_t max_bond;
  size_t d_bath;
  size_t measure_every;
} BcEvolutionConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failed call on this thread; empty after a success.
 The pointer stays valid until the next call on the same thread.
 */
const char *bc_last_error_message(void);

/*
 Library version, a static NUL-terminated string.
 */
const char *bc_version(void);

/*
 Singlet-fission model with reference parameters at the given vibrational
 centers (meV) and `modes` bath oscillators.
 */
enum BcStatus bc_model_singlet_fission(double omega_diag,
                                       double omega_od,
                                       size_t modes,
                                       struct BcModel **out);

/*
 Model described by configuration text (the same format as the CLI).
 */
enum BcStatus bc_model_from_config(const char *text, struct BcModel **out);

void bc_model_free(struct BcModel *model);

/*
 Number of bath modes, 0 for a null handle.
 */
size_t bc_model_modes(const struct BcModel *model);

/*
 Bath frequencies (meV) into `out`, which must hold `bc_model_modes` values.
 */
enum BcStatus bc_model_frequencies(const struct BcModel *model, double *out, size_t capacity);

enum BcStatus bc_mapping_new(const struct BcModel *model,
                             enum BcMappingKind kind,
                             struct BcMapping **out);

void bc_mapping_free(struct BcMapping *mapping);

/*
 Number of chain modes, 0 for a null handle.
 */
size_t bc_mapping_modes(const struct BcMapping *mapping);

/*
 Band coefficients (meV). Each buffer must hold `bc_mapping_modes` values;
 any of them may be null to skip it.
 */
enum BcStatus bc_mapping_band(const struct BcMapping *mapping,
                              double *alpha,
                              double *beta,
                              double *kappa,
                              size_t capacity);

/*
 Default evolution settings.
 */
struct BcEvolutionConfig bc_evolution_config_default(void);

/*
 Evolves the model from system basis state `initial_state` with all modes
 in their vacuum. `mapping` must have been built from `model`.
 */
enum BcStatus bc_evolve(const struct BcModel *model,
                        const struct BcMapping *mapping,
                        const struct BcEvolutionConfig *config,
                        size_t initial_state_index,
                        struct BcTrajectory **out);

void bc_trajectory_free(struct BcTrajectory *traj);

/*
 Number of recorded times, 0 for a null handle.
 */
size_t bc_trajectory_len(const struct BcTrajectory *traj);

/*
 Recorded times in ps.
 */
enum BcStatus bc_trajectory_times(const struct BcTrajectory *traj, double *out, size_t capacity);

/*
 Population of system basis state `state` at every recorded time.
 */
enum BcStatus bc_trajectory_population(const struct BcTrajectory *traj,
                                       size_t state,
                                       double *out,
                                       size_t capacity);

/*
 Cumulative discarded weight at every recorded time.
 */
enum BcStatus bc_trajectory_discarded_weight(const struct BcTrajectory *traj,
                                             double *out,
                                             size_t capacity);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BATHCHAIN_H */
