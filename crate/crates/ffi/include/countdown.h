#ifndef COUNTDOWN_H
#define COUNTDOWN_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum CdStatus {
  CD_STATUS_OK = 0,
  CD_STATUS_NULL_POINTER = 1,
  CD_STATUS_INVALID_UTF8 = 2,
  CD_STATUS_INVALID_SPEC = 3,
  CD_STATUS_INVALID_ARGUMENT = 4,
  CD_STATUS_SIMULATION_FAILED = 5,
  CD_STATUS_AVALANCHE = 6,
  CD_STATUS_OUT_OF_RANGE = 7,
  CD_STATUS_PANIC = 8,
} CdStatus;

// Compiled network.
typedef struct CdNetwork CdNetwork;

// Spikes of one realization.
typedef struct CdSpikeTrain CdSpikeTrain;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread; empty if none. The
// pointer stays valid until the next failing call on the same thread.
const char *cd_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *cd_version(void);

// Parses and compiles a TOML network document.
//
// # Safety
// `toml` must be a NUL-terminated string and `out` a valid pointer.
enum CdStatus cd_network_parse(const char *toml, struct CdNetwork **out);

// Releases a network; null is ignored.
//
// # Safety
// `network` must come from [`cd_network_parse`] and not be used afterwards.
void cd_network_free(struct CdNetwork *network);

// Number of neurons; 0 for null.
//
// # Safety
// `network` must be null or a live handle.
uintptr_t cd_network_neuron_count(const struct CdNetwork *network);

// Horizon of the spec; NaN for null.
//
// # Safety
// `network` must be null or a live handle.
double cd_network_horizon(const struct CdNetwork *network);

// Simulates realization `run_index` of master seed `seed` on `[0, horizon]`.
// The result equals run `run_index` of an ensemble with the same seed.
//
// # Safety
// `network` must be a live handle and `out` a valid pointer.
enum CdStatus cd_simulate(const struct CdNetwork *network,
                          uint64_t seed,
                          uint64_t run_index,
                          double horizon,
                          struct CdSpikeTrain **out);

// Number of spikes; 0 for null.
//
// # Safety
// `train` must be null or a live handle.
uintptr_t cd_spike_train_len(const struct CdSpikeTrain *train);

// Spike `index` (time order) as time and neuron id.
//
// # Safety
// `train` must be a live handle; `time` and `neuron` valid pointers.
enum CdStatus cd_spike_train_get(const struct CdSpikeTrain *train,
                                 uintptr_t index,
                                 double *time,
                                 uintptr_t *neuron);

// Releases a spike train; null is ignored.
//
// # Safety
// `train` must come from [`cd_simulate`] and not be used afterwards.
void cd_spike_train_free(struct CdSpikeTrain *train);

// Density at `t` of the first passage of a Brownian motion with drift `mu`
// and noise `sigma` through a barrier at distance `a`.
//
// # Safety
// `out` must be a valid pointer.
enum CdStatus cd_ig_density(double t, double a, double mu, double sigma, double *out);

// Two-sample Kolmogorov–Smirnov statistic.
//
// # Safety
// `a` and `b` must point to `na` and `nb` readable values; `out` must be valid.
enum CdStatus cd_ks_statistic(const double *a,
                              uintptr_t na,
                              const double *b,
                              uintptr_t nb,
                              double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* COUNTDOWN_H */
