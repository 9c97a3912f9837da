#ifndef QECBENCH_H
#define QECBENCH_H

/* Generated with cbindgen:0.29.4 */

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define QEC_CODE_BIT_FLIP 0

#define QEC_CODE_PHASE_FLIP 1

#define QEC_RECOVERY_POST_PROCESSING 0

#define QEC_RECOVERY_UNITARY 1

#define QEC_INPUT_ZERO 0

#define QEC_INPUT_ONE 1

#define QEC_INPUT_PLUS 2

#define QEC_INPUT_MINUS 3

#define QEC_INPUT_PLUS_I 4

#define QEC_INPUT_MINUS_I 5

#define QEC_FORMAT_CSV 0

#define QEC_FORMAT_JSON 1

/**
 * Result of every fallible call.
 */
typedef enum QecStatus {
  QEC_STATUS_OK = 0,
  QEC_STATUS_NULL_POINTER = 1,
  QEC_STATUS_INVALID_UTF8 = 2,
  QEC_STATUS_INVALID_ARGUMENT = 3,
  QEC_STATUS_PARSE = 4,
  QEC_STATUS_CONFIG = 5,
  QEC_STATUS_UNSUPPORTED_GATE = 6,
  QEC_STATUS_ROUTING = 7,
  QEC_STATUS_CAPACITY = 8,
  QEC_STATUS_EXECUTION = 9,
  QEC_STATUS_IO = 10,
  QEC_STATUS_OUT_OF_RANGE = 11,
  QEC_STATUS_PANIC = 99,
} QecStatus;

/**
 * A circuit, virtual or placed.
 */
typedef struct QecCircuit QecCircuit;

/**
 * A device description (coupling graph, native gates, calibration).
 */
typedef struct QecDevice QecDevice;

/**
 * Outcome probabilities keyed by the classical register value.
 */
typedef struct QecDistribution QecDistribution;

/**
 * Noise channels fitted to a device's calibration.
 */
typedef struct QecNoiseModel QecNoiseModel;

/**
 * Outcome of a transpilation.
 */
typedef struct QecTranspiled QecTranspiled;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the last failure on this thread, or null. The pointer
 * stays valid until the next library call on the same thread.
 */
const char *qec_last_error(void);

/**
 * Library version as a static string.
 */
const char *qec_version(void);

/**
 * # Safety
 * `s` must be null or a string returned by this library, not yet freed.
 */
void qec_string_free(char *s);

/**
 * Resolves a preset name (searching the preset directory first) or a device
 * file path.
 *
 * # Safety
 * `name` must be a nul-terminated string; `out` must be writable.
 */
enum QecStatus qec_device_resolve(const char *name, struct QecDevice **out);

/**
 * Parses a device description in TOML form.
 *
 * # Safety
 * `text` must be a nul-terminated string; `out` must be writable.
 */
enum QecStatus qec_device_from_toml(const char *text, struct QecDevice **out);

/**
 * # Safety
 * `device` must be a valid handle; `out` must be writable.
 */
enum QecStatus qec_device_num_qubits(const struct QecDevice *device, size_t *out);

/**
 * # Safety
 * `device` must be null or a handle not yet freed.
 */
void qec_device_free(struct QecDevice *device);

/**
 * Fits the noise model for `device`.
 *
 * # Safety
 * `device` must be a valid handle; `out` must be writable.
 */
enum QecStatus qec_noise_model_build(const struct QecDevice *device, struct QecNoiseModel **out);

/**
 * Average gate fidelity of the single-qubit gate on `qubit`.
 *
 * # Safety
 * `noise` must be a valid handle; `out` must be writable.
 */
enum QecStatus qec_noise_model_single_fidelity(const struct QecNoiseModel *noise,
                                               size_t qubit,
                                               double *out);

/**
 * # Safety
 * `noise` must be null or a handle not yet freed.
 */
void qec_noise_model_free(struct QecNoiseModel *noise);

/**
 * Parses the line-oriented circuit text format.
 *
 * # Safety
 * `text` must be a nul-terminated string; `out` must be writable.
 */
enum QecStatus qec_circuit_parse(const char *text, struct QecCircuit **out);

/**
 * Virtual circuit of a repetition code (`QEC_CODE_*`, `QEC_RECOVERY_*`,
 * `QEC_INPUT_*`).
 *
 * # Safety
 * `out` must be writable.
 */
enum QecStatus qec_circuit_code(int kind, int recovery, int input, struct QecCircuit **out);

/**
 * Circuit in text form; release with `qec_string_free`.
 *
 * # Safety
 * `circuit` must be a valid handle; `out` must be writable.
 */
enum QecStatus qec_circuit_to_text(const struct QecCircuit *circuit, char **out);

/**
 * # Safety
 * `circuit` must be a valid handle; outputs must be writable.
 */
enum QecStatus qec_circuit_size(const struct QecCircuit *circuit,
                                size_t *n_qubits,
                                size_t *n_clbits);

/**
 * # Safety
 * `circuit` must be null or a handle not yet freed.
 */
void qec_circuit_free(struct QecCircuit *circuit);

/**
 * Layout search, routing and lowering onto `device`.
 *
 * # Safety
 * Handles must be valid; `out` must be writable.
 */
enum QecStatus qec_transpile(const struct QecCircuit *circuit,
                             const struct QecDevice *device,
                             const struct QecNoiseModel *noise,
                             struct QecTranspiled **out);

/**
 * Copy of the placed circuit.
 *
 * # Safety
 * `t` must be a valid handle; `out` must be writable.
 */
enum QecStatus qec_transpiled_circuit(const struct QecTranspiled *t, struct QecCircuit **out);

/**
 * # Safety
 * `t` must be a valid handle; `out` must be writable.
 */
enum QecStatus qec_transpiled_p_av(const struct QecTranspiled *t, double *out);

/**
 * Native gates acting on two or more qubits.
 *
 * # Safety
 * `t` must be a valid handle; `out` must be writable.
 */
enum QecStatus qec_transpiled_multi_qubit_gates(const struct QecTranspiled *t, size_t *out);

/**
 * Physical qubit of virtual qubit `v` at the start of the circuit.
 *
 * # Safety
 * `t` must be a valid handle; `out` must be writable.
 */
enum QecStatus qec_transpiled_layout(const struct QecTranspiled *t, size_t v, size_t *out);

/**
 * # Safety
 * `t` must be null or a handle not yet freed.
 */
void qec_transpiled_free(struct QecTranspiled *t);

/**
 * Runs `circuit`; `noise` may be null for a noiseless run and `shots` = 0
 * gives exact probabilities.
 *
 * # Safety
 * `circuit` must be valid, `noise` null or valid, `out` writable.
 */
enum QecStatus qec_simulate(const struct QecCircuit *circuit,
                            const struct QecNoiseModel *noise,
                            size_t shots,
                            uint64_t seed,
                            struct QecDistribution **out);

/**
 * Number of outcomes with nonzero weight.
 *
 * # Safety
 * `d` must be a valid handle; `out` must be writable.
 */
enum QecStatus qec_distribution_len(const struct QecDistribution *d, size_t *out);

/**
 * # Safety
 * `d` must be a valid handle; `out` must be writable.
 */
enum QecStatus qec_distribution_num_clbits(const struct QecDistribution *d, size_t *out);

/**
 * Entry `i` in increasing outcome order; clbit 0 is the least significant
 * bit of `outcome`.
 *
 * # Safety
 * `d` must be a valid handle; outputs must be writable.
 */
enum QecStatus qec_distribution_get(const struct QecDistribution *d,
                                    size_t i,
                                    uint64_t *outcome,
                                    double *probability);

/**
 * # Safety
 * `d` must be null or a handle not yet freed.
 */
void qec_distribution_free(struct QecDistribution *d);

/**
 * Logical error rate of a (typically transpiled) code circuit under a
 * uniformly random correctable error.
 *
 * # Safety
 * `circuit` must be valid, `noise` null or valid, `out` writable.
 */
enum QecStatus qec_logical_error_rate(const struct QecCircuit *circuit,
                                      int kind,
                                      int recovery,
                                      int input,
                                      const struct QecNoiseModel *noise,
                                      size_t shots,
                                      uint64_t seed,
                                      double *out);

/**
 * Runs the experiment described by a TOML configuration and returns the
 * table (`QEC_FORMAT_CSV` or `QEC_FORMAT_JSON`); release with
 * `qec_string_free`. The configured output path is ignored.
 *
 * # Safety
 * `config` must be a nul-terminated string; `out` must be writable.
 */
enum QecStatus qec_bench_run(const char *config, int format, char **out);

/**
 * Writes the experiment table to `path`.
 *
 * # Safety
 * Both arguments must be nul-terminated strings.
 */
enum QecStatus qec_bench_run_to_file(const char *config, const char *path);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QECBENCH_H */
