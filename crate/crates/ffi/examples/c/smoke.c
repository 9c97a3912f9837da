/* Bell pair plus a transpiled bit-flip code through the C API. */
#include <stdio.h>
#include "qecbench.h"

#define CHECK(call)                                                        \
  do {                                                                     \
    QecStatus s_ = (call);                                                 \
    if (s_ != QEC_STATUS_OK) {                                             \
      fprintf(stderr, "%s failed (%d): %s\n", #call, (int)s_,              \
              qec_last_error() ? qec_last_error() : "");                   \
      return 1;                                                            \
    }                                                                      \
  } while (0)

int main(void) {
  QecCircuit *bell = NULL;
  QecDistribution *dist = NULL;
  CHECK(qec_circuit_parse("qubits 2\nclbits 2\nh 0\ncx 0 1\n"
                          "measure 0 -> 0\nmeasure 1 -> 1\n", &bell));
  CHECK(qec_simulate(bell, NULL, 0, 0, &dist));
  size_t n = 0;
  CHECK(qec_distribution_len(dist, &n));
  for (size_t i = 0; i < n; i++) {
    uint64_t k;
    double p;
    CHECK(qec_distribution_get(dist, i, &k, &p));
    printf("bell %llu %.6f\n", (unsigned long long)k, p);
  }
  qec_distribution_free(dist);
  qec_circuit_free(bell);

  QecDevice *dev = NULL;
  QecNoiseModel *noise = NULL;
  QecCircuit *code = NULL, *placed = NULL;
  QecTranspiled *t = NULL;
  CHECK(qec_device_resolve("nv-center-5", &dev));
  CHECK(qec_noise_model_build(dev, &noise));
  CHECK(qec_circuit_code(QEC_CODE_BIT_FLIP, QEC_RECOVERY_POST_PROCESSING,
                         QEC_INPUT_ZERO, &code));
  CHECK(qec_transpile(code, dev, noise, &t));
  CHECK(qec_transpiled_circuit(t, &placed));
  size_t multi = 0;
  double ler = 0.0;
  CHECK(qec_transpiled_multi_qubit_gates(t, &multi));
  CHECK(qec_logical_error_rate(placed, QEC_CODE_BIT_FLIP,
                               QEC_RECOVERY_POST_PROCESSING, QEC_INPUT_ZERO,
                               noise, 0, 0, &ler));
  printf("nv multi %zu ler %.4f\n", multi, ler);

  if (qec_device_resolve("missing", &dev) != QEC_STATUS_CONFIG) return 2;

  qec_circuit_free(placed);
  qec_transpiled_free(t);
  qec_circuit_free(code);
  qec_noise_model_free(noise);
  qec_device_free(dev);
  return 0;
}
