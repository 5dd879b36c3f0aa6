/* Compile-and-run check that the public header is valid C and the shared
 * library is callable from plain C.  Exits nonzero on the first failure. */
#include <stdio.h>
#include <string.h>

#include "tfm/tfm.h"

#define EXPECT(cond)                                                      \
  do {                                                                    \
    if (!(cond)) {                                                        \
      fprintf(stderr, "FAILED: %s (line %d): %s\n", #cond, __LINE__,      \
              tfm_last_error());                                          \
      return 1;                                                           \
    }                                                                     \
  } while (0)

int main(void) {
  EXPECT(tfm_version() != NULL);

  tfm_spec* spec = NULL;
  EXPECT(tfm_spec_preset("I", &spec) == TFM_OK);
  EXPECT(tfm_spec_set_lambda(spec, 4.0) == TFM_OK);
  EXPECT(tfm_spec_set_seed(spec, 1) == TFM_OK);

  tfm_truth* truth = NULL;
  EXPECT(tfm_generate(spec, 64, &truth) == TFM_OK);

  tfm_series* observed = NULL;
  EXPECT(tfm_truth_series(truth, TFM_TRUTH_OBSERVED, &observed) == TFM_OK);

  int32_t order = 0;
  int64_t dims[TFM_MAX_ORDER];
  int64_t length = 0;
  EXPECT(tfm_series_info(observed, &order, dims, &length) == TFM_OK);
  EXPECT(order == 2 && dims[0] == 16 && dims[1] == 16 && length == 64);

  tfm_estimate_options options;
  EXPECT(tfm_estimate_options_init(&options) == TFM_OK);
  EXPECT(tfm_method_preset("iTIPUP", &options) == TFM_OK);
  options.ranks[0] = 1;
  options.ranks[1] = 1;

  tfm_result* result = NULL;
  EXPECT(tfm_estimate(observed, &options, &result) == TFM_OK);

  int32_t sweeps = 0;
  int32_t converged = 0;
  EXPECT(tfm_result_info(result, &sweeps, &converged) == TFM_OK);
  EXPECT(sweeps >= 1);

  double u_hat[16];
  double u_true[16];
  int64_t d = 0;
  int64_t r = 0;
  EXPECT(tfm_result_loading(result, 0, u_hat, 16, &d, &r) == TFM_OK);
  EXPECT(tfm_truth_loading(truth, 0, u_true, 16, &d, &r) == TFM_OK);
  double dist = -1.0;
  EXPECT(tfm_subspace_distance(16, 1, u_hat, u_true, &dist) == TFM_OK);
  EXPECT(dist >= 0.0 && dist <= 1.0);

  /* Failure paths must report through status codes, not crashes. */
  EXPECT(tfm_generate(NULL, 8, &truth) == TFM_ERR_INVALID_ARGUMENT);
  EXPECT(strlen(tfm_last_error()) > 0);

  tfm_result_free(result);
  tfm_series_free(observed);
  tfm_truth_free(truth);
  tfm_spec_free(spec);
  printf("C smoke test passed\n");
  return 0;
}
