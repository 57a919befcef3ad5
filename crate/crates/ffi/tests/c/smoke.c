#include <math.h>
#include <stdio.h>
#include <stdlib.h>

#include "symsurf.h"

#define N 32
#define DIM 4
#define LEN (N * N * DIM)

static int failures = 0;

static void expect(int ok, const char *what) {
  if (!ok) {
    const char *msg = symsurf_last_error_message();
    fprintf(stderr, "FAIL %s: %s\n", what, msg ? msg : "(no message)");
    failures++;
  }
}

int main(void) {
  SymsurfModel *model = NULL;
  SymsurfEmbedding *f0 = NULL;
  expect(symsurf_model_standard(2, &model) == SYMSURF_STATUS_OK, "model");
  expect(symsurf_model_dim(model) == DIM, "dim");
  expect(symsurf_embedding_sheared(model, N, N, 0.0, &f0) == SYMSURF_STATUS_OK, "flat");

  double *u = calloc(LEN, sizeof(double));
  double *v = calloc(LEN, sizeof(double));
  for (size_t i = 0; i < N; i++) {
    double c = cos(2.0 * M_PI * (double)i / N);
    for (size_t j = 0; j < N; j++) {
      u[(i * N + j) * DIM + 3] = -c;
      v[(i * N + j) * DIM + 2] = c;
    }
  }
  double d = 0.0, s = 0.0;
  expect(symsurf_omega_d(f0, u, v, LEN, NULL, &d) == SYMSURF_STATUS_OK, "omega_d");
  expect(symsurf_omega_s(f0, u, v, LEN, &s) == SYMSURF_STATUS_OK, "omega_s");
  expect(fabs(d - 0.5) <= 1e-10, "omega_d value");
  expect(fabs(s - 1.0) <= 1e-10, "omega_s value");

  SymsurfVerdict verdict;
  expect(symsurf_classify(f0, u, LEN, 1e-8, 1e-8, &verdict, NULL) == SYMSURF_STATUS_OK, "classify");
  expect(verdict == SYMSURF_VERDICT_EXACT, "verdict");

  expect(symsurf_omega_d(NULL, u, v, LEN, NULL, &d) == SYMSURF_STATUS_NULL_POINTER, "null handle");
  expect(symsurf_last_error_message() != NULL, "error message");

  SymsurfEmbedding *fa = NULL, *normalised = NULL;
  double residual = 1.0;
  int32_t converged = 0;
  expect(symsurf_embedding_sheared(model, N, N, 0.3, &fa) == SYMSURF_STATUS_OK, "sheared");
  expect(symsurf_moser(fa, NULL, 50, 1e-4, &normalised, &residual, &converged) == SYMSURF_STATUS_OK, "moser");
  expect(converged == 1 && residual <= 1e-4, "moser residual");

  symsurf_embedding_free(normalised);
  symsurf_embedding_free(fa);
  symsurf_embedding_free(f0);
  symsurf_model_free(model);
  free(u);
  free(v);
  if (failures == 0) {
    printf("c smoke test passed (symsurf %s)\n", symsurf_version());
  }
  return failures == 0 ? 0 : 1;
}
