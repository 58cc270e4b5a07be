#include <cstdlib>

#include "auvfleet/cli.hpp"

int main(int argc, char** argv) {
  // Single-threaded BLAS keeps per-solve timings stable and avoids
  // oversubscription when agents solve concurrently.
  setenv("OPENBLAS_NUM_THREADS", "1", 0);
  return auvfleet::cli_main(argc, argv);
}
