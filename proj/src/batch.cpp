#include "enlab/batch.hpp"

#include <omp.h>

#include <cstdlib>
#include <string>

namespace enlab {

int resolve_threads(const BatchOptions& options) {
  int threads = options.threads > 0 ? options.threads : omp_get_max_threads();
  if (const char* cap = std::getenv("ENLAB_THREADS")) {
    try {
      const int limit = std::stoi(cap);
      if (limit > 0 && limit < threads) threads = limit;
    } catch (const std::exception&) {
      // ignore malformed values
    }
  }
  return threads < 1 ? 1 : threads;
}

}  // namespace enlab
