#pragma once

#include <cstddef>
#include <exception>
#include <vector>

namespace enlab {

enum class Execution { serial, parallel };

struct BatchOptions {
  Execution execution = Execution::parallel;
  int threads = 0;  // 0: ENLAB_THREADS if set, else the OpenMP default
};

// Thread count a parallel batch will use under these options.
int resolve_threads(const BatchOptions& options);

// Reference implementation: plain loop in index order.
template <class T, class Fn>
std::vector<T> map_paths_serial(std::size_t n, Fn&& fn) {
  std::vector<T> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
  return out;
}

template <class T, class Fn>
std::vector<T> map_paths_parallel(std::size_t n, Fn&& fn, int threads) {
  std::vector<T> out(n);
  std::exception_ptr error;
  const long long count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 16) num_threads(threads)
  for (long long i = 0; i < count; ++i) {
    try {
      out[static_cast<std::size_t>(i)] = fn(static_cast<std::size_t>(i));
    } catch (...) {
#pragma omp critical(enlab_batch_error)
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  return out;
}

// Per-path results land at their index, so both modes return identical vectors.
template <class T, class Fn>
std::vector<T> map_paths(std::size_t n, Fn&& fn, const BatchOptions& options) {
  if (options.execution == Execution::serial) return map_paths_serial<T>(n, fn);
  return map_paths_parallel<T>(n, fn, resolve_threads(options));
}

}  // namespace enlab
