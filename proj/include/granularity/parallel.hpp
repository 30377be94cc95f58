#pragma once

#include <cstdint>

namespace granularity {

/// Sets the worker count used by every parallel loop in the library.
/// Values <= 0 restore the default (all hardware threads).
void set_thread_count(int threads);
int thread_count();

/// Runs body(i) for i in [0, count). Iterations must be independent and must
/// write only to slots owned by i; callers reduce the slots serially so
/// results never depend on the worker count. The body must not throw.
template <typename Body>
void parallel_for(std::int64_t count, Body&& body) {
#pragma omp parallel for schedule(dynamic, 16) num_threads(thread_count())
  for (std::int64_t i = 0; i < count; ++i) {
    body(i);
  }
}

}  // namespace granularity
