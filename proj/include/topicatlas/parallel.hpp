#pragma once

#include <cstddef>
#include <functional>

namespace topicatlas {

// Worker count used when an options struct leaves `threads` at 0. Reads
// TOPICATLAS_THREADS once, falling back to 1.
std::size_t default_threads();
void set_default_threads(std::size_t n);

inline std::size_t resolve_threads(std::size_t requested) {
  return requested == 0 ? default_threads() : requested;
}

// Runs body(i) for i in [0, n) split into contiguous blocks across
// `threads` workers. Callers write results into per-index slots and reduce
// afterwards in index order, which keeps output independent of the thread
// count. Exceptions from workers are rethrown on the calling thread.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& body);

}  // namespace topicatlas
