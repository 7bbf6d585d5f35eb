#pragma once

#include <cstddef>
#include <exception>
#include <functional>

namespace prevmap {

/// Hardware concurrency, at least 1.
std::size_t default_thread_count();

/// Calls body(i) for i in [0, count) on up to `threads` workers. Each index
/// runs exactly once; callers write results by index. If any call throws,
/// the exception of the lowest failing index is rethrown after all workers
/// finish, so failures do not depend on scheduling.
void parallel_for_index(std::size_t count, std::size_t threads,
                        const std::function<void(std::size_t)>& body);

/// Exception carrying the index at which parallel_for_index failed.
struct IndexedFailure {
  std::size_t index;
  std::exception_ptr error;
};

}  // namespace prevmap
