#pragma once

#include <cstddef>
#include <exception>
#include <functional>

namespace evostab {

/// Worker count: EVOSTAB_THREADS when set (>= 1), else hardware concurrency.
unsigned thread_count();

/// Runs body(i) for i in [0, n) on up to thread_count() threads. Callers write
/// results into index-addressed storage, so output never depends on
/// scheduling. If several iterations throw, the exception of the lowest index
/// is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

} // namespace evostab
