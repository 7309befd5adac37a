#pragma once

#include <cstddef>
#include <functional>

namespace homog {

/// Worker count for parallel loops: set_thread_count() if called, otherwise
/// HOMOG_THREADS, otherwise the hardware concurrency.
int thread_count();
void set_thread_count(int threads);  // <= 0 restores the default

/// Calls fn(i) for every i in [0, count). Items must be independent; the
/// partition into workers never affects results because each item writes
/// only its own output slot.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

}  // namespace homog
