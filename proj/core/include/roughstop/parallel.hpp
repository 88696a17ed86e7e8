#pragma once

#include <cstddef>
#include <functional>

namespace roughstop {

// Worker count used by every path-parallel loop. Defaults to the hardware
// concurrency. Results never depend on this value.
void set_thread_count(unsigned n);
unsigned thread_count();

// Splits [0, n) into contiguous blocks and runs body(begin, end) on each,
// possibly concurrently. Bodies must only write to disjoint outputs.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace roughstop
