#ifndef RGG_PARALLEL_HPP
#define RGG_PARALLEL_HPP

#include <cstddef>
#include <functional>

namespace rgg {

/// Worker count used by parallel_for. Defaults to 1; 0 is treated as 1.
void set_thread_count(unsigned n);
unsigned thread_count();

/// Calls body(begin, end) on contiguous chunks covering [0, n). Chunks are
/// fixed by n and the thread count, and each index is handled exactly once, so
/// bodies that write to per-index slots give identical results for any
/// thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

} // namespace rgg

#endif
