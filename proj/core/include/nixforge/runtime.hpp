#pragma once

#include <functional>

namespace nixforge {

// Global kernel thread count. 1 (the default) keeps every kernel on the
// calling thread; N > 1 lets kernels split independent output cells across
// N workers. Partitioning never changes per-cell summation order, so results
// are bit-identical for any thread count.
int num_threads();
void set_num_threads(int n);

// Runs fn(begin, end) over a partition of [0, n). With num_threads() == 1
// (or tiny n) this is a plain call on the current thread.
void parallel_for(int n, const std::function<void(int, int)>& fn);

// Raises glibc's dynamic mmap/trim thresholds so the multi-megabyte
// activation buffers allocated per kernel call recycle inside the arena
// instead of round-tripping through mmap page-zeroing. Call once at process
// start; a no-op on other libcs.
void tune_allocator();

} // namespace nixforge
