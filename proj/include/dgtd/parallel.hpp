#pragma once

#include <algorithm>
#include <thread>
#include <vector>

namespace dgtd {

/// Runs fn(begin, end) over contiguous chunks of [0, count) on up to
/// `threads` workers. Chunks are disjoint, so fn may write to its own range.
template <typename Fn>
void parallel_for_ranges(int count, int threads, Fn&& fn) {
  threads = std::clamp(threads, 1, std::max(1, count));
  if (threads == 1) {
    fn(0, count);
    return;
  }
  std::vector<std::jthread> workers;
  workers.reserve(threads - 1);
  const int chunk = (count + threads - 1) / threads;
  for (int t = 1; t < threads; ++t) {
    const int begin = t * chunk;
    const int end = std::min(count, begin + chunk);
    if (begin >= end) break;
    workers.emplace_back([&fn, begin, end] { fn(begin, end); });
  }
  fn(0, std::min(count, chunk));
}

}  // namespace dgtd
