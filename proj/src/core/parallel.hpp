#pragma once

#include <algorithm>
#include <thread>
#include <vector>

namespace ftc::detail {

// Contiguous index chunks per worker; fn(i) must only write slot i of its output.
template <class Fn>
void parallel_for(long count, int workers, Fn&& fn) {
  int w = workers > 0 ? workers : static_cast<int>(std::thread::hardware_concurrency());
  w = std::max(1, std::min(w, 64));
  if (w == 1 || count < 2 * w) {
    for (long i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  const long chunk = (count + w - 1) / w;
  for (int k = 0; k < w; ++k) {
    const long lo = k * chunk, hi = std::min(count, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (long i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace ftc::detail
