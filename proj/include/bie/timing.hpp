#pragma once

#include <algorithm>
#include <chrono>
#include <vector>

namespace bie {

/// Median wall-clock time of `fn` over `reps` repetitions, one warm-up run
/// discarded.  Monotonic clock.
template <class Fn>
double median_time(Fn&& fn, int reps = 5) {
  std::vector<double> times;
  times.reserve(reps);
  for (int i = -1; i < reps; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const double dt =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (i >= 0) times.push_back(dt);
  }
  std::sort(times.begin(), times.end());
  return times[times.size() / 2];
}

}  // namespace bie
