#ifndef SOFTRB_BENCH_TIMING_HPP
#define SOFTRB_BENCH_TIMING_HPP

#include <algorithm>
#include <chrono>
#include <vector>

namespace softrb::bench {

template <typename F>
double median_seconds(int reps, F&& f) {
  std::vector<double> samples;
  samples.reserve(std::max(reps, 1));
  for (int r = 0; r < std::max(reps, 1); ++r) {
    const auto start = std::chrono::steady_clock::now();
    f();
    const auto stop = std::chrono::steady_clock::now();
    samples.push_back(std::chrono::duration<double>(stop - start).count());
  }
  std::sort(samples.begin(), samples.end());
  const std::size_t mid = samples.size() / 2;
  return samples.size() % 2 ? samples[mid]
                            : 0.5 * (samples[mid - 1] + samples[mid]);
}

}  // namespace softrb::bench

#endif  // SOFTRB_BENCH_TIMING_HPP
