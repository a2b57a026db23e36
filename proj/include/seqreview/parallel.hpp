#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace seqreview {

/// Running mean/variance (Welford), mergeable with Chan's update.
struct RunningStats {
  double count = 0.0;
  double mean = 0.0;
  double m2 = 0.0;

  void push(double x) {
    count += 1.0;
    const double delta = x - mean;
    mean += delta / count;
    m2 += delta * (x - mean);
  }

  void merge(const RunningStats& other) {
    if (other.count == 0.0) return;
    if (count == 0.0) {
      *this = other;
      return;
    }
    const double total = count + other.count;
    const double delta = other.mean - mean;
    mean += delta * other.count / total;
    m2 += other.m2 + delta * delta * count * other.count / total;
    count = total;
  }

  double variance() const { return count > 1.0 ? m2 / (count - 1.0) : 0.0; }
  double std_error() const { return count > 0.0 ? std::sqrt(variance() / count) : 0.0; }
};

/// Paired moments of (numerator, denominator) for ratio estimators
/// sum(x) / sum(y), with a delta-method standard error.
struct RatioStats {
  double count = 0.0;
  double mean_x = 0.0;
  double mean_y = 0.0;
  double cxx = 0.0;
  double cyy = 0.0;
  double cxy = 0.0;

  void push(double x, double y) {
    count += 1.0;
    const double dx = x - mean_x;
    const double dy = y - mean_y;
    mean_x += dx / count;
    mean_y += dy / count;
    cxx += dx * (x - mean_x);
    cyy += dy * (y - mean_y);
    cxy += dx * (y - mean_y);
  }

  void merge(const RatioStats& o) {
    if (o.count == 0.0) return;
    if (count == 0.0) {
      *this = o;
      return;
    }
    const double total = count + o.count;
    const double dx = o.mean_x - mean_x;
    const double dy = o.mean_y - mean_y;
    const double w = count * o.count / total;
    mean_x += dx * o.count / total;
    mean_y += dy * o.count / total;
    cxx += o.cxx + dx * dx * w;
    cyy += o.cyy + dy * dy * w;
    cxy += o.cxy + dx * dy * w;
    count = total;
  }

  double ratio() const { return mean_y != 0.0 ? mean_x / mean_y : 0.0; }

  double std_error() const {
    if (count < 2.0 || mean_y == 0.0) return 0.0;
    const double r = ratio();
    const double var = (cxx - 2.0 * r * cxy + r * r * cyy) / (count - 1.0);
    return std::sqrt(std::max(var, 0.0) / count) / std::abs(mean_y);
  }
};

/// Worker count from SEQREVIEW_WORKERS, else the hardware concurrency.
inline unsigned worker_count() {
  if (const char* env = std::getenv("SEQREVIEW_WORKERS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

inline constexpr std::size_t kBlockSize = 256;

/// Runs fn(i) for every i in [0, count). Each call must write only to its
/// own output slot; results are then independent of the worker count.
template <class Fn>
void parallel_for(std::size_t count, Fn&& fn, unsigned workers = worker_count()) {
  const unsigned nthreads = static_cast<unsigned>(std::min<std::size_t>(workers, count));
  if (nthreads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(nthreads);
  for (unsigned t = 0; t < nthreads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          next = count;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

/// Splits [0, count) into fixed blocks, evaluates `block(begin, end)` for
/// each (possibly on several threads) and merges the per-block accumulators
/// in a fixed pairwise tree. The block layout and merge order depend only on
/// `count`, so the result is bit-identical for any worker count.
template <class Acc, class BlockFn>
Acc reduce_blocks(std::size_t count, BlockFn&& block, unsigned workers = worker_count()) {
  const std::size_t nblocks = (count + kBlockSize - 1) / kBlockSize;
  if (nblocks == 0) return Acc{};
  std::vector<Acc> partial(nblocks);
  auto run_block = [&](std::size_t b) {
    const std::size_t begin = b * kBlockSize;
    partial[b] = block(begin, std::min(count, begin + kBlockSize));
  };
  parallel_for(nblocks, run_block, workers);
  for (std::size_t width = 1; width < nblocks; width *= 2) {
    for (std::size_t i = 0; i + width < nblocks; i += 2 * width) partial[i].merge(partial[i + width]);
  }
  return partial[0];
}

}  // namespace seqreview
