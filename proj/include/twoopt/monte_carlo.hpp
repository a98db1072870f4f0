#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <thread>
#include <vector>

#include "twoopt/rng.hpp"

namespace twoopt {

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
  std::uint64_t samples = 0;
  // Set when the estimator hit a degenerate case (e.g. zero acceptances).
  bool flagged = false;
};

// Number of standard errors separating two independent estimates.
inline double z_distance(const Estimate& a, const Estimate& b) {
  const double combined = std::hypot(a.std_error, b.std_error);
  const double diff = std::fabs(a.value - b.value);
  if (combined == 0.0) return diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return diff / combined;
}

inline bool agrees_within(const Estimate& a, const Estimate& b, double sigmas) {
  return z_distance(a, b) <= sigmas;
}

inline bool agrees_within(const Estimate& a, double exact, double sigmas) {
  return std::fabs(a.value - exact) <= sigmas * a.std_error ||
         (a.std_error == 0.0 && a.value == exact);
}

struct Accumulator {
  double sum = 0.0;
  double sum_sq = 0.0;
  std::uint64_t count = 0;

  void add(double x) noexcept {
    sum += x;
    sum_sq += x * x;
    ++count;
  }

  void merge(const Accumulator& o) noexcept {
    sum += o.sum;
    sum_sq += o.sum_sq;
    count += o.count;
  }

  double mean() const noexcept { return count ? sum / static_cast<double>(count) : 0.0; }

  double variance() const noexcept {
    if (count < 2) return 0.0;
    const double m = mean();
    const double v = (sum_sq - static_cast<double>(count) * m * m) / static_cast<double>(count - 1);
    return std::max(v, 0.0);
  }

  Estimate estimate() const noexcept {
    return {mean(), count ? std::sqrt(variance() / static_cast<double>(count)) : 0.0, count, false};
  }
};

// Binomial proportion with the plug-in standard error sqrt(p(1-p)/N).
inline Estimate proportion(std::uint64_t hits, std::uint64_t total) {
  if (total == 0) return {0.0, 0.0, 0, true};
  const double p = static_cast<double>(hits) / static_cast<double>(total);
  return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(total)), total, hits == 0};
}

inline unsigned resolve_workers(unsigned requested) {
  if (requested != 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

// Runs body(worker) for worker in [0, workers); worker 0 runs on the caller.
template <class Body>
void for_each_worker(unsigned workers, Body&& body) {
  workers = std::max(1u, workers);
  std::vector<std::jthread> pool;
  pool.reserve(workers - 1);
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back([&body, w] { body(w); });
  body(0u);
}

inline constexpr std::uint64_t kBlockSize = 4096;

// Splits `total` draws into fixed-size blocks, each with its own stream keyed
// by block index, and reduces the per-block results in block order. The
// result is therefore bit-identical for every worker count.
//
// block_body(Stream&, std::uint64_t count) -> Result, Result::merge(const Result&).
template <class Result, class BlockBody>
Result blocked_monte_carlo(std::uint64_t total, std::uint64_t seed, Purpose purpose,
                           unsigned workers, BlockBody&& block_body) {
  const std::uint64_t blocks = (total + kBlockSize - 1) / kBlockSize;
  std::vector<Result> partial(blocks);
  workers = static_cast<unsigned>(std::clamp<std::uint64_t>(workers, 1, std::max<std::uint64_t>(blocks, 1)));
  for_each_worker(workers, [&](unsigned w) {
    for (std::uint64_t b = w; b < blocks; b += workers) {
      Stream rng(seed, purpose, b);
      const std::uint64_t count = std::min(kBlockSize, total - b * kBlockSize);
      partial[b] = block_body(rng, count);
    }
  });
  Result out{};
  for (const auto& p : partial) out.merge(p);
  return out;
}

struct HitCounter {
  std::uint64_t hits = 0;
  std::uint64_t total = 0;
  void merge(const HitCounter& o) noexcept {
    hits += o.hits;
    total += o.total;
  }
};

}  // namespace twoopt
