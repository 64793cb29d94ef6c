#pragma once

#include "fpdp/core.hpp"

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <type_traits>
#include <vector>

namespace fpdp {

/// Runs fn(t) for t in [0, trials) on `jobs` worker threads and returns the
/// results in trial order, independent of completion order. The first
/// exception thrown by any trial is rethrown.
template <class Fn>
auto run_trials(Index trials, int jobs, Fn&& fn) -> std::vector<std::invoke_result_t<Fn&, Index>> {
  using Result = std::invoke_result_t<Fn&, Index>;
  std::vector<Result> results(static_cast<std::size_t>(std::max<Index>(trials, 0)));
  if (trials <= 0) return results;

  const int workers = std::clamp<int>(jobs, 1, static_cast<int>(std::min<Index>(trials, 256)));
  if (workers == 1) {
    for (Index t = 0; t < trials; ++t) results[static_cast<std::size_t>(t)] = fn(t);
    return results;
  }

  std::atomic<Index> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    for (Index t = next++; t < trials; t = next++) {
      try {
        results[static_cast<std::size_t>(t)] = fn(t);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = trials;
      }
    }
  };
  std::vector<std::jthread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  pool.clear();
  if (error) std::rethrow_exception(error);
  return results;
}

/// A proportion with its Wilson score interval.
struct Rate {
  Index hits = 0;
  Index trials = 0;
  double value = 0.0;
  double lo = 0.0;
  double hi = 1.0;
};

/// Wilson score interval at the given normal quantile (1.96 for 95%).
Rate wilson(Index hits, Index trials, double z = 1.959963984540054);

}  // namespace fpdp
