#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <span>
#include <thread>
#include <vector>

#include "rdlab/errors.hpp"

namespace rdlab {

struct MCEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n_samples = 0;
  std::size_t n_aborted = 0;
};

/// Sample mean and sd/sqrt(n), summed in index order.
MCEstimate summarize(std::span<const double> samples, std::size_t aborted = 0);

struct McConfig {
  std::uint64_t seed = 20240601;
  unsigned threads = 1;
  /// Added to every trajectory id so separate experiments draw disjoint streams.
  std::uint64_t stream_offset = 0;
  double dt = 1e-3;
  double blowup_ceiling = 1e3;
};

/// Runs fn(i) for i < n on `threads` workers. Results are stored by index, so any reduction done
/// afterwards in index order is independent of the thread count.
template <class R, class Fn>
std::vector<R> parallel_map(std::size_t n, unsigned threads, Fn&& fn) {
  std::vector<R> out(n);
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        out[i] = fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(n);
        return;
      }
    }
  };
  const unsigned t = std::max(1U, threads);
  if (t == 1 || n < 2) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(t);
    for (unsigned k = 0; k < t; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);
  return out;
}

/// parallel_map where a blow-up of a trajectory yields an empty slot instead of an exception.
template <class R, class Fn>
std::vector<std::optional<R>> map_trajectories(std::size_t n, unsigned threads, Fn&& fn) {
  return parallel_map<std::optional<R>>(n, threads, [&](std::size_t i) -> std::optional<R> {
    try {
      return fn(i);
    } catch (const BlowUpError&) {
      return std::nullopt;
    }
  });
}

/// Unbiased estimate of (E X)^2 from sum and sum of squares of n >= 2 iid draws.
double unbiased_square_of_mean(double sum, double sum_sq, std::size_t n);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  double r2 = 0.0;
};

/// Weighted least squares y ~ a + b x with weights w (inverse variances).
LinearFit weighted_linear_fit(std::span<const double> x, std::span<const double> y,
                              std::span<const double> w);

/// Largest k with P(Binomial(n, p) > k) >= alpha fails: the number of 3-SE exceedances among n
/// independent comparisons that is still consistent with chance at level alpha.
std::size_t allowed_exceedances(std::size_t n, double p = 0.0027, double alpha = 0.01);

/// Every |z| <= hard_limit and at most allowed_exceedances(n) of them above 3.
bool battery_pass(std::span<const double> z_scores, double hard_limit = 4.0);

}  // namespace rdlab
