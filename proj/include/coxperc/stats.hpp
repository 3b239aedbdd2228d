#pragma once

// Small estimators and the deterministic replicate runner.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <utility>
#include <vector>

namespace coxperc {

struct Exec {
  int threads = 1;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Wilson score interval for a binomial proportion.
Interval wilson(std::int64_t hits, std::int64_t n, double z = 1.96);

struct Proportion {
  std::int64_t hits = 0;
  std::int64_t n = 0;

  double estimate() const { return n > 0 ? static_cast<double>(hits) / static_cast<double>(n) : 0.0; }
  /// Plain binomial standard error sqrt(p(1-p)/n).
  double se() const {
    if (n <= 0) return 0.0;
    const double p = estimate();
    return std::sqrt(p * (1.0 - p) / static_cast<double>(n));
  }
  Interval ci(double z = 1.96) const { return wilson(hits, n, z); }
};

Proportion count_true(const std::vector<char>& flags);

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
  std::int64_t n = 0;
};

/// Sample mean and standard error, summed in index order so the result
/// does not depend on how the values were produced.
MeanSe mean_se(const std::vector<double>& xs);

/// Evaluate f(i) for i in [0, n) on `threads` workers. Results are stored by
/// index, so the output is identical for any thread count.
template <class F>
auto run_replicates(std::size_t n, int threads, F&& f) -> std::vector<decltype(f(std::size_t{}))> {
  using R = decltype(f(std::size_t{}));
  std::vector<R> out(n);
  const int workers = std::max(1, std::min<int>(threads, static_cast<int>(std::max<std::size_t>(n, 1))));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) out[i] = f(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        out[i] = f(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mu);
        if (!failure) failure = std::current_exception();
        next.store(n);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int t = 0; t < workers; ++t) pool.emplace_back(work);
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

/// Trapezoid rule over (x, y) pairs sorted by x.
double trapezoid(const std::vector<double>& x, const std::vector<double>& y);

/// Gauss-Legendre quadrature of f on [a, b] with `panels` equal sub-intervals.
template <class F>
double gauss_legendre(F&& f, double a, double b, int panels = 1) {
  static constexpr double xs[8] = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290, -0.1834346424956498,
                                   0.1834346424956498,  0.5255324099163290,  0.7966664774136267,  0.9602898564975363};
  static constexpr double ws[8] = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873, 0.3626837833783620,
                                   0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};
  if (!(b > a)) return 0.0;
  const double step = (b - a) / panels;
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * step;
    const double half = 0.5 * step, mid = lo + half;
    for (int k = 0; k < 8; ++k) total += ws[k] * f(mid + half * xs[k]);
  }
  return total * 0.5 * step;
}

}  // namespace coxperc
