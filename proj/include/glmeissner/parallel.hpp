#pragma once

#include <array>
#include <cstdint>
#include <exception>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace glmeissner {

namespace detail {
// Exceptions must not leave an OpenMP region; the one from the lowest index
// is kept and rethrown after the loop so the error does not depend on timing.
class FirstError {
 public:
  void capture(std::int64_t index) {
#pragma omp critical(glmeissner_first_error)
    if (index < index_) {
      index_ = index;
      error_ = std::current_exception();
    }
  }
  void rethrow() const {
    if (error_) std::rethrow_exception(error_);
  }

 private:
  std::int64_t index_ = INT64_MAX;
  std::exception_ptr error_;
};
}  // namespace detail

void set_num_threads(int n);
int num_threads();

// Sums f(0..n-1) in fixed chunks whose partial sums are added in order, so
// the result does not depend on the thread count.
template <class F>
double deterministic_sum(std::int64_t n, F&& f) {
  constexpr std::int64_t kChunk = 8192;
  const std::int64_t chunks = (n + kChunk - 1) / kChunk;
  std::vector<double> partial(static_cast<size_t>(chunks), 0.0);
  detail::FirstError err;
#pragma omp parallel for schedule(static)
  for (std::int64_t c = 0; c < chunks; ++c) {
    const std::int64_t end = (c + 1) * kChunk < n ? (c + 1) * kChunk : n;
    double s = 0.0;
    try {
      for (std::int64_t i = c * kChunk; i < end; ++i) s += f(i);
    } catch (...) {
      err.capture(c);
    }
    partial[c] = s;
  }
  err.rethrow();
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

// K simultaneous deterministic sums; f(i, acc) adds its terms into acc[0..K).
template <int K, class F>
std::array<double, K> deterministic_sums(std::int64_t n, F&& f) {
  constexpr std::int64_t kChunk = 8192;
  const std::int64_t chunks = (n + kChunk - 1) / kChunk;
  std::vector<std::array<double, K>> partial(static_cast<size_t>(chunks));
  detail::FirstError err;
#pragma omp parallel for schedule(static)
  for (std::int64_t c = 0; c < chunks; ++c) {
    const std::int64_t end = (c + 1) * kChunk < n ? (c + 1) * kChunk : n;
    std::array<double, K> s{};
    try {
      for (std::int64_t i = c * kChunk; i < end; ++i) f(i, s.data());
    } catch (...) {
      err.capture(c);
    }
    partial[c] = s;
  }
  err.rethrow();
  std::array<double, K> total{};
  for (const auto& p : partial)
    for (int k = 0; k < K; ++k) total[k] += p[k];
  return total;
}

template <class F>
void parallel_for(std::int64_t n, F&& f) {
  detail::FirstError err;
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    try {
      f(i);
    } catch (...) {
      err.capture(i);
    }
  }
  err.rethrow();
}

}  // namespace glmeissner
