#pragma once

#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace diraclab {

inline constexpr double pi = 3.141592653589793238462643383279502884;

// Bad inputs / violated preconditions. CLI maps this to exit code 2.
struct validation_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Runtime numerical failures (norm drift, truncation leak, lost weight...).
// CLI maps this to exit code 3.
struct numerical_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

// Chunked parallel loop over [0, n). Results must be written to disjoint
// slots so the output is identical regardless of thread count; `serial`
// forces single-threaded execution.
template <typename Fn>
void parallel_for(std::size_t n, const Fn& fn, bool serial = false) {
  unsigned hw = std::thread::hardware_concurrency();
  if (serial || hw <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  unsigned workers = hw < n ? hw : static_cast<unsigned>(n);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace detail
}  // namespace diraclab
