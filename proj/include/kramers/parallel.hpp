#pragma once

#include <algorithm>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace kramers {

// Worker count: KRAMERS_ZPF_THREADS if set and positive, else the hardware
// concurrency (at least 1).
inline unsigned thread_budget() {
  if (const char* env = std::getenv("KRAMERS_ZPF_THREADS")) {
    const long n = std::strtol(env, nullptr, 10);
    if (n > 0) return static_cast<unsigned>(n);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

// Runs body(i) for i in [0, n). Results must be written to disjoint,
// index-addressed slots; with per-index RNG streams the output is identical
// for any thread count.
template <typename Body>
void parallel_for(std::size_t n, Body&& body) {
  const unsigned workers = std::min<std::size_t>(thread_budget(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

} // namespace kramers
