#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace aggfem {

/// Calls body(begin, end) on contiguous, statically assigned index ranges
/// covering [0, n), one range per worker. The partition depends only on n and
/// the worker count, and each index is visited by exactly one worker, so any
/// body that writes only to its own indices produces results independent of
/// scheduling. The first exception thrown by a worker is rethrown.
template <class Body>
void parallel_for_ranges(std::size_t n, int workers, Body&& body) {
  const std::size_t w = std::clamp<std::size_t>(workers < 1 ? 1 : workers, 1, std::max<std::size_t>(n, 1));
  if (w == 1) {
    body(std::size_t{0}, n);
    return;
  }
  std::vector<std::exception_ptr> errors(w);
  std::vector<std::thread> pool;
  pool.reserve(w - 1);
  auto run = [&](std::size_t k) {
    const std::size_t begin = n * k / w;
    const std::size_t end = n * (k + 1) / w;
    try {
      body(begin, end);
    } catch (...) {
      errors[k] = std::current_exception();
    }
  };
  for (std::size_t k = 1; k < w; ++k) pool.emplace_back(run, k);
  run(0);
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace aggfem
