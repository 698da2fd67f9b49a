// Copyright 2026 The tracerisk Authors
// Use of this source code is governed by the Apache License, Version 2.0,
// which can be found in the LICENSE file.

#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace tracerisk {

// Static chunked parallel loop. fn(begin, end) must write only to
// position-addressed state, so results are independent of the thread count.
template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
  if (threads <= 1 || n < 2) {
    fn(std::size_t{0}, n);
    return;
  }
  if (threads > n) threads = static_cast<unsigned>(n);
  std::vector<std::thread> pool;
  pool.reserve(threads);
  const std::size_t chunk = (n + threads - 1) / threads;
  for (unsigned t = 0; t < threads; ++t) {
    const std::size_t begin = static_cast<std::size_t>(t) * chunk;
    if (begin >= n) break;
    const std::size_t end = begin + chunk < n ? begin + chunk : n;
    pool.emplace_back([&fn, begin, end] { fn(begin, end); });
  }
  for (auto& th : pool) th.join();
}

}  // namespace tracerisk
