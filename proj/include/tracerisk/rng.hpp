// Copyright 2026 The tracerisk Authors
// Use of this source code is governed by the Apache License, Version 2.0,
// which can be found in the LICENSE file.

#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>
#include <vector>

namespace tracerisk {

// splitmix64 (Steele, Lea & Flood 2014), the public-domain reference
// constants. The generator advances by the golden gamma and finalizes with
// the murmur-style mixer. Every sampling helper below is defined purely in
// terms of next(), so integer sequences are bit-identical across platforms
// for a given seed.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Unbiased draw in [0, bound), bound > 0. Rejection on the low residue
  // band; (0 - bound) % bound is 2^64 mod bound under unsigned wraparound.
  std::uint64_t below(std::uint64_t bound) {
    assert(bound > 0);
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      const std::uint64_t r = next();
      if (r >= threshold) return r % bound;
    }
  }

  // Uniform in [0, 1) with 53 random mantissa bits.
  double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Standard normal, basic-form Box-Muller. Consumes exactly two uniforms
  // per call (no spare caching, so the stream position does not depend on
  // call history). u1 is shifted into (0, 1] to keep the log finite.
  double normal() {
    const double u1 = 1.0 - next_double();
    const double u2 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

 private:
  std::uint64_t state_;
};

// Finalizer-only mix, used to derive substream seeds.
inline std::uint64_t mix64(std::uint64_t x) {
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Independent substream seed for (seed, lane). Distinct lanes give
// decorrelated streams; chaining supports multi-index lanes.
inline std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t lane) {
  return mix64(seed + 0x9e3779b97f4a7c15ULL * (lane + 1));
}

inline std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t a,
                                   std::uint64_t b) {
  return derive_stream(derive_stream(seed, a), b);
}

// Partial Fisher-Yates: after the call, items[0..k) is a uniform k-subset of
// the original contents, in random order. For a fixed generator state the
// chosen prefixes are nested in k.
template <typename T>
void partial_shuffle_prefix(std::vector<T>& items, std::size_t k,
                            SplitMix64& rng) {
  const std::size_t n = items.size();
  if (k > n) k = n;
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
    std::swap(items[i], items[j]);
  }
}

// Uniform k-subset of [0, n) without replacement.
inline std::vector<std::uint32_t> sample_without_replacement(
    std::uint32_t n, std::uint32_t k, SplitMix64& rng) {
  std::vector<std::uint32_t> idx(n);
  for (std::uint32_t i = 0; i < n; ++i) idx[i] = i;
  partial_shuffle_prefix(idx, k, rng);
  idx.resize(k < n ? k : n);
  return idx;
}

}  // namespace tracerisk
