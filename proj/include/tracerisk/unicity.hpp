// Copyright 2026 The tracerisk Authors
// Use of this source code is governed by the Apache License, Version 2.0,
// which can be found in the LICENSE file.

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "tracerisk/logmodel.hpp"

namespace tracerisk::unicity {

// Tuple -> ascending actor posting lists, CSR. Tuples whose posting list is
// long also carry a dense bit row so intersections can run word-wise.
struct InvertedIndex {
  std::uint32_t n_actors = 0;
  std::vector<std::uint32_t> offsets;  // n_tuples + 1
  std::vector<std::uint32_t> actors;
  std::uint32_t words = 0;             // u64 words per bit row
  std::vector<std::uint32_t> bit_slot; // tuple -> bit row, or kNoBits
  std::vector<std::uint64_t> bits;

  static constexpr std::uint32_t kNoBits = 0xffffffffu;

  std::uint32_t n_tuples() const {
    return static_cast<std::uint32_t>(offsets.empty() ? 0 : offsets.size() - 1);
  }
  std::span<const std::uint32_t> postings(std::uint32_t t) const {
    return {actors.data() + offsets[t], offsets[t + 1] - offsets[t]};
  }
  bool contains(std::uint32_t t, std::uint32_t actor) const;
};

InvertedIndex build_index(const logmodel::ProjectedDataset& p);

// Exact intersection of the observations' posting lists, ascending actor
// indices. An empty observation list is an error upstream; an observation
// id out of range is undefined.
std::vector<std::uint32_t> candidate_set(const InvertedIndex& idx,
                                         std::span<const std::uint32_t> obs);

// |intersection| with early exit once cap members are found.
std::uint32_t count_candidates_capped(const InvertedIndex& idx,
                                      std::span<const std::uint32_t> obs,
                                      std::uint32_t cap);

// Looks a tuple key up in a projection; nullopt when the key never occurs.
std::optional<std::uint32_t> find_tuple(const logmodel::ProjectedDataset& p,
                                        std::span<const std::uint64_t> key);

// Key-based candidate set: any key absent from the projection yields the
// empty set (an out-of-dataset observation matches nobody).
std::vector<std::uint32_t> candidate_set_keys(
    const InvertedIndex& idx, const logmodel::ProjectedDataset& p,
    std::span<const std::uint64_t> keys);

// Actors with fewer than epsilon distinct tuples are excluded from the
// target population by default; clamp keeps them with all their tuples as
// the observation set.
enum class ShortTrajectoryPolicy : std::uint8_t { exclude, clamp };

// Draw streams per (seed, actor): independent re-draws per epsilon, or
// nested prefixes shared across epsilon values (property tests).
enum class DrawMode : std::uint8_t { independent, nested };

struct McRun {
  double unicity = 0.0;
  std::uint32_t n_eligible = 0;   // eligible actors in the roster
  std::uint32_t n_excluded = 0;   // roster minus eligible
  std::uint32_t sample_size = 0;  // the estimate's denominator
  std::vector<std::uint8_t> indicators;  // per sampled target: 1 if unique
  std::vector<std::uint32_t> toured;     // sampled actor indices
};

// One Monte Carlo run: sample m actors (nullopt = every eligible actor),
// draw epsilon distinct tuples from each, and report the fraction whose
// candidate set is exactly themselves. Deterministic for fixed
// (projection, epsilon, m, seed) at any thread count.
McRun unicity_monte_carlo(
    const logmodel::ProjectedDataset& p, const InvertedIndex& idx,
    std::uint32_t epsilon, std::optional<std::uint32_t> m, std::uint64_t seed,
    ShortTrajectoryPolicy policy = ShortTrajectoryPolicy::exclude,
    unsigned threads = 1, DrawMode mode = DrawMode::independent);

// Exact unicity: per eligible actor, the fraction of its epsilon-subsets
// that single the actor out, averaged over actors. Throws BudgetError when
// the total subset count exceeds budget.
double unicity_exact(
    const logmodel::ProjectedDataset& p, const InvertedIndex& idx,
    std::uint32_t epsilon, std::uint64_t budget = 1000000,
    ShortTrajectoryPolicy policy = ShortTrajectoryPolicy::exclude);

// Percentile bootstrap (2.5 / 97.5) over per-target uniqueness indicators.
std::pair<double, double> bootstrap_ci(std::span<const std::uint8_t> indicators,
                                       std::uint32_t reps, std::uint64_t seed);

struct UnicityConfig {
  std::vector<std::uint32_t> epsilons = {1, 2, 3, 4, 5, 6, 7, 8};
  std::optional<std::uint32_t> sample_size = 2500;  // nullopt = all eligible
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  std::uint32_t bootstrap_reps = 1000;
  ShortTrajectoryPolicy policy = ShortTrajectoryPolicy::exclude;

  void validate() const;  // throws ConfigError
};

struct UnicityRow {
  logmodel::GeneralizationLevel level;
  std::uint32_t epsilon = 0;
  double mean = 0.0;      // average of per-seed unicity values
  double ci_low = 0.0;    // bootstrap over indicators pooled across seeds
  double ci_high = 0.0;
  std::uint32_t n_eligible = 0;
  std::uint32_t n_excluded = 0;
  std::uint32_t m = 0;        // per-seed sample size actually used
  std::uint32_t n_seeds = 0;
  std::vector<double> per_seed;
};

struct UnicityTable {
  std::vector<UnicityRow> rows;  // level-major, then epsilon ascending
};

// The full sweep: for each level and epsilon, the mean unicity over the
// configured seeds plus a bootstrap interval. attrs in `base` apply at
// every level.
UnicityTable estimate_unicity(
    const logmodel::Dataset& d, const logmodel::QISpec& base,
    std::span<const logmodel::GeneralizationLevel> levels,
    const UnicityConfig& cfg, unsigned threads = 1);

}  // namespace tracerisk::unicity
