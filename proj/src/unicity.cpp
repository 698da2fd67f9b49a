// Copyright 2026 The tracerisk Authors
// Use of this source code is governed by the Apache License, Version 2.0,
// which can be found in the LICENSE file.

#include "tracerisk/unicity.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <numeric>
#include <string>

#include "tracerisk/errors.hpp"
#include "tracerisk/parallel.hpp"
#include "tracerisk/rng.hpp"

namespace tracerisk::unicity {

namespace {

// Substream lanes; must stay fixed for reproducibility across versions.
constexpr std::uint64_t kLaneSample = 0x5a;
constexpr std::uint64_t kLaneDraw = 0xd7;

// Bit rows pay off once posting_len * 64 >= n_actors; the small floor keeps
// tiny test indexes exercising both paths without bloating real ones.
std::uint32_t heavy_threshold(std::uint32_t n_actors) {
  return std::max<std::uint32_t>(8, n_actors / 64);
}

// C(k, e) clamped at cap+1 to dodge overflow.
std::uint64_t comb_capped(std::uint64_t k, std::uint64_t e,
                          std::uint64_t cap) {
  if (e > k) return 0;
  if (e > k - e) e = k - e;
  unsigned __int128 c = 1;
  for (std::uint64_t i = 1; i <= e; ++i) {
    c = c * (k - e + i) / i;
    if (c > cap) return cap + 1;
  }
  return static_cast<std::uint64_t>(c);
}

}  // namespace

bool InvertedIndex::contains(std::uint32_t t, std::uint32_t actor) const {
  const std::uint32_t slot = bit_slot[t];
  if (slot != kNoBits) {
    const std::uint64_t word =
        bits[static_cast<std::size_t>(slot) * words + actor / 64];
    return (word >> (actor % 64)) & 1u;
  }
  const auto post = postings(t);
  return std::binary_search(post.begin(), post.end(), actor);
}

InvertedIndex build_index(const logmodel::ProjectedDataset& p) {
  InvertedIndex idx;
  idx.n_actors = p.n_actors();
  const std::uint32_t n_tuples = p.n_tuples();
  idx.offsets.assign(n_tuples + 1, 0);
  for (const std::uint32_t t : p.tuple_ids) ++idx.offsets[t + 1];
  for (std::uint32_t t = 0; t < n_tuples; ++t)
    idx.offsets[t + 1] += idx.offsets[t];
  idx.actors.resize(p.tuple_ids.size());
  std::vector<std::uint32_t> cursor(idx.offsets.begin(),
                                    idx.offsets.end() - 1);
  // Actor-major fill keeps each posting list ascending.
  for (std::uint32_t a = 0; a < idx.n_actors; ++a)
    for (const std::uint32_t t : p.actor_tuples(a))
      idx.actors[cursor[t]++] = a;

  const std::uint32_t threshold = heavy_threshold(idx.n_actors);
  idx.words = (idx.n_actors + 63) / 64;
  idx.bit_slot.assign(n_tuples, InvertedIndex::kNoBits);
  std::uint32_t n_heavy = 0;
  for (std::uint32_t t = 0; t < n_tuples; ++t)
    if (idx.offsets[t + 1] - idx.offsets[t] >= threshold)
      idx.bit_slot[t] = n_heavy++;
  idx.bits.assign(static_cast<std::size_t>(n_heavy) * idx.words, 0);
  for (std::uint32_t t = 0; t < n_tuples; ++t) {
    const std::uint32_t slot = idx.bit_slot[t];
    if (slot == InvertedIndex::kNoBits) continue;
    std::uint64_t* row = idx.bits.data() +
                         static_cast<std::size_t>(slot) * idx.words;
    for (const std::uint32_t a : idx.postings(t))
      row[a / 64] |= std::uint64_t{1} << (a % 64);
  }
  return idx;
}

std::vector<std::uint32_t> candidate_set(const InvertedIndex& idx,
                                         std::span<const std::uint32_t> obs) {
  std::vector<std::uint32_t> out;
  if (obs.empty()) return out;
  std::uint32_t tmin = obs[0];
  for (const std::uint32_t t : obs)
    if (idx.postings(t).size() < idx.postings(tmin).size()) tmin = t;
  for (const std::uint32_t a : idx.postings(tmin)) {
    bool in_all = true;
    for (const std::uint32_t t : obs) {
      if (t == tmin) continue;
      if (!idx.contains(t, a)) {
        in_all = false;
        break;
      }
    }
    if (in_all) out.push_back(a);
  }
  return out;
}

std::uint32_t count_candidates_capped(const InvertedIndex& idx,
                                      std::span<const std::uint32_t> obs,
                                      std::uint32_t cap) {
  if (obs.empty() || cap == 0) return 0;
  std::uint32_t tmin = obs[0];
  bool all_heavy = true;
  for (const std::uint32_t t : obs) {
    if (idx.postings(t).size() < idx.postings(tmin).size()) tmin = t;
    all_heavy = all_heavy && idx.bit_slot[t] != InvertedIndex::kNoBits;
  }
  const std::size_t len_min = idx.postings(tmin).size();

  if (all_heavy && len_min > 256 && obs.size() > 1) {
    // Word-wise AND across bit rows, stopping at the cap.
    std::uint32_t count = 0;
    for (std::uint32_t w = 0; w < idx.words; ++w) {
      std::uint64_t acc = ~std::uint64_t{0};
      for (const std::uint32_t t : obs) {
        acc &= idx.bits[static_cast<std::size_t>(idx.bit_slot[t]) * idx.words +
                        w];
        if (acc == 0) break;
      }
      count += static_cast<std::uint32_t>(std::popcount(acc));
      if (count >= cap) return cap;
    }
    return count;
  }

  // Walk the shortest list, membership-test the rest.
  std::uint32_t count = 0;
  for (const std::uint32_t a : idx.postings(tmin)) {
    bool in_all = true;
    for (const std::uint32_t t : obs) {
      if (t == tmin) continue;
      if (!idx.contains(t, a)) {
        in_all = false;
        break;
      }
    }
    if (in_all && ++count >= cap) return cap;
  }
  return count;
}

std::optional<std::uint32_t> find_tuple(const logmodel::ProjectedDataset& p,
                                        std::span<const std::uint64_t> key) {
  if (key.size() != p.key_stride) return std::nullopt;
  const std::uint32_t n = p.n_tuples();
  for (std::uint32_t t = 0; t < n; ++t) {
    const auto k = p.tuple_key(t);
    if (std::equal(k.begin(), k.end(), key.begin())) return t;
  }
  return std::nullopt;
}

std::vector<std::uint32_t> candidate_set_keys(
    const InvertedIndex& idx, const logmodel::ProjectedDataset& p,
    std::span<const std::uint64_t> keys) {
  if (p.key_stride == 0 || keys.size() % p.key_stride != 0) return {};
  std::vector<std::uint32_t> ids;
  for (std::size_t i = 0; i < keys.size(); i += p.key_stride) {
    const auto t = find_tuple(p, keys.subspan(i, p.key_stride));
    if (!t) return {};
    ids.push_back(*t);
  }
  return candidate_set(idx, ids);
}

namespace {

struct Eligible {
  std::vector<std::uint32_t> actors;
  std::uint32_t n_excluded = 0;
};

Eligible eligible_actors(const logmodel::ProjectedDataset& p,
                         std::uint32_t epsilon,
                         ShortTrajectoryPolicy policy) {
  Eligible e;
  const std::uint32_t need =
      policy == ShortTrajectoryPolicy::exclude ? epsilon : 1;
  const std::uint32_t n = p.n_actors();
  for (std::uint32_t a = 0; a < n; ++a) {
    if (p.tuple_count(a) >= need)
      e.actors.push_back(a);
    else
      ++e.n_excluded;
  }
  return e;
}

}  // namespace

McRun unicity_monte_carlo(const logmodel::ProjectedDataset& p,
                          const InvertedIndex& idx, std::uint32_t epsilon,
                          std::optional<std::uint32_t> m, std::uint64_t seed,
                          ShortTrajectoryPolicy policy, unsigned threads,
                          DrawMode mode) {
  if (epsilon == 0) throw ConfigError("epsilon must be at least 1");
  Eligible elig = eligible_actors(p, epsilon, policy);
  McRun run;
  run.n_eligible = static_cast<std::uint32_t>(elig.actors.size());
  run.n_excluded = elig.n_excluded;
  if (elig.actors.empty())
    throw NoEligibleError(
        "no eligible targets: every actor has fewer than epsilon=" +
        std::to_string(epsilon) + " distinct tuples under the " +
        (policy == ShortTrajectoryPolicy::exclude ? "exclude" : "clamp") +
        " policy");

  if (m && *m == 0) throw ConfigError("sample size must be positive");
  if (m && *m < elig.actors.size()) {
    SplitMix64 sampler(derive_stream(seed, kLaneSample));
    const auto pick = sample_without_replacement(
        static_cast<std::uint32_t>(elig.actors.size()), *m, sampler);
    run.toured.reserve(pick.size());
    for (const std::uint32_t i : pick) run.toured.push_back(elig.actors[i]);
  } else {
    run.toured = std::move(elig.actors);
  }
  run.sample_size = static_cast<std::uint32_t>(run.toured.size());
  run.indicators.assign(run.sample_size, 0);

  parallel_for(run.sample_size, threads, [&](std::size_t begin,
                                             std::size_t end) {
    std::vector<std::uint32_t> scratch;
    for (std::size_t i = begin; i < end; ++i) {
      const std::uint32_t a = run.toured[i];
      const auto tuples = p.actor_tuples(a);
      const std::uint32_t k = static_cast<std::uint32_t>(tuples.size());
      const std::uint32_t eff = std::min(epsilon, k);
      scratch.assign(tuples.begin(), tuples.end());
      if (eff < k) {
        SplitMix64 rng(derive_stream(
            derive_stream(seed, kLaneDraw, a),
            mode == DrawMode::independent ? epsilon : 0));
        partial_shuffle_prefix(scratch, eff, rng);
      }
      const std::span<const std::uint32_t> obs(scratch.data(), eff);
      run.indicators[i] = count_candidates_capped(idx, obs, 2) == 1 ? 1 : 0;
    }
  });

  std::uint64_t unique = 0;
  for (const std::uint8_t b : run.indicators) unique += b;
  run.unicity = static_cast<double>(unique) /
                static_cast<double>(run.sample_size);
  return run;
}

double unicity_exact(const logmodel::ProjectedDataset& p,
                     const InvertedIndex& idx, std::uint32_t epsilon,
                     std::uint64_t budget, ShortTrajectoryPolicy policy) {
  if (epsilon == 0) throw ConfigError("epsilon must be at least 1");
  const Eligible elig = eligible_actors(p, epsilon, policy);
  if (elig.actors.empty())
    throw NoEligibleError("no eligible targets for exact unicity");

  std::uint64_t total = 0;
  for (const std::uint32_t a : elig.actors) {
    const std::uint32_t k = p.tuple_count(a);
    const std::uint32_t eff = std::min(epsilon, k);
    total += comb_capped(k, eff, budget);
    if (total > budget)
      throw BudgetError("exact unicity would enumerate more than " +
                        std::to_string(budget) +
                        " subsets; use the Monte Carlo estimator");
  }

  double acc = 0.0;
  std::vector<std::uint32_t> obs;
  for (const std::uint32_t a : elig.actors) {
    const auto tuples = p.actor_tuples(a);
    const std::uint32_t k = static_cast<std::uint32_t>(tuples.size());
    const std::uint32_t eff = std::min(epsilon, k);
    std::uint64_t unique = 0, subsets = 0;
    // Odometer over index combinations.
    std::vector<std::uint32_t> c(eff);
    std::iota(c.begin(), c.end(), 0);
    for (;;) {
      obs.clear();
      for (const std::uint32_t i : c) obs.push_back(tuples[i]);
      unique += count_candidates_capped(idx, obs, 2) == 1 ? 1 : 0;
      ++subsets;
      std::int32_t j = static_cast<std::int32_t>(eff) - 1;
      while (j >= 0 && c[j] == k - eff + j) --j;
      if (j < 0) break;
      ++c[j];
      for (std::uint32_t l = j + 1; l < eff; ++l) c[l] = c[l - 1] + 1;
    }
    acc += static_cast<double>(unique) / static_cast<double>(subsets);
  }
  return acc / static_cast<double>(elig.actors.size());
}

std::pair<double, double> bootstrap_ci(
    std::span<const std::uint8_t> indicators, std::uint32_t reps,
    std::uint64_t seed) {
  const std::size_t n = indicators.size();
  if (n == 0 || reps == 0) return {0.0, 0.0};
  SplitMix64 rng(seed);
  std::vector<double> means(reps);
  for (std::uint32_t r = 0; r < reps; ++r) {
    std::uint64_t sum = 0;
    for (std::size_t i = 0; i < n; ++i) sum += indicators[rng.below(n)];
    means[r] = static_cast<double>(sum) / static_cast<double>(n);
  }
  std::sort(means.begin(), means.end());
  auto quantile = [&](double q) {
    const double h = q * static_cast<double>(reps - 1);
    const std::size_t lo = static_cast<std::size_t>(h);
    if (lo + 1 >= reps) return means[reps - 1];
    return means[lo] + (h - static_cast<double>(lo)) * (means[lo + 1] -
                                                        means[lo]);
  };
  return {quantile(0.025), quantile(0.975)};
}

void UnicityConfig::validate() const {
  if (epsilons.empty()) throw ConfigError("unicity: empty epsilon list");
  for (const std::uint32_t e : epsilons)
    if (e == 0) throw ConfigError("unicity: epsilon must be at least 1");
  if (seeds.empty()) throw ConfigError("unicity: empty seed list");
  if (bootstrap_reps < 100)
    throw ConfigError("unicity: bootstrap_reps must be at least 100");
  if (sample_size && *sample_size == 0)
    throw ConfigError("unicity: sample size must be positive or \"all\"");
}

UnicityTable estimate_unicity(
    const logmodel::Dataset& d, const logmodel::QISpec& base,
    std::span<const logmodel::GeneralizationLevel> levels,
    const UnicityConfig& cfg, unsigned threads) {
  cfg.validate();
  if (levels.empty()) throw ConfigError("unicity: empty level list");
  UnicityTable table;
  for (std::size_t li = 0; li < levels.size(); ++li) {
    logmodel::QISpec spec = base;
    spec.level = levels[li];
    const logmodel::ProjectedDataset proj = logmodel::project_dataset(d, spec);
    const InvertedIndex idx = build_index(proj);
    for (const std::uint32_t eps : cfg.epsilons) {
      UnicityRow row;
      row.level = levels[li];
      row.epsilon = eps;
      std::vector<std::uint8_t> pooled;
      for (const std::uint64_t seed : cfg.seeds) {
        const McRun run = unicity_monte_carlo(proj, idx, eps, cfg.sample_size,
                                              seed, cfg.policy, threads);
        row.per_seed.push_back(run.unicity);
        row.n_eligible = run.n_eligible;
        row.n_excluded = run.n_excluded;
        row.m = run.sample_size;
        pooled.insert(pooled.end(), run.indicators.begin(),
                      run.indicators.end());
      }
      row.n_seeds = static_cast<std::uint32_t>(cfg.seeds.size());
      row.mean = std::accumulate(row.per_seed.begin(), row.per_seed.end(),
                                 0.0) /
                 static_cast<double>(row.per_seed.size());
      const std::uint64_t boot_seed =
          derive_stream(cfg.seeds[0], 0xb0, li * 64 + eps);
      std::tie(row.ci_low, row.ci_high) =
          bootstrap_ci(pooled, cfg.bootstrap_reps, boot_seed);
      table.rows.push_back(std::move(row));
    }
  }
  return table;
}

}  // namespace tracerisk::unicity
