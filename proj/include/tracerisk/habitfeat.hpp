// Copyright 2026 The tracerisk Authors
// Use of this source code is governed by the Apache License, Version 2.0,
// which can be found in the LICENSE file.

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tracerisk/logmodel.hpp"

namespace tracerisk::habitfeat {

// Partition of the local day into four windows, window w spanning local
// minutes [bounds_min[w], bounds_min[w+1]). The defaults follow common
// study-time conventions: morning 00:00-04:59, afternoon 05:00-11:59,
// evening 12:00-16:59, overnight 17:00-23:59.
struct TimeWindowPartition {
  std::array<int, 5> bounds_min = {0, 300, 720, 1020, 1440};
  std::array<std::string, 4> labels = {"morning", "afternoon", "evening",
                                       "overnight"};
  int tz_offset_min = 0;

  void validate() const;  // throws ConfigError
};

struct SessionParams {
  std::int64_t timeout_s = 1800;
  std::int64_t tail_cap_s = 300;

  void validate() const;  // throws ConfigError
};

// A maximal run of events with consecutive gaps below timeout_s. The
// duration adds a capped tail for the unobserved time after the last event.
struct Session {
  logmodel::Timestamp start;  // first event
  logmodel::Timestamp last;   // last event
  std::int64_t duration_s = 0;
  std::uint32_t n_events = 0;
};

// events must be sorted ascending (a Dataset invariant).
std::vector<Session> build_sessions(std::span<const logmodel::Timestamp> events,
                                    const SessionParams& params);

struct WindowShare {
  std::array<double, 4> p = {0, 0, 0, 0};
  double total = 0;  // seconds (session mode) or events (count mode)
};

// Session-seconds per window: each session interval [start, start+duration)
// is cut at local window and day boundaries, so a session spanning a
// boundary contributes to both sides. Exact integer apportioning.
WindowShare window_proportions(std::span<const Session> sessions,
                               const TimeWindowPartition& partition);

// Event counts per window (the count duration mode).
WindowShare window_event_counts(std::span<const logmodel::Timestamp> events,
                                const TimeWindowPartition& partition);

// Shannon entropy, log base 2, of a distribution over the four windows.
// Zero-probability windows contribute nothing; the result sits in [0, 2].
double habit_entropy(const std::array<double, 4>& p);

enum class DurationMode : std::uint8_t { session, count };

struct FeatureColumn {
  std::string name;
  std::string definition;
};

// Per-actor behavioral features computed from timestamps alone. Actors with
// fewer than two events are dropped. gap_imputed flags rows whose
// inter-session gap columns were filled with the cohort median because the
// actor has a single session.
struct FeatureMatrix {
  std::vector<std::string> actor_ids;
  std::vector<FeatureColumn> columns;
  Eigen::MatrixXd values;  // actor_ids.size() x columns.size()
  std::vector<std::uint8_t> gap_imputed;
  std::uint32_t n_dropped = 0;

  Eigen::Index col(std::string_view name) const;  // -1 when absent
};

FeatureMatrix extract_features(const logmodel::Dataset& d,
                               const TimeWindowPartition& partition,
                               const SessionParams& params);

// Per-actor habit entropy (the regression response). Drops actors with
// fewer than two events or zero total weight; n_dropped counts them.
struct EntropyVector {
  std::vector<std::string> actor_ids;
  Eigen::VectorXd entropy;
  std::vector<std::array<double, 4>> proportions;
  std::uint32_t n_dropped = 0;
};

EntropyVector habit_entropy_by_actor(const logmodel::Dataset& d,
                                     const TimeWindowPartition& partition,
                                     const SessionParams& params,
                                     DurationMode mode = DurationMode::session);

}  // namespace tracerisk::habitfeat
