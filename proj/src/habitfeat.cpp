// Copyright 2026 The tracerisk Authors
// Use of this source code is governed by the Apache License, Version 2.0,
// which can be found in the LICENSE file.

#include "tracerisk/habitfeat.hpp"

#include <algorithm>
#include <cmath>

#include "tracerisk/errors.hpp"
#include "tracerisk/timeutil.hpp"

namespace tracerisk::habitfeat {

using timeutil::floor_div;
using timeutil::floor_mod;

void TimeWindowPartition::validate() const {
  if (bounds_min.front() != 0 || bounds_min.back() != 1440)
    throw ConfigError("window partition must cover the full day");
  for (int w = 0; w < 4; ++w)
    if (bounds_min[w] >= bounds_min[w + 1])
      throw ConfigError("window bounds must be strictly increasing");
}

void SessionParams::validate() const {
  if (timeout_s <= 0) throw ConfigError("session timeout must be positive");
  if (tail_cap_s < 0) throw ConfigError("session tail cap cannot be negative");
}

std::vector<Session> build_sessions(std::span<const logmodel::Timestamp> events,
                                    const SessionParams& params) {
  params.validate();
  std::vector<Session> out;
  if (events.empty()) return out;
  const std::int64_t tail = std::min(params.tail_cap_s, params.timeout_s);
  Session cur{events[0], events[0], 0, 1};
  for (std::size_t i = 1; i < events.size(); ++i) {
    if (events[i].sec - cur.last.sec < params.timeout_s) {
      cur.last = events[i];
      ++cur.n_events;
    } else {
      cur.duration_s = cur.last.sec - cur.start.sec + tail;
      out.push_back(cur);
      cur = Session{events[i], events[i], 0, 1};
    }
  }
  cur.duration_s = cur.last.sec - cur.start.sec + tail;
  out.push_back(cur);
  return out;
}

namespace {

// Adds the local-time interval [a, b) to the per-window totals, cutting at
// window boundaries. All arithmetic in integer seconds, so the chunks sum
// exactly to b - a.
void apportion_local(std::int64_t a, std::int64_t b,
                     const TimeWindowPartition& part,
                     std::array<std::int64_t, 4>& acc) {
  std::int64_t t = a;
  while (t < b) {
    const std::int64_t sod = floor_mod(t, 86400);
    const std::int64_t day_start = t - sod;
    int w = 0;
    while (sod >= static_cast<std::int64_t>(part.bounds_min[w + 1]) * 60) ++w;
    const std::int64_t window_end =
        day_start + static_cast<std::int64_t>(part.bounds_min[w + 1]) * 60;
    const std::int64_t chunk_end = std::min(b, window_end);
    acc[w] += chunk_end - t;
    t = chunk_end;
  }
}

int window_of(std::int64_t local_sod_sec, const TimeWindowPartition& part) {
  int w = 0;
  while (local_sod_sec >= static_cast<std::int64_t>(part.bounds_min[w + 1]) * 60)
    ++w;
  return w;
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  if (n == 0) return 0.0;
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

WindowShare window_proportions(std::span<const Session> sessions,
                               const TimeWindowPartition& partition) {
  partition.validate();
  const std::int64_t off = static_cast<std::int64_t>(partition.tz_offset_min) *
                           60;
  std::array<std::int64_t, 4> acc = {0, 0, 0, 0};
  for (const Session& s : sessions) {
    const std::int64_t a = s.start.sec + off;
    apportion_local(a, a + s.duration_s, partition, acc);
  }
  WindowShare share;
  const std::int64_t total = acc[0] + acc[1] + acc[2] + acc[3];
  share.total = static_cast<double>(total);
  if (total > 0)
    for (int w = 0; w < 4; ++w)
      share.p[w] = static_cast<double>(acc[w]) / static_cast<double>(total);
  return share;
}

WindowShare window_event_counts(std::span<const logmodel::Timestamp> events,
                                const TimeWindowPartition& partition) {
  partition.validate();
  const std::int64_t off = static_cast<std::int64_t>(partition.tz_offset_min) *
                           60;
  std::array<std::int64_t, 4> acc = {0, 0, 0, 0};
  for (const logmodel::Timestamp t : events)
    ++acc[window_of(floor_mod(t.sec + off, 86400), partition)];
  WindowShare share;
  const std::int64_t total = acc[0] + acc[1] + acc[2] + acc[3];
  share.total = static_cast<double>(total);
  if (total > 0)
    for (int w = 0; w < 4; ++w)
      share.p[w] = static_cast<double>(acc[w]) / static_cast<double>(total);
  return share;
}

double habit_entropy(const std::array<double, 4>& p) {
  double h = 0.0;
  for (const double q : p)
    if (q > 0.0) h -= q * std::log2(q);
  return h < 0.0 ? 0.0 : h;
}

Eigen::Index FeatureMatrix::col(std::string_view name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i].name == name) return static_cast<Eigen::Index>(i);
  return -1;
}

FeatureMatrix extract_features(const logmodel::Dataset& d,
                               const TimeWindowPartition& partition,
                               const SessionParams& params) {
  partition.validate();
  params.validate();
  const std::int64_t off = static_cast<std::int64_t>(partition.tz_offset_min) *
                           60;

  FeatureMatrix fm;
  fm.columns = {
      {"active_days",
       "count of distinct local calendar days with at least one event"},
      {"events_per_active_day", "event count divided by active-day count"},
      {"session_count",
       "sessions per actor; a gap of timeout_s or more starts a new session"},
      {"mean_session_duration_s",
       "mean session duration: event span plus min(tail_cap_s, timeout_s)"},
      {"mean_intersession_gap_s",
       "mean idle seconds between consecutive sessions (last event to next "
       "first event); single-session actors take the cohort median, flagged"},
      {"median_intersession_gap_s",
       "median idle seconds between consecutive sessions; single-session "
       "actors take the cohort median, flagged"},
      {"weekday_event_fraction",
       "fraction of events falling on a local Monday through Friday"},
      {"first_event_hour_sd",
       "population standard deviation, over active days, of the local "
       "fractional hour of the day's first event"},
      {"study_span_days",
       "inclusive local-day span between the first and last event"},
  };
  const Eigen::Index n_cols = static_cast<Eigen::Index>(fm.columns.size());

  struct Row {
    std::uint32_t actor;
    std::array<double, 9> v;
    bool gap_known;
    double mean_gap, median_gap;
  };
  std::vector<Row> rows;
  std::vector<double> cohort_mean_gaps, cohort_median_gaps;

  const std::uint32_t n = d.n_actors();
  std::vector<double> gaps, first_hours;
  for (std::uint32_t a = 0; a < n; ++a) {
    const auto& ev = d.events(a).ts;
    if (ev.size() < 2) {
      ++fm.n_dropped;
      continue;
    }
    const auto sessions = build_sessions(ev, params);

    std::int64_t prev_day = 0;
    std::uint64_t active_days = 0, weekday_events = 0;
    first_hours.clear();
    for (std::size_t i = 0; i < ev.size(); ++i) {
      const std::int64_t local = ev[i].sec + off;
      const std::int64_t day = floor_div(local, 86400);
      if (i == 0 || day != prev_day) {
        ++active_days;
        first_hours.push_back(static_cast<double>(floor_mod(local, 86400)) /
                              3600.0);
        prev_day = day;
      }
      if (floor_mod(day + 3, 7) <= 4) ++weekday_events;  // epoch day 0: Thu
    }

    gaps.clear();
    double dur_sum = 0.0;
    for (std::size_t i = 0; i < sessions.size(); ++i) {
      dur_sum += static_cast<double>(sessions[i].duration_s);
      if (i > 0)
        gaps.push_back(static_cast<double>(sessions[i].start.sec -
                                           sessions[i - 1].last.sec));
    }

    double mean_h = 0.0, mean_h2 = 0.0;
    for (const double h : first_hours) {
      mean_h += h;
      mean_h2 += h * h;
    }
    mean_h /= static_cast<double>(first_hours.size());
    mean_h2 /= static_cast<double>(first_hours.size());
    const double var_h = std::max(0.0, mean_h2 - mean_h * mean_h);

    const std::int64_t first_day = floor_div(ev.front().sec + off, 86400);
    const std::int64_t last_day = floor_div(ev.back().sec + off, 86400);

    Row row;
    row.actor = a;
    row.gap_known = gaps.size() >= 1;
    row.mean_gap = 0.0;
    row.median_gap = 0.0;
    if (row.gap_known) {
      double gsum = 0.0;
      for (const double g : gaps) gsum += g;
      row.mean_gap = gsum / static_cast<double>(gaps.size());
      row.median_gap = median_of(gaps);
      cohort_mean_gaps.push_back(row.mean_gap);
      cohort_median_gaps.push_back(row.median_gap);
    }
    row.v = {
        static_cast<double>(active_days),
        static_cast<double>(ev.size()) / static_cast<double>(active_days),
        static_cast<double>(sessions.size()),
        dur_sum / static_cast<double>(sessions.size()),
        0.0,  // filled below
        0.0,  // filled below
        static_cast<double>(weekday_events) / static_cast<double>(ev.size()),
        std::sqrt(var_h),
        static_cast<double>(last_day - first_day + 1),
    };
    rows.push_back(std::move(row));
  }

  const double impute_mean = median_of(cohort_mean_gaps);
  const double impute_median = median_of(cohort_median_gaps);

  fm.actor_ids.reserve(rows.size());
  fm.gap_imputed.assign(rows.size(), 0);
  fm.values.resize(static_cast<Eigen::Index>(rows.size()), n_cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    Row& row = rows[i];
    if (!row.gap_known) {
      row.v[4] = impute_mean;
      row.v[5] = impute_median;
      fm.gap_imputed[i] = 1;
    } else {
      row.v[4] = row.mean_gap;
      row.v[5] = row.median_gap;
    }
    fm.actor_ids.push_back(d.actor_id(row.actor));
    for (Eigen::Index j = 0; j < n_cols; ++j)
      fm.values(static_cast<Eigen::Index>(i), j) = row.v[j];
  }
  return fm;
}

EntropyVector habit_entropy_by_actor(const logmodel::Dataset& d,
                                     const TimeWindowPartition& partition,
                                     const SessionParams& params,
                                     DurationMode mode) {
  partition.validate();
  params.validate();
  EntropyVector out;
  std::vector<double> ent;
  const std::uint32_t n = d.n_actors();
  for (std::uint32_t a = 0; a < n; ++a) {
    const auto& ev = d.events(a).ts;
    if (ev.size() < 2) {
      ++out.n_dropped;
      continue;
    }
    WindowShare share;
    if (mode == DurationMode::session) {
      const auto sessions = build_sessions(ev, params);
      share = window_proportions(sessions, partition);
    } else {
      share = window_event_counts(ev, partition);
    }
    if (share.total <= 0) {
      ++out.n_dropped;
      continue;
    }
    out.actor_ids.push_back(d.actor_id(a));
    out.proportions.push_back(share.p);
    ent.push_back(habit_entropy(share.p));
  }
  out.entropy = Eigen::Map<const Eigen::VectorXd>(
      ent.data(), static_cast<Eigen::Index>(ent.size()));
  return out;
}

}  // namespace tracerisk::habitfeat
