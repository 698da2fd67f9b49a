// Copyright 2026 The tracerisk Authors
// Use of this source code is governed by the Apache License, Version 2.0,
// which can be found in the LICENSE file.

#include <cmath>
#include <random>
#include <vector>

#include <doctest.h>

#include "tracerisk/errors.hpp"
#include "tracerisk/habitfeat.hpp"

using namespace tracerisk;
using namespace tracerisk::habitfeat;
using logmodel::Timestamp;

namespace {

constexpr std::int64_t kMonday = 1609718400;  // 2021-01-04T00:00:00Z

logmodel::Dataset make_log(
    const std::vector<std::pair<std::string, std::int64_t>>& rows) {
  logmodel::DatasetBuilder b;
  for (const auto& [actor, sec] : rows) b.add_event(actor, {sec});
  return b.finish();
}

std::vector<Timestamp> ts(const std::vector<std::int64_t>& secs) {
  std::vector<Timestamp> out;
  for (const std::int64_t s : secs) out.push_back({s});
  return out;
}

}  // namespace

TEST_CASE("sessions split at the timeout") {
  SessionParams params;  // 1800 / 300
  const auto events = ts({kMonday, kMonday + 1799, kMonday + 1799 + 1800,
                          kMonday + 10000});
  // Gap of 1799 merges, gap of exactly 1800 splits, 10000-1799-1800 splits.
  const auto s = build_sessions(events, params);
  REQUIRE(s.size() == 3);
  CHECK(s[0].n_events == 2);
  CHECK(s[0].duration_s == 1799 + 300);
  CHECK(s[1].n_events == 1);
  CHECK(s[1].duration_s == 300);
  CHECK(s[2].start.sec == kMonday + 10000);

  // The tail never exceeds the timeout.
  SessionParams wide;
  wide.timeout_s = 60;
  wide.tail_cap_s = 500;
  CHECK(build_sessions(ts({kMonday}), wide)[0].duration_s == 60);

  SessionParams bad;
  bad.timeout_s = 0;
  CHECK_THROWS_AS(build_sessions(events, bad), ConfigError);
}

TEST_CASE("a session straddling a window boundary splits its seconds") {
  // [11:55, 12:05) local: 300 s on each side of the noon boundary.
  SessionParams params;
  params.tail_cap_s = 60;
  const auto s = build_sessions(
      ts({kMonday + 11 * 3600 + 55 * 60, kMonday + 12 * 3600 + 4 * 60}),
      params);
  REQUIRE(s.size() == 1);
  CHECK(s[0].duration_s == 600);

  TimeWindowPartition part;
  const auto share = window_proportions(s, part);
  CHECK(share.total == 600.0);
  CHECK(share.p[1] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(share.p[2] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("a session crossing midnight lands in both days' windows") {
  // [23:58, 00:08) local: 120 s overnight, 480 s morning.
  SessionParams params;
  params.tail_cap_s = 0;
  const auto s = build_sessions(
      ts({kMonday + 23 * 3600 + 58 * 60, kMonday + 24 * 3600 + 8 * 60}),
      params);
  REQUIRE(s.size() == 1);

  TimeWindowPartition part;
  const auto share = window_proportions(s, part);
  CHECK(share.total == 600.0);
  CHECK(share.p[3] == doctest::Approx(120.0 / 600.0).epsilon(1e-12));
  CHECK(share.p[0] == doctest::Approx(480.0 / 600.0).epsilon(1e-12));
}

TEST_CASE("window proportions always sum to one") {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<std::int64_t> start(kMonday,
                                                    kMonday + 30 * 86400);
  std::uniform_int_distribution<std::int64_t> dur(1, 3 * 86400);
  for (const int tz : {0, -300, 330, 720, -720}) {
    TimeWindowPartition part;
    part.tz_offset_min = tz;
    for (int trial = 0; trial < 300; ++trial) {
      std::vector<Session> sessions;
      const int k = 1 + static_cast<int>(rng() % 4);
      for (int i = 0; i < k; ++i) {
        Session s;
        s.start = {start(rng)};
        s.last = s.start;
        s.duration_s = dur(rng);
        sessions.push_back(s);
      }
      const auto share = window_proportions(sessions, part);
      CHECK(share.p[0] + share.p[1] + share.p[2] + share.p[3] ==
            doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("entropy formula: pinned values and range") {
  CHECK(habit_entropy({1, 0, 0, 0}) == 0.0);
  CHECK(habit_entropy({0.25, 0.25, 0.25, 0.25}) ==
        doctest::Approx(2.0).epsilon(1e-12));
  CHECK(habit_entropy({0.5, 0.25, 0.25, 0}) ==
        doctest::Approx(1.5).epsilon(1e-12));
  CHECK(habit_entropy({0.5, 0.5, 0, 0}) ==
        doctest::Approx(1.0).epsilon(1e-12));

  std::mt19937_64 rng(32);
  for (int i = 0; i < 20000; ++i) {
    std::exponential_distribution<double> exp_dist(1.0);
    std::array<double, 4> p{};
    double total = 0;
    for (double& v : p) total += (v = exp_dist(rng));
    for (double& v : p) v /= total;
    const double h = habit_entropy(p);
    CHECK(h >= 0.0);
    CHECK(h <= 2.0 + 1e-12);
  }
}

TEST_CASE("feature extraction: hand-computed actor") {
  // Monday 09:00 and 09:10, Tuesday 10:00, Saturday 12:00.
  const std::int64_t sat = kMonday + 5 * 86400;
  const logmodel::Dataset d = make_log({
      {"u1", kMonday + 9 * 3600},
      {"u1", kMonday + 9 * 3600 + 600},
      {"u1", kMonday + 86400 + 10 * 3600},
      {"u1", sat + 12 * 3600},
      {"u2", kMonday},  // single event: dropped
  });
  TimeWindowPartition part;
  SessionParams params;
  const FeatureMatrix fm = extract_features(d, part, params);

  REQUIRE(fm.actor_ids.size() == 1);
  CHECK(fm.actor_ids[0] == "u1");
  CHECK(fm.n_dropped == 1);
  REQUIRE(fm.columns.size() == 9);

  const auto v = [&](const char* name) {
    const Eigen::Index c = fm.col(name);
    REQUIRE(c >= 0);
    return fm.values(0, c);
  };
  CHECK(v("active_days") == 3.0);
  CHECK(v("events_per_active_day") ==
        doctest::Approx(4.0 / 3.0).epsilon(1e-12));
  CHECK(v("session_count") == 3.0);
  // Durations: (600+300) + 300 + 300.
  CHECK(v("mean_session_duration_s") ==
        doctest::Approx(500.0).epsilon(1e-12));
  // Gaps: Tue 10:00 - Mon 09:10 = 89400; Sat 12:00 - Tue 10:00 = 352800.
  CHECK(v("mean_intersession_gap_s") ==
        doctest::Approx(221100.0).epsilon(1e-12));
  CHECK(v("median_intersession_gap_s") ==
        doctest::Approx(221100.0).epsilon(1e-12));
  CHECK(v("weekday_event_fraction") ==
        doctest::Approx(0.75).epsilon(1e-12));
  // First local hours 9, 10, 12: population sd = sqrt(14)/3.
  CHECK(v("first_event_hour_sd") ==
        doctest::Approx(std::sqrt(14.0) / 3.0).epsilon(1e-12));
  CHECK(v("study_span_days") == 6.0);
  CHECK(fm.gap_imputed[0] == 0);
}

TEST_CASE("timezone shifts move events to the local day") {
  // 00:30 UTC Monday is Sunday 23:30 at UTC-01:00.
  const logmodel::Dataset d = make_log({
      {"u1", kMonday + 30 * 60},
      {"u1", kMonday + 86400 + 30 * 60},
  });
  TimeWindowPartition part;
  part.tz_offset_min = -60;
  const FeatureMatrix fm = extract_features(d, part, SessionParams{});
  const auto v = [&](const char* name) { return fm.values(0, fm.col(name)); };
  CHECK(v("weekday_event_fraction") == 0.5);  // Sunday + Monday
  CHECK(v("active_days") == 2.0);
  CHECK(v("first_event_hour_sd") == 0.0);  // both at local 23:30
  CHECK(v("study_span_days") == 2.0);
}

TEST_CASE("single-session actors take the cohort median gap") {
  // u1 gaps: mean 4000; u3 gaps: mean 6000, median 6000; u2 has one session.
  const logmodel::Dataset d = make_log({
      {"u1", kMonday},
      {"u1", kMonday + 4000},
      {"u2", kMonday},
      {"u2", kMonday + 60},
      {"u3", kMonday},
      {"u3", kMonday + 5000},
      {"u3", kMonday + 12000},
  });
  const FeatureMatrix fm = extract_features(d, TimeWindowPartition{},
                                            SessionParams{});
  REQUIRE(fm.actor_ids.size() == 3);
  CHECK(fm.gap_imputed[0] == 0);
  CHECK(fm.gap_imputed[1] == 1);
  CHECK(fm.gap_imputed[2] == 0);

  const Eigen::Index mean_col = fm.col("mean_intersession_gap_s");
  // u1: one gap of 4000. u3: gaps 5000 and 7000, mean 6000.
  CHECK(fm.values(0, mean_col) == 4000.0);
  CHECK(fm.values(2, mean_col) == 6000.0);
  // u2 imputed with the median of {4000, 6000} -> 5000.
  CHECK(fm.values(1, mean_col) == 5000.0);
}

TEST_CASE("per-actor entropy: session and count modes") {
  const std::int64_t sat = kMonday + 5 * 86400;
  const logmodel::Dataset d = make_log({
      {"u1", kMonday + 9 * 3600},
      {"u1", kMonday + 9 * 3600 + 600},
      {"u1", kMonday + 86400 + 10 * 3600},
      {"u1", sat + 12 * 3600},
  });
  TimeWindowPartition part;
  SessionParams params;

  const EntropyVector session_mode =
      habit_entropy_by_actor(d, part, params, DurationMode::session);
  REQUIRE(session_mode.actor_ids.size() == 1);
  // Session seconds: afternoon 900+300, evening 300 -> p = (0,.8,.2,0).
  CHECK(session_mode.proportions[0][1] ==
        doctest::Approx(0.8).epsilon(1e-12));
  CHECK(session_mode.entropy[0] ==
        doctest::Approx(-(0.8 * std::log2(0.8) + 0.2 * std::log2(0.2)))
            .epsilon(1e-12));

  const EntropyVector count_mode =
      habit_entropy_by_actor(d, part, params, DurationMode::count);
  // Events: 3 afternoon, 1 evening.
  CHECK(count_mode.proportions[0][1] ==
        doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("entropy drops zero-weight actors") {
  SessionParams params;
  params.tail_cap_s = 0;  // single-event sessions get zero duration
  const logmodel::Dataset d = make_log({
      {"u1", kMonday},
      {"u1", kMonday + 7200},  // two sessions, both zero-length
      {"u2", kMonday},
      {"u2", kMonday + 60},  // one 60-second session
  });
  const EntropyVector ev =
      habit_entropy_by_actor(d, TimeWindowPartition{}, params);
  REQUIRE(ev.actor_ids.size() == 1);
  CHECK(ev.actor_ids[0] == "u2");
  CHECK(ev.n_dropped == 1);
}

TEST_CASE("partition validation") {
  TimeWindowPartition bad;
  bad.bounds_min = {0, 300, 300, 1020, 1440};
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad.bounds_min = {0, 300, 720, 1020, 1439};
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad.bounds_min = {10, 300, 720, 1020, 1440};
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}
