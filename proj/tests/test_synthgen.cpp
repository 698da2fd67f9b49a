// Copyright 2026 The tracerisk Authors
// Use of this source code is governed by the Apache License, Version 2.0,
// which can be found in the LICENSE file.

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>

#include "oracles.hpp"
#include "tracerisk/errors.hpp"
#include "tracerisk/synthgen.hpp"
#include "tracerisk/timeutil.hpp"

using namespace tracerisk;
using namespace tracerisk::synthgen;

namespace {

std::vector<std::int64_t> raw_ts(const logmodel::Dataset& d,
                                 std::uint32_t a) {
  std::vector<std::int64_t> out;
  for (const auto& t : d.events(a).ts) out.push_back(t.sec);
  return out;
}

// The roster is sorted, so a binary search finds an id's index.
std::optional<std::uint32_t> find_actor(const logmodel::Dataset& d,
                                        const std::string& id) {
  const auto& ids = d.actor_ids();
  const auto it = std::lower_bound(ids.begin(), ids.end(), id);
  if (it == ids.end() || *it != id) return std::nullopt;
  return static_cast<std::uint32_t>(it - ids.begin());
}

}  // namespace

TEST_CASE("log generation is deterministic per seed") {
  LogGenConfig cfg;
  cfg.n_actors = 40;
  cfg.events_min = 5;
  cfg.events_max = 30;
  cfg.twin_pairs = 3;
  cfg.seed = 99;
  const GeneratedLog g1 = gen_event_log(cfg);
  const GeneratedLog g2 = gen_event_log(cfg);
  REQUIRE(g1.dataset.n_actors() == 40);
  REQUIRE(g2.dataset.n_actors() == 40);
  for (std::uint32_t a = 0; a < 40; ++a) {
    CHECK(g1.dataset.actor_id(a) == g2.dataset.actor_id(a));
    CHECK(raw_ts(g1.dataset, a) == raw_ts(g2.dataset, a));
  }
  CHECK(g1.manifest.event_counts == g2.manifest.event_counts);
  CHECK(g1.manifest.twins == g2.manifest.twins);

  cfg.seed = 100;
  const GeneratedLog g3 = gen_event_log(cfg);
  bool any_diff = false;
  for (std::uint32_t a = 0; a < 40 && !any_diff; ++a)
    any_diff = raw_ts(g1.dataset, a) != raw_ts(g3.dataset, a);
  CHECK(any_diff);
}

TEST_CASE("the manifest mirrors the generated log") {
  LogGenConfig cfg;
  cfg.n_actors = 25;
  cfg.events_min = 3;
  cfg.events_max = 12;
  cfg.twin_pairs = 4;
  cfg.seed = 7;
  const GeneratedLog g = gen_event_log(cfg);

  REQUIRE(g.manifest.event_counts.size() == 25);
  for (std::uint32_t a = 0; a < 25; ++a) {
    const auto n = g.dataset.events(a).ts.size();
    CHECK(g.manifest.event_counts[a] == n);
    CHECK(n >= 3);
    CHECK(n <= 12);
  }
  REQUIRE(g.manifest.twins.size() == 4);
  CHECK(g.manifest.twins[0] == std::make_pair(std::string("a0001"),
                                              std::string("a0002")));
  for (const auto& [ida, idb] : g.manifest.twins)
    CHECK(find_actor(g.dataset, ida).has_value());

  const nlohmann::json j = g.manifest.to_json();
  CHECK(j["generator"]["name"].get<std::string>().find("-synthgen") !=
        std::string::npos);
  CHECK(j["config"]["n_actors"] == 25);
  CHECK(j["event_counts"].size() == 25);
  CHECK(j["twins"].size() == 4);
}

TEST_CASE("twins share raw timestamps and every projection") {
  LogGenConfig cfg;
  cfg.n_actors = 12;
  cfg.events_min = 8;
  cfg.events_max = 20;
  cfg.twin_pairs = 3;
  cfg.seed = 11;
  const GeneratedLog g = gen_event_log(cfg);

  for (const auto& [ida, idb] : g.manifest.twins) {
    const std::uint32_t a = *find_actor(g.dataset, ida);
    const std::uint32_t b = *find_actor(g.dataset, idb);
    CHECK(raw_ts(g.dataset, a) == raw_ts(g.dataset, b));
  }
  for (const logmodel::Level lvl :
       {logmodel::Level::minute, logmodel::Level::quarter_hour,
        logmodel::Level::hour, logmodel::Level::date}) {
    logmodel::QISpec spec;
    spec.level = {lvl, 0};
    const auto proj = logmodel::project_dataset(g.dataset, spec);
    for (const auto& [ida, idb] : g.manifest.twins) {
      const std::uint32_t a = *find_actor(g.dataset, ida);
      const std::uint32_t b = *find_actor(g.dataset, idb);
      const auto ta = proj.actor_tuples(a);
      const auto tb = proj.actor_tuples(b);
      CHECK(std::vector<std::uint32_t>(ta.begin(), ta.end()) ==
            std::vector<std::uint32_t>(tb.begin(), tb.end()));
    }
  }
}

TEST_CASE("scheduled events stay inside their weekly slots") {
  LogGenConfig cfg;
  cfg.n_actors = 30;
  cfg.events_min = 10;
  cfg.events_max = 40;
  cfg.period_days = 28;
  cfg.mode = LogMode::scheduled;
  cfg.slots = {{0, 540, 90}, {2, 1230, 60}, {5, 60, 120}};
  cfg.seed = 13;
  const GeneratedLog g = gen_event_log(cfg);

  for (std::uint32_t a = 0; a < cfg.n_actors; ++a) {
    for (const auto& t : g.dataset.events(a).ts) {
      CHECK(t.sec >= kBaseEpoch);
      CHECK(t.sec < kBaseEpoch + 28LL * 86400);
      const std::int64_t rel = t.sec - kBaseEpoch;
      const std::int64_t day = timeutil::floor_div(rel, 86400);
      const int dow = static_cast<int>(timeutil::floor_mod(day, 7));
      const int minute = static_cast<int>((rel - day * 86400) / 60);
      bool in_slot = false;
      for (const WeeklySlot& s : cfg.slots)
        in_slot |= dow == s.day_of_week && minute >= s.start_min &&
                   minute < s.start_min + s.duration_min;
      CHECK(in_slot);
    }
  }
}

TEST_CASE("generator config validation") {
  LogGenConfig cfg;
  cfg.n_actors = 4;
  cfg.twin_pairs = 3;  // needs 6 actors
  CHECK_THROWS_AS(gen_event_log(cfg), ConfigError);
  cfg.twin_pairs = 0;
  cfg.events_min = 9;
  cfg.events_max = 3;
  CHECK_THROWS_AS(gen_event_log(cfg), ConfigError);
  cfg.events_min = cfg.events_max = 3;
  cfg.mode = LogMode::scheduled;
  CHECK_THROWS_AS(gen_event_log(cfg), ConfigError);  // no slots
  cfg.slots = {{7, 0, 30}};
  CHECK_THROWS_AS(gen_event_log(cfg), ConfigError);  // bad day
  cfg.slots = {{0, 1400, 60}};
  CHECK_THROWS_AS(gen_event_log(cfg), ConfigError);  // spills past midnight

  RegGenConfig rc;
  rc.beta = {1.0, 2.0};  // p=3 wants 4 values
  CHECK_THROWS_AS(gen_regression_data(rc), ConfigError);
  rc.beta.clear();
  rc.noise_sigma = -0.1;
  CHECK_THROWS_AS(gen_regression_data(rc), ConfigError);
}

TEST_CASE("noiseless regression data recovers the planted coefficients") {
  RegGenConfig cfg;
  cfg.n = 80;
  cfg.p = 3;
  cfg.beta = {0.5, 1.0, -2.0, 3.0};
  cfg.noise_sigma = 0.0;
  cfg.seed = 21;
  const GeneratedReg g = gen_regression_data(cfg);
  REQUIRE(g.design.X.rows() == 80);
  REQUIRE(g.design.X.cols() == 4);
  CHECK(g.design.X.col(0).isConstant(1.0));
  CHECK(g.truth.planted_rows.empty());

  const Eigen::VectorXd beta_hat =
      oracles::weighted_fit_oracle(g.design.X, g.design.y,
                                   Eigen::VectorXd::Ones(80))
          .beta;
  CHECK((beta_hat - g.truth.beta).lpNorm<Eigen::Infinity>() <= 1e-8);
}

TEST_CASE("planted rows carry the largest influence") {
  RegGenConfig cfg;
  cfg.n = 200;
  cfg.p = 2;
  cfg.beta = {0.0, 1.0, 1.0};
  cfg.noise_sigma = 0.5;
  cfg.planted_count = 3;
  cfg.planted_leverage = 5.0;
  cfg.planted_residual = 8.0;
  cfg.seed = 22;
  const GeneratedReg g = gen_regression_data(cfg);
  const Eigen::Index n = g.design.X.rows();
  REQUIRE(n == 203);
  REQUIRE(g.truth.planted_rows == std::vector<std::uint32_t>{200, 201, 202});

  // Slope influence phi_i = (A^-1 x_i e_i)_1, straight from the normal
  // equations.
  const Eigen::MatrixXd a_inv =
      (g.design.X.transpose() * g.design.X)
          .ldlt()
          .solve(Eigen::MatrixXd::Identity(3, 3));
  const Eigen::VectorXd beta_hat =
      a_inv * (g.design.X.transpose() * g.design.y);
  const Eigen::VectorXd e = g.design.y - g.design.X * beta_hat;
  std::vector<std::pair<double, Eigen::Index>> ranked;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXd phi = a_inv * g.design.X.row(i).transpose() * e[i];
    ranked.emplace_back(std::abs(phi[1]), i);
  }
  std::sort(ranked.rbegin(), ranked.rend());
  std::set<Eigen::Index> top = {ranked[0].second, ranked[1].second,
                                ranked[2].second};
  CHECK(top == std::set<Eigen::Index>{200, 201, 202});
}

TEST_CASE("design CSV round-trips bit-exactly") {
  RegGenConfig cfg;
  cfg.n = 37;
  cfg.p = 4;
  cfg.noise_sigma = 1.3;
  cfg.seed = 23;
  const GeneratedReg g = gen_regression_data(cfg);

  std::ostringstream out;
  write_design_csv(g.design, out);
  std::istringstream in(out.str());
  const regress::DesignMatrix back = read_design_csv(in);
  REQUIRE(back.X.rows() == g.design.X.rows());
  REQUIRE(back.X.cols() == g.design.X.cols());
  CHECK(back.names == g.design.names);
  CHECK(back.X == g.design.X);
  CHECK(back.y == g.design.y);
}

TEST_CASE("event logs round-trip through both writers") {
  LogGenConfig cfg;
  cfg.n_actors = 15;
  cfg.events_min = 2;
  cfg.events_max = 9;
  cfg.seed = 24;
  const GeneratedLog g = gen_event_log(cfg);

  logmodel::Schema schema;
  schema.actor_col = "actor";
  schema.ts_col = "ts";

  std::ostringstream csv;
  write_events_csv(g.dataset, csv);
  std::istringstream csv_in(csv.str());
  const logmodel::Dataset d1 = logmodel::parse_events(
      csv_in, schema, logmodel::LogFormat::csv);
  REQUIRE(d1.n_actors() == g.dataset.n_actors());
  for (std::uint32_t a = 0; a < d1.n_actors(); ++a) {
    const auto idx = find_actor(d1, g.dataset.actor_id(a));
    REQUIRE(idx.has_value());
    CHECK(raw_ts(d1, *idx) == raw_ts(g.dataset, a));
  }

  std::ostringstream jsonl;
  write_events_jsonl(g.dataset, jsonl);
  std::istringstream jsonl_in(jsonl.str());
  const logmodel::Dataset d2 = logmodel::parse_events(
      jsonl_in, schema, logmodel::LogFormat::jsonl);
  REQUIRE(d2.n_actors() == g.dataset.n_actors());
  for (std::uint32_t a = 0; a < d2.n_actors(); ++a) {
    const auto idx = find_actor(d2, g.dataset.actor_id(a));
    REQUIRE(idx.has_value());
    CHECK(raw_ts(d2, *idx) == raw_ts(g.dataset, a));
  }
}

TEST_CASE("presets validate and generate") {
  const RegGenConfig fragile = fragile_preset();
  const RegGenConfig robust = robust_preset();
  CHECK_NOTHROW(fragile.validate());
  CHECK_NOTHROW(robust.validate());
  const GeneratedReg gf = gen_regression_data(fragile);
  const GeneratedReg gr = gen_regression_data(robust);
  CHECK(gf.design.X.rows() > gf.design.X.cols());
  CHECK(gr.design.X.rows() > gr.design.X.cols());
  // Same preset, same bytes.
  const GeneratedReg gf2 = gen_regression_data(fragile_preset());
  CHECK(gf.design.y == gf2.design.y);
}
