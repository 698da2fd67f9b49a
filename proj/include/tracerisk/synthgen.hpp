// Copyright 2026 The tracerisk Authors
// Use of this source code is governed by the Apache License, Version 2.0,
// which can be found in the LICENSE file.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "tracerisk/logmodel.hpp"
#include "tracerisk/regress.hpp"

namespace tracerisk::synthgen {

// 2021-01-04T00:00:00Z, a Monday, so week layouts start on day-of-week 0.
inline constexpr std::int64_t kBaseEpoch = 1609718400;

// A recurring weekly window, local to the generator's UTC clock.
// day_of_week: 0 = Monday .. 6 = Sunday.
struct WeeklySlot {
  int day_of_week = 0;
  int start_min = 540;     // minutes into the day
  int duration_min = 90;
};

enum class LogMode : std::uint8_t { scheduled, self_paced };

// Deterministic event-log generator. Every actor draws from its own
// substream of (seed, actor index), so logs are reproducible per seed and
// stable under any generation order. Twin pairs are built by cloning the
// even twin's raw event timestamps onto the odd twin, which makes the two
// projected tuple sets identical at every generalization level.
struct LogGenConfig {
  std::uint32_t n_actors = 100;
  std::uint32_t events_min = 20;
  std::uint32_t events_max = 20;
  std::uint32_t period_days = 28;
  LogMode mode = LogMode::self_paced;
  std::vector<WeeklySlot> slots;  // scheduled mode
  std::uint32_t twin_pairs = 0;
  std::uint64_t seed = 1;

  void validate() const;  // throws ConfigError
};

struct LogManifest {
  LogGenConfig config;
  std::vector<std::uint32_t> event_counts;  // roster order
  std::vector<std::pair<std::string, std::string>> twins;

  nlohmann::json to_json() const;
};

struct GeneratedLog {
  logmodel::Dataset dataset;
  LogManifest manifest;
};

GeneratedLog gen_event_log(const LogGenConfig& cfg);

// Regression benchmark generator: standard-normal features, configurable
// coefficients and noise, plus optional planted high-leverage rows with a
// fixed residual offset (the designed fragility).
struct RegGenConfig {
  std::uint32_t n = 100;  // bulk rows, excluding planted ones
  std::uint32_t p = 3;
  std::vector<double> beta;  // p+1 values, intercept first; empty = all ones
  double noise_sigma = 1.0;
  std::uint32_t planted_count = 0;
  double planted_leverage = 0.0;
  double planted_residual = 0.0;
  std::uint64_t seed = 1;

  void validate() const;  // throws ConfigError
};

struct RegTruth {
  Eigen::VectorXd beta;
  std::vector<std::uint32_t> planted_rows;

  nlohmann::json to_json() const;
};

struct GeneratedReg {
  regress::DesignMatrix design;
  RegTruth truth;
};

GeneratedReg gen_regression_data(const RegGenConfig& cfg);

// Pinned demonstration datasets: one whose headline slope rides on a
// handful of high-influence rows, one that shrugs off any small removal
// set.
RegGenConfig fragile_preset();
RegGenConfig robust_preset();

// Event-log emitters; rows actor-major and time-ordered, timestamps
// ISO-8601. Round-trips through parse_events.
void write_events_csv(const logmodel::Dataset& d, std::ostream& out);
void write_events_jsonl(const logmodel::Dataset& d, std::ostream& out);

// Design matrix as "y,f1,...,fp" (the intercept stays implicit). Values
// are %.17g, so doubles round-trip exactly.
void write_design_csv(const regress::DesignMatrix& dm, std::ostream& out);
regress::DesignMatrix read_design_csv(std::istream& in);

}  // namespace tracerisk::synthgen
