// Copyright 2026 The tracerisk Authors
// Use of this source code is governed by the Apache License, Version 2.0,
// which can be found in the LICENSE file.

#include "tracerisk/synthgen.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "tracerisk/errors.hpp"
#include "tracerisk/rng.hpp"
#include "tracerisk/timeutil.hpp"
#include "tracerisk/version.hpp"

namespace tracerisk::synthgen {

namespace {

constexpr std::uint64_t kLaneCount = 0x11;
constexpr std::uint64_t kLaneEvents = 0x22;
constexpr std::uint64_t kLaneRegRow = 0x33;

std::string actor_name(std::uint32_t index, int width) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "a%0*u", width, index + 1);
  return buf;
}

int id_width(std::uint32_t n_actors) {
  int w = 1;
  for (std::uint32_t v = n_actors; v >= 10; v /= 10) ++w;
  return std::max(w, 4);
}

}  // namespace

void LogGenConfig::validate() const {
  if (n_actors == 0) throw ConfigError("synth log: n_actors must be positive");
  if (events_min == 0) throw ConfigError("synth log: events_min must be positive");
  if (events_min > events_max)
    throw ConfigError("synth log: events_min exceeds events_max");
  if (period_days == 0) throw ConfigError("synth log: period_days must be positive");
  if (static_cast<std::uint64_t>(twin_pairs) * 2 > n_actors)
    throw ConfigError("synth log: twin_pairs * 2 exceeds n_actors");
  if (mode == LogMode::scheduled) {
    if (slots.empty())
      throw ConfigError("synth log: scheduled mode needs at least one slot");
    if (period_days < 7)
      throw ConfigError("synth log: scheduled mode needs period_days >= 7");
    for (const WeeklySlot& s : slots) {
      if (s.day_of_week < 0 || s.day_of_week > 6)
        throw ConfigError("synth log: slot day_of_week out of range");
      if (s.start_min < 0 || s.start_min >= 1440 || s.duration_min < 1 ||
          s.start_min + s.duration_min > 1440)
        throw ConfigError("synth log: slot window out of range");
    }
  }
}

GeneratedLog gen_event_log(const LogGenConfig& cfg) {
  cfg.validate();
  const int width = id_width(cfg.n_actors);
  const std::uint32_t weeks = cfg.period_days / 7;  // scheduled placement

  // Events for the actor whose substream is used (twins borrow their
  // even partner's).
  auto draw_events = [&](std::uint32_t source_actor) {
    std::vector<std::int64_t> ts;
    SplitMix64 crng(derive_stream(cfg.seed, kLaneCount, source_actor));
    const std::uint32_t count =
        cfg.events_min +
        static_cast<std::uint32_t>(crng.below(cfg.events_max - cfg.events_min +
                                              1));
    ts.reserve(count);
    SplitMix64 rng(derive_stream(cfg.seed, kLaneEvents, source_actor));
    for (std::uint32_t e = 0; e < count; ++e) {
      std::int64_t t;
      if (cfg.mode == LogMode::self_paced) {
        t = kBaseEpoch + static_cast<std::int64_t>(
                             rng.below(static_cast<std::uint64_t>(
                                           cfg.period_days) *
                                       86400));
      } else {
        const WeeklySlot& slot = cfg.slots[rng.below(cfg.slots.size())];
        const std::uint64_t week = rng.below(weeks);
        const std::uint64_t minute = rng.below(slot.duration_min);
        const std::uint64_t second = rng.below(60);
        t = kBaseEpoch +
            static_cast<std::int64_t>(week * 7 + slot.day_of_week) * 86400 +
            (slot.start_min + static_cast<std::int64_t>(minute)) * 60 +
            static_cast<std::int64_t>(second);
      }
      ts.push_back(t);
    }
    return ts;
  };

  logmodel::DatasetBuilder builder;
  LogManifest manifest;
  manifest.config = cfg;
  manifest.event_counts.resize(cfg.n_actors);
  for (std::uint32_t a = 0; a < cfg.n_actors; ++a) {
    const bool odd_twin = a < cfg.twin_pairs * 2 && (a % 2) == 1;
    const std::uint32_t source = odd_twin ? a - 1 : a;
    const std::vector<std::int64_t> ts = draw_events(source);
    const std::string id = actor_name(a, width);
    for (const std::int64_t t : ts) builder.add_event(id, {t});
    manifest.event_counts[a] = static_cast<std::uint32_t>(ts.size());
  }
  for (std::uint32_t j = 0; j < cfg.twin_pairs; ++j)
    manifest.twins.emplace_back(actor_name(2 * j, width),
                                actor_name(2 * j + 1, width));

  GeneratedLog out;
  out.dataset = builder.finish();
  out.manifest = std::move(manifest);
  return out;
}

nlohmann::json LogManifest::to_json() const {
  nlohmann::json j;
  j["generator"] = {{"name", std::string(kToolName) + "-synthgen"},
                    {"version", kToolVersion}};
  j["rng"] = {{"algorithm", "splitmix64"},
              {"normal_transform", "box-muller"}};
  j["base_epoch"] = kBaseEpoch;
  nlohmann::json slots = nlohmann::json::array();
  for (const WeeklySlot& s : config.slots)
    slots.push_back({{"day_of_week", s.day_of_week},
                     {"start_min", s.start_min},
                     {"duration_min", s.duration_min}});
  j["config"] = {
      {"n_actors", config.n_actors},
      {"events_min", config.events_min},
      {"events_max", config.events_max},
      {"period_days", config.period_days},
      {"mode", config.mode == LogMode::scheduled ? "scheduled" : "self_paced"},
      {"slots", std::move(slots)},
      {"twin_pairs", config.twin_pairs},
      {"seed", config.seed},
  };
  j["event_counts"] = event_counts;
  nlohmann::json twins_json = nlohmann::json::array();
  for (const auto& [a, b] : twins) twins_json.push_back({a, b});
  j["twins"] = std::move(twins_json);
  return j;
}

void RegGenConfig::validate() const {
  if (n == 0) throw ConfigError("synth reg: n must be positive");
  if (p == 0) throw ConfigError("synth reg: p must be positive");
  if (!beta.empty() && beta.size() != static_cast<std::size_t>(p) + 1)
    throw ConfigError("synth reg: beta needs exactly p+1 values");
  if (noise_sigma < 0) throw ConfigError("synth reg: negative noise_sigma");
}

GeneratedReg gen_regression_data(const RegGenConfig& cfg) {
  cfg.validate();
  const Eigen::Index pp = static_cast<Eigen::Index>(cfg.p) + 1;
  Eigen::VectorXd beta(pp);
  if (cfg.beta.empty())
    beta.setOnes();
  else
    for (Eigen::Index j = 0; j < pp; ++j) beta[j] = cfg.beta[j];

  const Eigen::Index n_total =
      static_cast<Eigen::Index>(cfg.n) + cfg.planted_count;
  GeneratedReg out;
  out.design.X.resize(n_total, pp);
  out.design.y.resize(n_total);
  out.design.names.reserve(pp);
  out.design.names.emplace_back(regress::kInterceptName);
  for (std::uint32_t j = 1; j <= cfg.p; ++j)
    out.design.names.push_back("f" + std::to_string(j));

  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(cfg.n); ++i) {
    // Per-row stream: p feature draws, then the noise draw.
    SplitMix64 rng(derive_stream(cfg.seed, kLaneRegRow,
                                 static_cast<std::uint64_t>(i)));
    out.design.X(i, 0) = 1.0;
    for (Eigen::Index j = 1; j < pp; ++j) out.design.X(i, j) = rng.normal();
    out.design.y[i] =
        out.design.X.row(i).dot(beta) + cfg.noise_sigma * rng.normal();
  }
  for (std::uint32_t c = 0; c < cfg.planted_count; ++c) {
    const Eigen::Index i = static_cast<Eigen::Index>(cfg.n) + c;
    out.design.X(i, 0) = 1.0;
    for (Eigen::Index j = 1; j < pp; ++j)
      out.design.X(i, j) = cfg.planted_leverage;
    out.design.y[i] = out.design.X.row(i).dot(beta) + cfg.planted_residual;
    out.truth.planted_rows.push_back(static_cast<std::uint32_t>(i));
  }
  out.truth.beta = beta;
  return out;
}

nlohmann::json RegTruth::to_json() const {
  nlohmann::json j;
  j["beta"] = std::vector<double>(beta.data(), beta.data() + beta.size());
  j["planted_rows"] = planted_rows;
  return j;
}

RegGenConfig fragile_preset() {
  // A slope barely above the noise floor: the headline sign rides on a
  // handful of high-influence rows, and dropping a few percent of the data
  // flips it. Kept free of leverage outliers so the first-order removal
  // prediction stays accurate enough to confirm on refit.
  RegGenConfig cfg;
  cfg.n = 100;
  cfg.p = 1;
  cfg.beta = {0.0, 0.12};
  cfg.noise_sigma = 1.0;
  cfg.seed = 2026;
  return cfg;
}

RegGenConfig robust_preset() {
  // Strong, well-separated effects: no small removal set moves any sign.
  RegGenConfig cfg;
  cfg.n = 1500;
  cfg.p = 3;
  cfg.beta = {1.0, 1.6, -1.3, 0.9};
  cfg.noise_sigma = 1.0;
  cfg.planted_count = 0;
  cfg.seed = 7;
  return cfg;
}

namespace {

bool csv_needs_quotes(const std::string& s) {
  return s.find_first_of(",\"\n\r") != std::string::npos;
}

void csv_field(std::ostream& out, const std::string& s) {
  if (!csv_needs_quotes(s)) {
    out << s;
    return;
  }
  out << '"';
  for (const char c : s) {
    if (c == '"') out << '"';
    out << c;
  }
  out << '"';
}

}  // namespace

void write_events_csv(const logmodel::Dataset& d, std::ostream& out) {
  out << "actor,ts";
  for (const auto& name : d.attr_names()) {
    out << ',';
    csv_field(out, name);
  }
  out << '\n';
  const std::uint32_t n_attrs = d.n_attrs();
  for (std::uint32_t a = 0; a < d.n_actors(); ++a) {
    const auto& ev = d.events(a);
    for (std::size_t i = 0; i < ev.ts.size(); ++i) {
      csv_field(out, d.actor_id(a));
      out << ',' << timeutil::format_iso8601(ev.ts[i].sec);
      for (std::uint32_t j = 0; j < n_attrs; ++j) {
        out << ',';
        csv_field(out, d.attr_value(j, ev.attr_codes[i * n_attrs + j]));
      }
      out << '\n';
    }
  }
}

void write_events_jsonl(const logmodel::Dataset& d, std::ostream& out) {
  const std::uint32_t n_attrs = d.n_attrs();
  for (std::uint32_t a = 0; a < d.n_actors(); ++a) {
    const auto& ev = d.events(a);
    for (std::size_t i = 0; i < ev.ts.size(); ++i) {
      nlohmann::json j;
      j["actor"] = d.actor_id(a);
      j["ts"] = timeutil::format_iso8601(ev.ts[i].sec);
      for (std::uint32_t k = 0; k < n_attrs; ++k)
        j[d.attr_names()[k]] = d.attr_value(k, ev.attr_codes[i * n_attrs + k]);
      out << j.dump() << '\n';
    }
  }
}

void write_design_csv(const regress::DesignMatrix& dm, std::ostream& out) {
  out << 'y';
  for (std::size_t j = 1; j < dm.names.size(); ++j) {
    out << ',';
    csv_field(out, dm.names[j]);
  }
  out << '\n';
  char buf[40];
  for (Eigen::Index i = 0; i < dm.X.rows(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", dm.y[i]);
    out << buf;
    for (Eigen::Index j = 1; j < dm.X.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", dm.X(i, j));
      out << ',' << buf;
    }
    out << '\n';
  }
}

regress::DesignMatrix read_design_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("empty design file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) header.push_back(field);
  }
  if (header.empty() || header[0] != "y")
    throw SchemaError("design file must start with a y column");

  regress::DesignMatrix dm;
  dm.names.emplace_back(regress::kInterceptName);
  for (std::size_t j = 1; j < header.size(); ++j) dm.names.push_back(header[j]);

  std::vector<double> values;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    std::size_t got = 0;
    while (std::getline(ss, field, ',')) {
      char* end = nullptr;
      const double v = std::strtod(field.c_str(), &end);
      if (end == field.c_str() || *end != '\0')
        throw RowError("design record " + std::to_string(rows + 1) +
                       ": bad number: " + field);
      values.push_back(v);
      ++got;
    }
    if (got != header.size())
      throw RowError("design record " + std::to_string(rows + 1) +
                     ": expected " + std::to_string(header.size()) +
                     " fields, got " + std::to_string(got));
    ++rows;
  }
  const Eigen::Index n = static_cast<Eigen::Index>(rows);
  const Eigen::Index pp = static_cast<Eigen::Index>(header.size());
  dm.X.resize(n, pp);
  dm.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    dm.y[i] = values[static_cast<std::size_t>(i) * pp];
    dm.X(i, 0) = 1.0;
    for (Eigen::Index j = 1; j < pp; ++j)
      dm.X(i, j) = values[static_cast<std::size_t>(i) * pp +
                          static_cast<std::size_t>(j)];
  }
  return dm;
}

}  // namespace tracerisk::synthgen
