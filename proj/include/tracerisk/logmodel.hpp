// Copyright 2026 The tracerisk Authors
// Use of this source code is governed by the Apache License, Version 2.0,
// which can be found in the LICENSE file.

#pragma once

#include <compare>
#include <cstdint>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace tracerisk::logmodel {

// Seconds since the Unix epoch, UTC. Ingested event timestamps are
// validated non-negative; generalized window starts may go below zero
// under timezone shifts.
struct Timestamp {
  std::int64_t sec = 0;
  auto operator<=>(const Timestamp&) const = default;
};

enum class Level : std::uint8_t { minute, quarter_hour, hour, date };

const char* level_name(Level level);
std::optional<Level> level_from_name(std::string_view name);

// Timestamp coarsening: minute/quarter_hour/hour floor to fixed UTC grids;
// date floors to the local calendar day under tz_offset_min (minutes east
// of UTC). The result is the window start, so the map is idempotent.
struct GeneralizationLevel {
  Level level = Level::minute;
  int tz_offset_min = 0;

  bool operator==(const GeneralizationLevel&) const = default;
};

Timestamp generalize_timestamp(Timestamp ts, const GeneralizationLevel& g);

// Human-readable window identifier: "YYYY-MM-DDTHH:MM" for sub-day levels
// (UTC wall clock of the window start), "YYYY-MM-DD" for date (local day).
std::string format_generalized(Timestamp window_start,
                               const GeneralizationLevel& g);

enum class TsFormat : std::uint8_t { iso8601, epoch_seconds };

// Heterogeneous string keys (lookup by string_view without allocating).
struct SvHash {
  using is_transparent = void;
  std::size_t operator()(std::string_view s) const {
    return std::hash<std::string_view>{}(s);
  }
};
struct SvEq {
  using is_transparent = void;
  bool operator()(std::string_view a, std::string_view b) const {
    return a == b;
  }
};
template <typename V>
using StringMap = std::unordered_map<std::string, V, SvHash, SvEq>;

// Maps raw columns/keys onto the event model.
struct Schema {
  std::string actor_col = "actor";
  std::string ts_col = "ts";
  TsFormat ts_format = TsFormat::iso8601;
  std::vector<std::string> attr_cols;  // optional categorical attributes
};

// One actor's events, sorted by timestamp (ties keep input order).
// attr_codes is row-major: event i holds codes [i*n_attrs, (i+1)*n_attrs).
struct ActorEvents {
  std::vector<Timestamp> ts;
  std::vector<std::uint32_t> attr_codes;
};

// Immutable event log: actors sorted by identifier, per-actor events sorted
// by time, categorical attributes dictionary-encoded per column.
class Dataset {
 public:
  std::uint32_t n_actors() const {
    return static_cast<std::uint32_t>(actors_.size());
  }
  std::uint64_t n_events() const { return n_events_; }
  const std::string& actor_id(std::uint32_t a) const { return actor_ids_[a]; }
  const std::vector<std::string>& actor_ids() const { return actor_ids_; }
  const ActorEvents& events(std::uint32_t a) const { return actors_[a]; }
  std::uint32_t n_attrs() const {
    return static_cast<std::uint32_t>(attr_names_.size());
  }
  const std::vector<std::string>& attr_names() const { return attr_names_; }
  // Index of a schema attribute column, or nullopt.
  std::optional<std::uint32_t> attr_index(std::string_view name) const;
  const std::string& attr_value(std::uint32_t attr, std::uint32_t code) const {
    return attr_dicts_[attr][code];
  }
  std::uint32_t attr_cardinality(std::uint32_t attr) const {
    return static_cast<std::uint32_t>(attr_dicts_[attr].size());
  }

 private:
  friend class DatasetBuilder;
  std::vector<std::string> actor_ids_;
  std::vector<ActorEvents> actors_;
  std::vector<std::string> attr_names_;
  std::vector<std::vector<std::string>> attr_dicts_;
  std::uint64_t n_events_ = 0;
};

// Accumulates events in arbitrary order; finish() sorts and validates.
class DatasetBuilder {
 public:
  explicit DatasetBuilder(std::vector<std::string> attr_names = {});

  // attr_values must match the attr_names arity. Throws RowError on a
  // negative timestamp.
  void add_event(std::string_view actor_id, Timestamp ts,
                 std::span<const std::string_view> attr_values = {});

  Dataset finish();

 private:
  std::uint32_t actor_slot(std::string_view actor_id);

  std::vector<std::string> attr_names_;
  std::vector<std::vector<std::string>> dicts_;
  std::vector<StringMap<std::uint32_t>> dict_index_;
  StringMap<std::uint32_t> actor_index_;
  std::vector<std::string> actor_ids_;
  std::vector<ActorEvents> pending_;
  std::uint64_t n_events_ = 0;
};

enum class LogFormat : std::uint8_t { csv, jsonl };
enum class BadRowPolicy : std::uint8_t { fail_fast, skip_and_count };

struct IngestStats {
  std::uint64_t rows = 0;     // events ingested
  std::uint64_t skipped = 0;  // malformed rows dropped under skip_and_count
};

// Parses CSV (RFC 4180 quoting) or JSONL event logs. Errors carry the
// 1-based record number. CSV requires a header row.
Dataset parse_events(std::istream& in, const Schema& schema, LogFormat format,
                     BadRowPolicy policy = BadRowPolicy::fail_fast,
                     IngestStats* stats = nullptr);

Dataset parse_events_file(const std::string& path, const Schema& schema,
                          LogFormat format,
                          BadRowPolicy policy = BadRowPolicy::fail_fast,
                          IngestStats* stats = nullptr);

// Quasi-identifier: a generalization level plus optional attribute columns.
struct QISpec {
  GeneralizationLevel level;
  std::vector<std::string> attrs;
};

// Per-actor deduplicated QI tuple sets in CSR form. Tuples are interned:
// tuple id -> key of key_stride u64 words (generalized window start, then
// attribute codes). Each actor's tuple ids are sorted by key; posting-order
// invariants downstream rely on actor indices, which follow the sorted
// roster of the source dataset.
struct ProjectedDataset {
  QISpec spec;
  std::vector<std::string> actor_ids;
  std::uint32_t key_stride = 1;
  std::vector<std::uint64_t> keys;       // n_tuples * key_stride
  std::vector<std::uint32_t> offsets;    // n_actors + 1
  std::vector<std::uint32_t> tuple_ids;  // concatenated per-actor sets

  std::uint32_t n_actors() const {
    return static_cast<std::uint32_t>(actor_ids.size());
  }
  std::uint32_t n_tuples() const {
    return static_cast<std::uint32_t>(keys.size() / key_stride);
  }
  std::uint32_t tuple_count(std::uint32_t a) const {
    return offsets[a + 1] - offsets[a];
  }
  std::span<const std::uint32_t> actor_tuples(std::uint32_t a) const {
    return {tuple_ids.data() + offsets[a], tuple_count(a)};
  }
  std::span<const std::uint64_t> tuple_key(std::uint32_t t) const {
    return {keys.data() + static_cast<std::size_t>(t) * key_stride,
            key_stride};
  }
};

// Projects the log onto the QI space: generalizes every timestamp, attaches
// the named attribute codes, and deduplicates per actor. Unknown attribute
// names raise SchemaError.
ProjectedDataset project_dataset(const Dataset& d, const QISpec& q);

}  // namespace tracerisk::logmodel
