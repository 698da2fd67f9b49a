// Copyright 2026 The tracerisk Authors
// Use of this source code is governed by the Apache License, Version 2.0,
// which can be found in the LICENSE file.

#include "tracerisk/logmodel.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "tracerisk/errors.hpp"
#include "tracerisk/timeutil.hpp"

namespace tracerisk::logmodel {

using timeutil::floor_div;

const char* level_name(Level level) {
  switch (level) {
    case Level::minute:
      return "minute";
    case Level::quarter_hour:
      return "quarter_hour";
    case Level::hour:
      return "hour";
    case Level::date:
      return "date";
  }
  return "?";
}

std::optional<Level> level_from_name(std::string_view name) {
  if (name == "minute") return Level::minute;
  if (name == "quarter_hour") return Level::quarter_hour;
  if (name == "hour") return Level::hour;
  if (name == "date") return Level::date;
  return std::nullopt;
}

Timestamp generalize_timestamp(Timestamp ts, const GeneralizationLevel& g) {
  switch (g.level) {
    case Level::minute:
      return {floor_div(ts.sec, 60) * 60};
    case Level::quarter_hour:
      return {floor_div(ts.sec, 900) * 900};
    case Level::hour:
      return {floor_div(ts.sec, 3600) * 3600};
    case Level::date: {
      // Floor to the local calendar day, return the UTC instant of local
      // midnight so the map stays idempotent.
      const std::int64_t off = static_cast<std::int64_t>(g.tz_offset_min) * 60;
      const std::int64_t day = floor_div(ts.sec + off, 86400);
      return {day * 86400 - off};
    }
  }
  return ts;
}

std::string format_generalized(Timestamp window_start,
                               const GeneralizationLevel& g) {
  if (g.level == Level::date) {
    const std::int64_t off = static_cast<std::int64_t>(g.tz_offset_min) * 60;
    return timeutil::format_date(window_start.sec + off);
  }
  return timeutil::format_iso8601_minute(window_start.sec);
}

std::optional<std::uint32_t> Dataset::attr_index(std::string_view name) const {
  for (std::uint32_t i = 0; i < attr_names_.size(); ++i) {
    if (attr_names_[i] == name) return i;
  }
  return std::nullopt;
}

DatasetBuilder::DatasetBuilder(std::vector<std::string> attr_names)
    : attr_names_(std::move(attr_names)),
      dicts_(attr_names_.size()),
      dict_index_(attr_names_.size()) {}

std::uint32_t DatasetBuilder::actor_slot(std::string_view actor_id) {
  auto it = actor_index_.find(actor_id);
  if (it != actor_index_.end()) return it->second;
  const auto slot = static_cast<std::uint32_t>(actor_ids_.size());
  actor_ids_.emplace_back(actor_id);
  pending_.emplace_back();
  actor_index_.emplace(actor_ids_.back(), slot);
  return slot;
}

void DatasetBuilder::add_event(std::string_view actor_id, Timestamp ts,
                               std::span<const std::string_view> attr_values) {
  if (actor_id.empty()) throw RowError("empty actor identifier");
  if (ts.sec < 0) throw RowError("negative timestamp");
  if (attr_values.size() != attr_names_.size())
    throw RowError("attribute arity mismatch");
  const std::uint32_t slot = actor_slot(actor_id);
  ActorEvents& ev = pending_[slot];
  ev.ts.push_back(ts);
  for (std::size_t i = 0; i < attr_values.size(); ++i) {
    auto& idx = dict_index_[i];
    auto it = idx.find(attr_values[i]);
    std::uint32_t code;
    if (it == idx.end()) {
      code = static_cast<std::uint32_t>(dicts_[i].size());
      dicts_[i].emplace_back(attr_values[i]);
      idx.emplace(dicts_[i].back(), code);
    } else {
      code = it->second;
    }
    ev.attr_codes.push_back(code);
  }
  ++n_events_;
}

Dataset DatasetBuilder::finish() {
  const std::size_t n = actor_ids_.size();
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::uint32_t a, std::uint32_t b) {
              return actor_ids_[a] < actor_ids_[b];
            });

  Dataset d;
  d.attr_names_ = std::move(attr_names_);
  d.attr_dicts_ = std::move(dicts_);
  d.n_events_ = n_events_;
  d.actor_ids_.reserve(n);
  d.actors_.reserve(n);
  const std::size_t n_attrs = d.attr_names_.size();
  std::vector<std::uint32_t> perm;
  for (const std::uint32_t slot : order) {
    d.actor_ids_.push_back(std::move(actor_ids_[slot]));
    ActorEvents& src = pending_[slot];
    const std::size_t k = src.ts.size();
    perm.resize(k);
    std::iota(perm.begin(), perm.end(), 0);
    std::stable_sort(perm.begin(), perm.end(),
                     [&](std::uint32_t a, std::uint32_t b) {
                       return src.ts[a] < src.ts[b];
                     });
    ActorEvents dst;
    dst.ts.reserve(k);
    dst.attr_codes.reserve(k * n_attrs);
    for (const std::uint32_t i : perm) {
      dst.ts.push_back(src.ts[i]);
      for (std::size_t j = 0; j < n_attrs; ++j)
        dst.attr_codes.push_back(src.attr_codes[i * n_attrs + j]);
    }
    d.actors_.push_back(std::move(dst));
    src = ActorEvents{};
  }
  actor_index_.clear();
  pending_.clear();
  return d;
}

namespace {

// RFC 4180 field scanner over a whole buffer. Handles quoted fields with
// doubled-quote escapes and newlines inside quotes; accepts LF and CRLF.
class CsvScanner {
 public:
  explicit CsvScanner(std::string_view buf) : buf_(buf) {}

  // Reads one record into fields; returns false at end of input.
  bool next(std::vector<std::string>& fields) {
    fields.clear();
    if (pos_ >= buf_.size()) return false;
    std::string field;
    bool quoted = false;
    for (;;) {
      if (pos_ >= buf_.size()) {
        if (quoted) throw RowError("record " + std::to_string(record_ + 1) +
                                   ": unterminated quoted field");
        fields.push_back(std::move(field));
        ++record_;
        return true;
      }
      const char c = buf_[pos_++];
      if (quoted) {
        if (c == '"') {
          if (pos_ < buf_.size() && buf_[pos_] == '"') {
            field.push_back('"');
            ++pos_;
          } else {
            quoted = false;
          }
        } else {
          field.push_back(c);
        }
      } else if (c == '"' && field.empty()) {
        quoted = true;
      } else if (c == ',') {
        fields.push_back(std::move(field));
        field.clear();
      } else if (c == '\n' || c == '\r') {
        if (c == '\r' && pos_ < buf_.size() && buf_[pos_] == '\n') ++pos_;
        fields.push_back(std::move(field));
        ++record_;
        return true;
      } else {
        field.push_back(c);
      }
    }
  }

  std::uint64_t record() const { return record_; }

 private:
  std::string_view buf_;
  std::size_t pos_ = 0;
  std::uint64_t record_ = 0;
};

std::int64_t parse_epoch_seconds(std::string_view s) {
  if (s.empty()) throw RowError("empty timestamp");
  std::int64_t v = 0;
  for (const char c : s) {
    if (c < '0' || c > '9') throw RowError("bad epoch timestamp");
    if (v > (INT64_MAX - (c - '0')) / 10) throw RowError("epoch overflow");
    v = v * 10 + (c - '0');
  }
  return v;
}

Timestamp parse_ts(std::string_view s, TsFormat fmt) {
  if (fmt == TsFormat::epoch_seconds) return {parse_epoch_seconds(s)};
  std::int64_t sec = 0;
  if (!timeutil::parse_iso8601(s, &sec)) throw RowError("bad ISO-8601 timestamp");
  if (sec < 0) throw RowError("timestamp before the epoch");
  return {sec};
}

Dataset parse_csv(std::istream& in, const Schema& schema, BadRowPolicy policy,
                  IngestStats* stats) {
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string buf = ss.str();
  CsvScanner scanner(buf);

  std::vector<std::string> fields;
  if (!scanner.next(fields)) throw SchemaError("empty input: no header row");

  auto col_of = [&](const std::string& name) -> std::size_t {
    for (std::size_t i = 0; i < fields.size(); ++i)
      if (fields[i] == name) return i;
    throw SchemaError("missing column: " + name);
  };
  const std::size_t actor_col = col_of(schema.actor_col);
  const std::size_t ts_col = col_of(schema.ts_col);
  std::vector<std::size_t> attr_cols;
  attr_cols.reserve(schema.attr_cols.size());
  for (const auto& name : schema.attr_cols) attr_cols.push_back(col_of(name));
  const std::size_t n_cols = fields.size();

  DatasetBuilder builder(schema.attr_cols);
  std::vector<std::string_view> attr_vals(attr_cols.size());
  while (scanner.next(fields)) {
    if (fields.size() == 1 && fields[0].empty()) continue;  // blank tail line
    try {
      if (fields.size() != n_cols)
        throw RowError("expected " + std::to_string(n_cols) + " fields, got " +
                       std::to_string(fields.size()));
      const Timestamp ts = parse_ts(fields[ts_col], schema.ts_format);
      for (std::size_t i = 0; i < attr_cols.size(); ++i)
        attr_vals[i] = fields[attr_cols[i]];
      builder.add_event(fields[actor_col], ts, attr_vals);
      if (stats) ++stats->rows;
    } catch (const RowError& e) {
      if (policy == BadRowPolicy::fail_fast)
        throw RowError("record " + std::to_string(scanner.record()) + ": " +
                       e.what());
      if (stats) ++stats->skipped;
    }
  }
  return builder.finish();
}

std::string json_to_field(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  throw RowError("expected a string or integer value");
}

Dataset parse_jsonl(std::istream& in, const Schema& schema, BadRowPolicy policy,
                    IngestStats* stats) {
  DatasetBuilder builder(schema.attr_cols);
  std::string line;
  std::uint64_t lineno = 0;
  std::vector<std::string> attr_store(schema.attr_cols.size());
  std::vector<std::string_view> attr_vals(schema.attr_cols.size());
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
      if (j.is_discarded() || !j.is_object())
        throw RowError("not a JSON object");
      auto field = [&](const std::string& key) -> const nlohmann::json& {
        const auto it = j.find(key);
        if (it == j.end()) throw RowError("missing key: " + key);
        return *it;
      };
      const std::string actor = json_to_field(field(schema.actor_col));
      Timestamp ts;
      const nlohmann::json& tsv = field(schema.ts_col);
      if (schema.ts_format == TsFormat::epoch_seconds &&
          tsv.is_number_integer()) {
        const std::int64_t sec = tsv.get<std::int64_t>();
        if (sec < 0) throw RowError("negative timestamp");
        ts = {sec};
      } else {
        ts = parse_ts(json_to_field(tsv), schema.ts_format);
      }
      for (std::size_t i = 0; i < schema.attr_cols.size(); ++i) {
        attr_store[i] = json_to_field(field(schema.attr_cols[i]));
        attr_vals[i] = attr_store[i];
      }
      builder.add_event(actor, ts, attr_vals);
      if (stats) ++stats->rows;
    } catch (const RowError& e) {
      if (policy == BadRowPolicy::fail_fast)
        throw RowError("line " + std::to_string(lineno) + ": " + e.what());
      if (stats) ++stats->skipped;
    }
  }
  return builder.finish();
}

}  // namespace

Dataset parse_events(std::istream& in, const Schema& schema, LogFormat format,
                     BadRowPolicy policy, IngestStats* stats) {
  if (schema.actor_col.empty() || schema.ts_col.empty())
    throw SchemaError("actor and timestamp columns must be named");
  return format == LogFormat::csv ? parse_csv(in, schema, policy, stats)
                                  : parse_jsonl(in, schema, policy, stats);
}

Dataset parse_events_file(const std::string& path, const Schema& schema,
                          LogFormat format, BadRowPolicy policy,
                          IngestStats* stats) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open input: " + path);
  return parse_events(in, schema, format, policy, stats);
}

ProjectedDataset project_dataset(const Dataset& d, const QISpec& q) {
  ProjectedDataset p;
  p.spec = q;
  p.actor_ids = d.actor_ids();
  p.key_stride = static_cast<std::uint32_t>(1 + q.attrs.size());
  p.offsets.assign(d.n_actors() + 1, 0);

  std::vector<std::uint32_t> attr_idx;
  attr_idx.reserve(q.attrs.size());
  for (const auto& name : q.attrs) {
    const auto i = d.attr_index(name);
    if (!i) throw SchemaError("unknown attribute column: " + name);
    attr_idx.push_back(*i);
  }

  const std::uint32_t n = d.n_actors();
  const std::uint32_t stride = p.key_stride;

  if (stride == 1) {
    // Hot path: key is the window start alone.
    std::unordered_map<std::uint64_t, std::uint32_t> intern;
    std::vector<std::uint64_t> scratch;
    for (std::uint32_t a = 0; a < n; ++a) {
      const ActorEvents& ev = d.events(a);
      scratch.clear();
      scratch.reserve(ev.ts.size());
      for (const Timestamp t : ev.ts)
        scratch.push_back(static_cast<std::uint64_t>(
            generalize_timestamp(t, q.level).sec));
      std::sort(scratch.begin(), scratch.end());
      scratch.erase(std::unique(scratch.begin(), scratch.end()),
                    scratch.end());
      for (const std::uint64_t key : scratch) {
        auto [it, fresh] =
            intern.emplace(key, static_cast<std::uint32_t>(p.keys.size()));
        if (fresh) p.keys.push_back(key);
        p.tuple_ids.push_back(it->second);
      }
      p.offsets[a + 1] = static_cast<std::uint32_t>(p.tuple_ids.size());
    }
    return p;
  }

  // Attribute tuples: keys are stride-wide little rows, interned by bytes.
  std::unordered_map<std::string, std::uint32_t> intern;
  std::vector<std::uint64_t> row(stride);
  std::vector<std::uint64_t> rows;   // stride-packed per-actor scratch
  std::vector<std::uint32_t> order;
  const std::uint32_t n_sel = static_cast<std::uint32_t>(attr_idx.size());
  const std::uint32_t n_attrs = d.n_attrs();
  for (std::uint32_t a = 0; a < n; ++a) {
    const ActorEvents& ev = d.events(a);
    const std::size_t k = ev.ts.size();
    rows.clear();
    rows.reserve(k * stride);
    for (std::size_t i = 0; i < k; ++i) {
      rows.push_back(static_cast<std::uint64_t>(
          generalize_timestamp(ev.ts[i], q.level).sec));
      for (std::uint32_t j = 0; j < n_sel; ++j)
        rows.push_back(ev.attr_codes[i * n_attrs + attr_idx[j]]);
    }
    order.resize(k);
    std::iota(order.begin(), order.end(), 0);
    auto row_less = [&](std::uint32_t x, std::uint32_t y) {
      return std::lexicographical_compare(
          rows.begin() + x * stride, rows.begin() + (x + 1) * stride,
          rows.begin() + y * stride, rows.begin() + (y + 1) * stride);
    };
    auto row_eq = [&](std::uint32_t x, std::uint32_t y) {
      return std::equal(rows.begin() + x * stride,
                        rows.begin() + (x + 1) * stride,
                        rows.begin() + y * stride);
    };
    std::sort(order.begin(), order.end(), row_less);
    order.erase(std::unique(order.begin(), order.end(), row_eq), order.end());
    for (const std::uint32_t i : order) {
      std::copy(rows.begin() + i * stride, rows.begin() + (i + 1) * stride,
                row.begin());
      std::string bytes(reinterpret_cast<const char*>(row.data()),
                        stride * sizeof(std::uint64_t));
      auto [it, fresh] = intern.emplace(
          std::move(bytes), static_cast<std::uint32_t>(p.n_tuples()));
      if (fresh) p.keys.insert(p.keys.end(), row.begin(), row.end());
      p.tuple_ids.push_back(it->second);
    }
    p.offsets[a + 1] = static_cast<std::uint32_t>(p.tuple_ids.size());
  }
  return p;
}

}  // namespace tracerisk::logmodel
