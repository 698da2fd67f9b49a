// Copyright 2026 The tracerisk Authors
// Use of this source code is governed by the Apache License, Version 2.0,
// which can be found in the LICENSE file.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tracerisk/amip.hpp"
#include "tracerisk/habitfeat.hpp"
#include "tracerisk/logmodel.hpp"
#include "tracerisk/regress.hpp"
#include "tracerisk/unicity.hpp"

namespace tracerisk::cli {

struct InputConfig {
  std::string path;
  logmodel::LogFormat format = logmodel::LogFormat::csv;
  logmodel::Schema schema;
  bool skip_bad_rows = false;
};

struct UnicitySection {
  std::vector<logmodel::Level> levels = {
      logmodel::Level::minute, logmodel::Level::quarter_hour,
      logmodel::Level::hour, logmodel::Level::date};
  std::vector<std::uint32_t> epsilons = {1, 2, 3, 4, 5, 6, 7, 8};
  std::optional<std::uint32_t> sample_size = 2500;  // nullopt = all
  std::vector<std::uint64_t> seeds;  // empty = derive 10 from the root seed
  std::uint32_t bootstrap_reps = 1000;
  unicity::ShortTrajectoryPolicy policy =
      unicity::ShortTrajectoryPolicy::exclude;
  int tz_offset_min = 0;
  std::vector<std::string> attrs;
};

struct FeatureSection {
  habitfeat::SessionParams session;
  habitfeat::TimeWindowPartition partition;  // carries tz_offset_min
  habitfeat::DurationMode duration_mode = habitfeat::DurationMode::session;
};

struct RegressSection {
  int max_terms = 5;
  regress::Criterion criterion = regress::Criterion::adjusted_r2;
  double alpha = 0.05;
};

struct AmipSection {
  double alpha_cap = 0.5;
  // nullopt: auto, on only for recognized synthetic inputs.
  std::optional<bool> include_removal_ids;
};

// Full pipeline configuration. JSON round-trip is strict: unknown keys are
// an error, absent keys take the defaults above. The echo embedded in
// reports excludes the thread count, which cannot affect results.
struct PipelineConfig {
  InputConfig input;
  UnicitySection unicity;
  FeatureSection features;
  RegressSection regress;
  AmipSection amip;
  std::string output_dir = ".";
  std::uint64_t seed = 1;
  unsigned threads = 1;

  static PipelineConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  // Seeds actually used by the unicity sweep: the explicit list, or ten
  // streams derived from the root seed.
  std::vector<std::uint64_t> resolved_seeds() const;
};

struct StageNote {
  std::string name;
  std::string status;  // "ok" | "error" | "skipped"
  std::string detail;
};

struct IngestSummary {
  std::uint64_t rows = 0;
  std::uint64_t skipped = 0;
  std::uint32_t actors = 0;
};

struct FeatureSummary {
  std::uint32_t frame_rows = 0;
  std::uint32_t dropped_low_activity = 0;
  std::uint32_t dropped_zero_weight = 0;
  std::uint32_t imputed_gap_rows = 0;
  std::vector<habitfeat::FeatureColumn> columns;
  double entropy_min = 0, entropy_mean = 0, entropy_max = 0;
};

struct Report {
  PipelineConfig config;
  std::vector<std::string> warnings;
  std::vector<StageNote> stages;
  std::optional<IngestSummary> ingest;
  std::optional<unicity::UnicityTable> unicity_table;
  std::optional<FeatureSummary> features;
  std::optional<regress::SelectionOutcome> regression;
  std::optional<amip::Analysis> amip_analysis;
  bool include_removal_ids = false;
  std::vector<std::string> frame_actor_ids;  // regression frame row -> actor

  // Wall-clock seconds per stage; logged to stderr, never serialized, so
  // reports stay byte-identical across runs.
  std::vector<std::pair<std::string, double>> timings_s;

  bool ok() const;
  nlohmann::json to_json() const;
  std::string to_markdown() const;
};

// The regression frame: feature rows joined with the entropy response by
// actor id (each is a subsequence of the sorted roster).
struct RegressionFrame {
  habitfeat::FeatureMatrix features;
  Eigen::VectorXd y;
  std::vector<std::string> actor_ids;
  std::uint32_t dropped_low_activity = 0;  // fewer than two events
  std::uint32_t dropped_zero_weight = 0;   // no time-window mass
};

RegressionFrame build_frame(const logmodel::Dataset& d,
                            const FeatureSection& cfg);

// Runs ingest -> unicity -> features -> regression -> AMIP. A failed stage
// is recorded and everything depending on it is skipped with a reason.
Report run_pipeline(const PipelineConfig& cfg);

// Same, on an already-loaded dataset (synthetic runs, tests).
// synthetic_input marks the data as generator-produced for the removal-id
// default.
Report run_pipeline_on(const logmodel::Dataset& d, const PipelineConfig& cfg,
                       bool synthetic_input);

// Writers for the flat artifacts next to report.json / report.md.
void write_unicity_csv(const unicity::UnicityTable& table, std::ostream& out);
void write_alpha_hist_csv(const amip::Analysis& analysis, std::ostream& out);
void write_features_csv(const habitfeat::FeatureMatrix& fm,
                        const habitfeat::EntropyVector* entropy,
                        std::ostream& out);

// Writes report.json, report.md, unicity.csv and amip_alpha_hist.csv (when
// the stages ran) under out_dir, creating it if needed.
void emit_report(const Report& report, const std::string& out_dir);

}  // namespace tracerisk::cli
