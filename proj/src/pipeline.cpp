// Copyright 2026 The tracerisk Authors
// Use of this source code is governed by the Apache License, Version 2.0,
// which can be found in the LICENSE file.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "tracerisk/errors.hpp"
#include "tracerisk/report.hpp"

namespace tracerisk::cli {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// A stage runs under a timer and converts tool errors into an "error" note;
// anything else still propagates (a bug should crash, not get reported as
// data quality).
template <typename Fn>
bool run_stage(Report& rep, const char* name, Fn&& fn) {
  const auto t0 = Clock::now();
  bool ok = true;
  std::string detail;
  try {
    detail = fn();
  } catch (const Error& e) {
    ok = false;
    detail = e.what();
  }
  rep.timings_s.emplace_back(name, seconds_since(t0));
  rep.stages.push_back({name, ok ? "ok" : "error", detail});
  return ok;
}

void skip_stage(Report& rep, const char* name, const std::string& why) {
  rep.stages.push_back({name, "skipped", why});
}

// Synthetic inputs are recognized by the generator manifest written next to
// the log file; only those default to emitting removal identifiers.
bool sibling_manifest_marks_synthetic(const std::string& log_path) {
  namespace fs = std::filesystem;
  std::error_code ec;
  const fs::path dir = fs::path(log_path).parent_path();
  const fs::path manifest =
      (dir.empty() ? fs::path(".") : dir) / "manifest.json";
  if (!fs::exists(manifest, ec) || ec) return false;
  std::ifstream f(manifest);
  if (!f) return false;
  const auto j = nlohmann::json::parse(f, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object()) return false;
  const auto gen = j.find("generator");
  if (gen == j.end() || !gen->is_object()) return false;
  const auto name = gen->find("name");
  if (name == gen->end() || !name->is_string()) return false;
  return name->get<std::string>().find("-synthgen") != std::string::npos;
}

Report run_pipeline_impl(const logmodel::Dataset* preloaded,
                         const PipelineConfig& cfg, bool synthetic_input) {
  Report rep;
  rep.config = cfg;

  logmodel::Dataset loaded;
  const logmodel::Dataset* d = preloaded;
  bool synthetic = synthetic_input;

  if (preloaded == nullptr) {
    const bool ok = run_stage(rep, "ingest", [&] {
      if (cfg.input.path.empty())
        throw ConfigError("input.path is required");
      logmodel::IngestStats stats;
      loaded = logmodel::parse_events_file(
          cfg.input.path, cfg.input.schema, cfg.input.format,
          cfg.input.skip_bad_rows ? logmodel::BadRowPolicy::skip_and_count
                                  : logmodel::BadRowPolicy::fail_fast,
          &stats);
      rep.ingest = IngestSummary{stats.rows, stats.skipped, loaded.n_actors()};
      return std::to_string(stats.rows) + " rows, " +
             std::to_string(loaded.n_actors()) + " actors" +
             (stats.skipped > 0
                  ? ", " + std::to_string(stats.skipped) + " skipped"
                  : "");
    });
    if (ok) {
      d = &loaded;
      synthetic = sibling_manifest_marks_synthetic(cfg.input.path);
    }
  } else {
    rep.ingest = IngestSummary{d->n_events(), 0, d->n_actors()};
    rep.stages.push_back({"ingest", "ok", "preloaded dataset"});
  }

  rep.include_removal_ids = cfg.amip.include_removal_ids.value_or(synthetic);

  // Unicity sweep. Independent of the feature/regression chain: a failure
  // here still lets the robustness half run.
  if (d != nullptr) {
    run_stage(rep, "unicity", [&] {
      logmodel::QISpec base;
      base.level = {cfg.unicity.levels.empty() ? logmodel::Level::minute
                                               : cfg.unicity.levels.front(),
                    cfg.unicity.tz_offset_min};
      base.attrs = cfg.unicity.attrs;
      std::vector<logmodel::GeneralizationLevel> levels;
      levels.reserve(cfg.unicity.levels.size());
      for (const auto lv : cfg.unicity.levels)
        levels.push_back({lv, cfg.unicity.tz_offset_min});
      unicity::UnicityConfig ucfg;
      ucfg.epsilons = cfg.unicity.epsilons;
      ucfg.sample_size = cfg.unicity.sample_size;
      ucfg.seeds = cfg.resolved_seeds();
      ucfg.bootstrap_reps = cfg.unicity.bootstrap_reps;
      ucfg.policy = cfg.unicity.policy;
      rep.unicity_table =
          unicity::estimate_unicity(*d, base, levels, ucfg, cfg.threads);
      rep.warnings.push_back(
          "unicity intervals are bootstrap percentiles over per-actor "
          "uniqueness indicators pooled across seeds");
      if (cfg.unicity.policy == unicity::ShortTrajectoryPolicy::clamp)
        rep.warnings.push_back(
            "short-trajectory policy clamp: actors with fewer than epsilon "
            "distinct tuples contribute their whole trajectory");
      return std::to_string(rep.unicity_table->rows.size()) + " rows";
    });
  } else {
    skip_stage(rep, "unicity", "ingest failed");
  }

  // Features, then the regression chain.
  RegressionFrame frame;
  bool have_frame = false;
  if (d != nullptr) {
    have_frame = run_stage(rep, "features", [&] {
      frame = build_frame(*d, cfg.features);
      if (frame.actor_ids.empty())
        throw ConfigError("regression frame is empty: no actor has both "
                          "features and a habit distribution");
      FeatureSummary fs;
      fs.frame_rows = static_cast<std::uint32_t>(frame.actor_ids.size());
      fs.dropped_low_activity = frame.dropped_low_activity;
      fs.dropped_zero_weight = frame.dropped_zero_weight;
      fs.imputed_gap_rows = static_cast<std::uint32_t>(
          std::count(frame.features.gap_imputed.begin(),
                     frame.features.gap_imputed.end(), std::uint8_t{1}));
      fs.columns = frame.features.columns;
      fs.entropy_min = frame.y.minCoeff();
      fs.entropy_mean = frame.y.mean();
      fs.entropy_max = frame.y.maxCoeff();
      rep.features = fs;
      if (fs.imputed_gap_rows > 0)
        rep.warnings.push_back(
            std::to_string(fs.imputed_gap_rows) +
            " single-session actors took the cohort median inter-session "
            "gap (flagged in gap_imputed)");
      return std::to_string(fs.frame_rows) + " rows x " +
             std::to_string(fs.columns.size()) + " features";
    });
  } else {
    skip_stage(rep, "features", "ingest failed");
  }

  bool have_fit = false;
  if (have_frame) {
    have_fit = run_stage(rep, "regress", [&] {
      rep.regression =
          regress::select_model(frame.features, frame.y, cfg.regress.max_terms,
                                cfg.regress.criterion, cfg.regress.alpha);
      rep.frame_actor_ids = frame.actor_ids;
      rep.warnings.push_back(
          "inference uses HC0 sandwich standard errors; classical errors "
          "are reported alongside");
      return std::to_string(rep.regression->chosen.size()) + " terms, " +
             std::string(regress::criterion_name(rep.regression->criterion)) +
             " " + nlohmann::json(rep.regression->score).dump();
    });
  } else {
    skip_stage(rep, "regress",
               d == nullptr ? "ingest failed" : "features failed");
  }

  if (have_fit) {
    run_stage(rep, "amip", [&] {
      rep.amip_analysis = amip::analyze_all(
          rep.regression->fit, rep.regression->design, cfg.amip.alpha_cap);
      if (!rep.include_removal_ids)
        rep.warnings.push_back(
            "removal identifiers suppressed; set amip.include_removal_ids "
            "(or pass --ids) to list the dropped actors");
      std::uint32_t successes = 0;
      for (const auto& ts : rep.amip_analysis->by_target)
        successes += ts.successes;
      return std::to_string(rep.amip_analysis->results.size()) +
             " searches, " + std::to_string(successes) + " crossings";
    });
  } else {
    skip_stage(rep, "amip",
               have_frame ? "regression failed"
                          : (d == nullptr ? "ingest failed"
                                          : "features failed"));
  }

  for (const auto& [name, secs] : rep.timings_s)
    std::fprintf(stderr, "[timing] %s %.3fs\n", name.c_str(), secs);
  return rep;
}

}  // namespace

RegressionFrame build_frame(const logmodel::Dataset& d,
                            const FeatureSection& cfg) {
  const auto fm = habitfeat::extract_features(d, cfg.partition, cfg.session);
  const auto ev = habitfeat::habit_entropy_by_actor(d, cfg.partition,
                                                    cfg.session,
                                                    cfg.duration_mode);
  // Both id lists are subsequences of the sorted roster, so a two-pointer
  // merge finds the actors present in both.
  std::vector<std::size_t> fi, ei;
  std::size_t a = 0, b = 0;
  while (a < fm.actor_ids.size() && b < ev.actor_ids.size()) {
    if (fm.actor_ids[a] < ev.actor_ids[b]) {
      ++a;
    } else if (ev.actor_ids[b] < fm.actor_ids[a]) {
      ++b;
    } else {
      fi.push_back(a++);
      ei.push_back(b++);
    }
  }
  RegressionFrame frame;
  frame.dropped_low_activity = fm.n_dropped;
  frame.dropped_zero_weight = ev.n_dropped;
  frame.features.columns = fm.columns;
  frame.features.n_dropped = fm.n_dropped;
  const auto rows = static_cast<Eigen::Index>(fi.size());
  frame.features.values.resize(rows, fm.values.cols());
  frame.y.resize(rows);
  frame.features.actor_ids.reserve(fi.size());
  frame.features.gap_imputed.reserve(fi.size());
  frame.actor_ids.reserve(fi.size());
  for (std::size_t r = 0; r < fi.size(); ++r) {
    frame.features.values.row(static_cast<Eigen::Index>(r)) =
        fm.values.row(static_cast<Eigen::Index>(fi[r]));
    frame.y[static_cast<Eigen::Index>(r)] =
        ev.entropy[static_cast<Eigen::Index>(ei[r])];
    frame.features.actor_ids.push_back(fm.actor_ids[fi[r]]);
    frame.features.gap_imputed.push_back(fm.gap_imputed[fi[r]]);
    frame.actor_ids.push_back(fm.actor_ids[fi[r]]);
  }
  return frame;
}

Report run_pipeline(const PipelineConfig& cfg) {
  return run_pipeline_impl(nullptr, cfg, /*synthetic_input=*/false);
}

Report run_pipeline_on(const logmodel::Dataset& d, const PipelineConfig& cfg,
                       bool synthetic_input) {
  return run_pipeline_impl(&d, cfg, synthetic_input);
}

}  // namespace tracerisk::cli
