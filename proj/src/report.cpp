// Copyright 2026 The tracerisk Authors
// Use of this source code is governed by the Apache License, Version 2.0,
// which can be found in the LICENSE file.

#include "tracerisk/report.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "tracerisk/errors.hpp"
#include "tracerisk/rng.hpp"
#include "tracerisk/version.hpp"

namespace tracerisk::cli {

namespace {

using nlohmann::json;

void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const std::string& ctx) {
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const char* a : allowed)
      if (key == a) {
        known = true;
        break;
      }
    if (!known)
      throw ConfigError("unknown config key: " + ctx + "." + key);
  }
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  const auto it = j.find(key);
  if (it == j.end()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("bad value for config key: ") + key);
  }
}

// Doubles exactly as the JSON report prints them, so markdown and CSV stay
// lossless mirrors of report.json.
std::string fmt(double v) { return json(v).dump(); }

std::string fmt_target(amip::Target t) { return amip::target_name(t); }

}  // namespace

PipelineConfig PipelineConfig::from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config root must be a JSON object");
  check_keys(j,
             {"input", "unicity", "features", "regress", "amip", "output_dir",
              "seed", "threads"},
             "config");
  PipelineConfig cfg;

  if (j.contains("input")) {
    const json& in = j.at("input");
    check_keys(in,
               {"path", "format", "actor_col", "ts_col", "ts_format",
                "attr_cols", "skip_bad_rows"},
               "input");
    cfg.input.path = get_or<std::string>(in, "path", "");
    const std::string format = get_or<std::string>(in, "format", "csv");
    if (format == "csv")
      cfg.input.format = logmodel::LogFormat::csv;
    else if (format == "jsonl")
      cfg.input.format = logmodel::LogFormat::jsonl;
    else
      throw ConfigError("input.format must be \"csv\" or \"jsonl\"");
    cfg.input.schema.actor_col =
        get_or<std::string>(in, "actor_col", "actor");
    cfg.input.schema.ts_col = get_or<std::string>(in, "ts_col", "ts");
    const std::string tsf = get_or<std::string>(in, "ts_format", "iso8601");
    if (tsf == "iso8601")
      cfg.input.schema.ts_format = logmodel::TsFormat::iso8601;
    else if (tsf == "epoch_seconds")
      cfg.input.schema.ts_format = logmodel::TsFormat::epoch_seconds;
    else
      throw ConfigError(
          "input.ts_format must be \"iso8601\" or \"epoch_seconds\"");
    cfg.input.schema.attr_cols =
        get_or<std::vector<std::string>>(in, "attr_cols", {});
    cfg.input.skip_bad_rows = get_or<bool>(in, "skip_bad_rows", false);
  }

  if (j.contains("unicity")) {
    const json& u = j.at("unicity");
    check_keys(u,
               {"levels", "epsilons", "m", "seeds", "bootstrap_reps",
                "policy", "tz_offset_min", "attrs"},
               "unicity");
    if (u.contains("levels")) {
      cfg.unicity.levels.clear();
      for (const auto& lv : u.at("levels")) {
        const auto level = logmodel::level_from_name(lv.get<std::string>());
        if (!level)
          throw ConfigError("unicity.levels: unknown level: " +
                            lv.get<std::string>());
        cfg.unicity.levels.push_back(*level);
      }
    }
    cfg.unicity.epsilons =
        get_or<std::vector<std::uint32_t>>(u, "epsilons",
                                           cfg.unicity.epsilons);
    if (u.contains("m")) {
      const json& m = u.at("m");
      if (m.is_string() && m.get<std::string>() == "all")
        cfg.unicity.sample_size = std::nullopt;
      else if (m.is_number_unsigned() || m.is_number_integer())
        cfg.unicity.sample_size = m.get<std::uint32_t>();
      else
        throw ConfigError("unicity.m must be a positive integer or \"all\"");
    }
    if (u.contains("seeds"))
      cfg.unicity.seeds = u.at("seeds").get<std::vector<std::uint64_t>>();
    cfg.unicity.bootstrap_reps =
        get_or<std::uint32_t>(u, "bootstrap_reps", 1000);
    const std::string policy = get_or<std::string>(u, "policy", "exclude");
    if (policy == "exclude")
      cfg.unicity.policy = unicity::ShortTrajectoryPolicy::exclude;
    else if (policy == "clamp")
      cfg.unicity.policy = unicity::ShortTrajectoryPolicy::clamp;
    else
      throw ConfigError("unicity.policy must be \"exclude\" or \"clamp\"");
    cfg.unicity.tz_offset_min = get_or<int>(u, "tz_offset_min", 0);
    cfg.unicity.attrs = get_or<std::vector<std::string>>(u, "attrs", {});
  }

  if (j.contains("features")) {
    const json& f = j.at("features");
    check_keys(f,
               {"timeout_s", "tail_cap_s", "tz_offset_min", "duration_mode",
                "window_bounds_min", "window_labels"},
               "features");
    cfg.features.session.timeout_s = get_or<std::int64_t>(f, "timeout_s", 1800);
    cfg.features.session.tail_cap_s =
        get_or<std::int64_t>(f, "tail_cap_s", 300);
    cfg.features.partition.tz_offset_min = get_or<int>(f, "tz_offset_min", 0);
    const std::string mode = get_or<std::string>(f, "duration_mode", "session");
    if (mode == "session")
      cfg.features.duration_mode = habitfeat::DurationMode::session;
    else if (mode == "count")
      cfg.features.duration_mode = habitfeat::DurationMode::count;
    else
      throw ConfigError(
          "features.duration_mode must be \"session\" or \"count\"");
    if (f.contains("window_bounds_min")) {
      const auto bounds = f.at("window_bounds_min").get<std::vector<int>>();
      if (bounds.size() != 5)
        throw ConfigError("features.window_bounds_min needs 5 values");
      std::copy(bounds.begin(), bounds.end(),
                cfg.features.partition.bounds_min.begin());
    }
    if (f.contains("window_labels")) {
      const auto labels =
          f.at("window_labels").get<std::vector<std::string>>();
      if (labels.size() != 4)
        throw ConfigError("features.window_labels needs 4 values");
      std::copy(labels.begin(), labels.end(),
                cfg.features.partition.labels.begin());
    }
    cfg.features.partition.validate();
  }

  if (j.contains("regress")) {
    const json& r = j.at("regress");
    check_keys(r, {"max_terms", "criterion", "alpha"}, "regress");
    cfg.regress.max_terms = get_or<int>(r, "max_terms", 5);
    const std::string crit = get_or<std::string>(r, "criterion", "adjusted_r2");
    const auto c = regress::criterion_from_name(crit);
    if (!c) throw ConfigError("regress.criterion: unknown criterion: " + crit);
    cfg.regress.criterion = *c;
    cfg.regress.alpha = get_or<double>(r, "alpha", 0.05);
  }

  if (j.contains("amip")) {
    const json& a = j.at("amip");
    check_keys(a, {"alpha_cap", "include_removal_ids"}, "amip");
    cfg.amip.alpha_cap = get_or<double>(a, "alpha_cap", 0.5);
    if (a.contains("include_removal_ids"))
      cfg.amip.include_removal_ids = a.at("include_removal_ids").get<bool>();
  }

  cfg.output_dir = get_or<std::string>(j, "output_dir", ".");
  cfg.seed = get_or<std::uint64_t>(j, "seed", 1);
  cfg.threads = get_or<unsigned>(j, "threads", 1);
  return cfg;
}

std::vector<std::uint64_t> PipelineConfig::resolved_seeds() const {
  if (!unicity.seeds.empty()) return unicity.seeds;
  std::vector<std::uint64_t> seeds(10);
  for (std::size_t i = 0; i < seeds.size(); ++i)
    seeds[i] = derive_stream(seed, 0x5eed, i);
  return seeds;
}

json PipelineConfig::to_json() const {
  json j;
  j["input"] = {
      {"path", input.path},
      {"format", input.format == logmodel::LogFormat::csv ? "csv" : "jsonl"},
      {"actor_col", input.schema.actor_col},
      {"ts_col", input.schema.ts_col},
      {"ts_format", input.schema.ts_format == logmodel::TsFormat::iso8601
                        ? "iso8601"
                        : "epoch_seconds"},
      {"attr_cols", input.schema.attr_cols},
      {"skip_bad_rows", input.skip_bad_rows},
  };
  json levels = json::array();
  for (const auto level : unicity.levels)
    levels.push_back(logmodel::level_name(level));
  j["unicity"] = {
      {"levels", std::move(levels)},
      {"epsilons", unicity.epsilons},
      {"m", unicity.sample_size ? json(*unicity.sample_size) : json("all")},
      {"seeds", resolved_seeds()},
      {"bootstrap_reps", unicity.bootstrap_reps},
      {"policy",
       unicity.policy == unicity::ShortTrajectoryPolicy::exclude ? "exclude"
                                                                 : "clamp"},
      {"tz_offset_min", unicity.tz_offset_min},
      {"attrs", unicity.attrs},
  };
  j["features"] = {
      {"timeout_s", features.session.timeout_s},
      {"tail_cap_s", features.session.tail_cap_s},
      {"tz_offset_min", features.partition.tz_offset_min},
      {"duration_mode",
       features.duration_mode == habitfeat::DurationMode::session ? "session"
                                                                  : "count"},
      {"window_bounds_min", features.partition.bounds_min},
      {"window_labels", features.partition.labels},
  };
  j["regress"] = {
      {"max_terms", regress.max_terms},
      {"criterion", regress::criterion_name(regress.criterion)},
      {"alpha", regress.alpha},
  };
  json amip_j = {{"alpha_cap", amip.alpha_cap}};
  if (amip.include_removal_ids)
    amip_j["include_removal_ids"] = *amip.include_removal_ids;
  j["amip"] = std::move(amip_j);
  j["output_dir"] = output_dir;
  j["seed"] = seed;
  return j;
}

bool Report::ok() const {
  for (const StageNote& s : stages)
    if (s.status == "error") return false;
  return true;
}

json Report::to_json() const {
  json j;
  j["schema_version"] = 1;
  j["tool"] = {{"name", kToolName}, {"version", kToolVersion}};
  j["config"] = config.to_json();
  j["warnings"] = warnings;

  json stages_j = json::array();
  for (const StageNote& s : stages) {
    json e = {{"name", s.name}, {"status", s.status}};
    if (!s.detail.empty()) e["detail"] = s.detail;
    stages_j.push_back(std::move(e));
  }
  j["stages"] = std::move(stages_j);

  if (ingest) {
    j["ingest"] = {
        {"rows", ingest->rows},
        {"skipped", ingest->skipped},
        {"actors", ingest->actors},
    };
  }

  if (unicity_table) {
    json rows = json::array();
    for (const auto& r : unicity_table->rows) {
      rows.push_back({
          {"level", logmodel::level_name(r.level.level)},
          {"tz_offset_min", r.level.tz_offset_min},
          {"epsilon", r.epsilon},
          {"unicity_mean", r.mean},
          {"ci_low", r.ci_low},
          {"ci_high", r.ci_high},
          {"n_eligible", r.n_eligible},
          {"n_excluded", r.n_excluded},
          {"m", r.m},
          {"seeds", r.n_seeds},
          {"per_seed", r.per_seed},
      });
    }
    j["unicity"] = {{"rows", std::move(rows)}};
  }

  if (features) {
    json cols = json::array();
    for (const auto& c : features->columns)
      cols.push_back({{"name", c.name}, {"definition", c.definition}});
    j["features"] = {
        {"frame_rows", features->frame_rows},
        {"dropped_low_activity", features->dropped_low_activity},
        {"dropped_zero_weight", features->dropped_zero_weight},
        {"imputed_gap_rows", features->imputed_gap_rows},
        {"columns", std::move(cols)},
        {"entropy", {{"min", features->entropy_min},
                     {"mean", features->entropy_mean},
                     {"max", features->entropy_max}}},
    };
  }

  if (regression) {
    const auto& sel = *regression;
    json coef = json::array();
    for (Eigen::Index k = 0; k < sel.fit.beta.size(); ++k) {
      coef.push_back({
          {"name", sel.design.names[static_cast<std::size_t>(k)]},
          {"beta", sel.fit.beta[k]},
          {"se_classical", sel.fit.se_classical[k]},
          {"se_sandwich", sel.fit.se_sandwich[k]},
          {"z", sel.fit.z[k]},
          {"significant", sel.fit.significant(k)},
      });
    }
    json evaluated = json::array();
    for (const auto& e : sel.evaluated)
      evaluated.push_back({{"subset", e.subset}, {"score", e.score}});
    j["regress"] = {
        {"criterion", regress::criterion_name(sel.criterion)},
        {"exhaustive", sel.exhaustive},
        {"chosen", sel.chosen},
        {"score", sel.score},
        {"n", sel.fit.n},
        {"r2", sel.fit.r2},
        {"adj_r2", sel.fit.adj_r2},
        {"sigma2", sel.fit.sigma2},
        {"alpha", sel.fit.alpha},
        {"z_crit", sel.fit.z_crit},
        {"coefficients", std::move(coef)},
        {"evaluated", std::move(evaluated)},
    };
  }

  if (amip_analysis) {
    const auto& an = *amip_analysis;
    json results = json::array();
    for (const auto& r : an.results) {
      json e = {
          {"coef", r.coef},
          {"coef_name", r.coef_name},
          {"target", fmt_target(r.target)},
          {"success", r.success},
          {"confirmed", r.confirmed},
          {"n_drop", r.n_drop},
          {"alpha", r.alpha},
          {"qoi_base", r.qoi_base},
          {"qoi_predicted", r.qoi_predicted},
          {"qoi_refit", r.qoi_refit},
      };
      if (!r.note.empty()) e["note"] = r.note;
      if (include_removal_ids && r.success) {
        e["removed_rows"] = r.removed;
        json ids = json::array();
        for (const std::uint32_t i : r.removed)
          if (i < frame_actor_ids.size()) ids.push_back(frame_actor_ids[i]);
        if (ids.size() == r.removed.size()) e["removed_ids"] = std::move(ids);
      }
      results.push_back(std::move(e));
    }
    json summary;
    for (const amip::Target t :
         {amip::Target::sign, amip::Target::significance, amip::Target::both}) {
      const auto& ts = an.by_target[static_cast<std::size_t>(t)];
      summary[fmt_target(t)] = {
          {"attempts", ts.attempts},
          {"successes", ts.successes},
          {"confirmed", ts.confirmed},
          {"success_rate", ts.attempts > 0 ? static_cast<double>(ts.successes) /
                                                 static_cast<double>(ts.attempts)
                                           : 0.0},
          {"alphas", ts.alphas},
      };
    }
    j["amip"] = {
        {"alpha_cap", an.alpha_cap},
        {"include_removal_ids", include_removal_ids},
        {"results", std::move(results)},
        {"summary", std::move(summary)},
    };
  }
  return j;
}

std::string Report::to_markdown() const {
  const json j = to_json();
  std::ostringstream md;
  md << "# " << kToolName << " report\n\n";
  md << "tool: " << kToolName << " " << kToolVersion << "\n\n";

  md << "## Stages\n\n| stage | status | detail |\n|---|---|---|\n";
  for (const StageNote& s : stages)
    md << "| " << s.name << " | " << s.status << " | " << s.detail << " |\n";
  md << "\n";

  if (!warnings.empty()) {
    md << "## Notes\n\n";
    for (const auto& w : warnings) md << "- " << w << "\n";
    md << "\n";
  }

  if (ingest) {
    md << "## Ingest\n\n";
    md << "rows: " << ingest->rows << ", skipped: " << ingest->skipped
       << ", actors: " << ingest->actors << "\n\n";
  }

  if (unicity_table) {
    md << "## Unicity\n\n";
    md << "| level | epsilon | mean | ci_low | ci_high | eligible | excluded "
          "| m | seeds |\n|---|---|---|---|---|---|---|---|---|\n";
    for (const auto& r : unicity_table->rows) {
      md << "| " << logmodel::level_name(r.level.level) << " | " << r.epsilon
         << " | " << fmt(r.mean) << " | " << fmt(r.ci_low) << " | "
         << fmt(r.ci_high) << " | " << r.n_eligible << " | " << r.n_excluded
         << " | " << r.m << " | " << r.n_seeds << " |\n";
    }
    md << "\n";
  }

  if (features) {
    md << "## Features\n\n";
    md << "frame rows: " << features->frame_rows
       << ", dropped (fewer than 2 events): " << features->dropped_low_activity
       << ", dropped (zero weight): " << features->dropped_zero_weight
       << ", gap-imputed rows: " << features->imputed_gap_rows << "\n\n";
    md << "entropy: min " << fmt(features->entropy_min) << ", mean "
       << fmt(features->entropy_mean) << ", max " << fmt(features->entropy_max)
       << "\n\n";
  }

  if (regression) {
    const auto& sel = *regression;
    md << "## Regression\n\n";
    md << "criterion: " << regress::criterion_name(sel.criterion)
       << (sel.exhaustive ? " (exhaustive)" : " (greedy forward)")
       << ", score: " << fmt(sel.score) << ", n: " << sel.fit.n
       << ", R2: " << fmt(sel.fit.r2) << ", adj R2: " << fmt(sel.fit.adj_r2)
       << "\n\n";
    md << "| coefficient | beta | se (HC0) | se (classical) | z | significant "
          "|\n|---|---|---|---|---|---|\n";
    for (Eigen::Index k = 0; k < sel.fit.beta.size(); ++k) {
      md << "| " << sel.design.names[static_cast<std::size_t>(k)] << " | "
         << fmt(sel.fit.beta[k]) << " | " << fmt(sel.fit.se_sandwich[k])
         << " | " << fmt(sel.fit.se_classical[k]) << " | " << fmt(sel.fit.z[k])
         << " | " << (sel.fit.significant(k) ? "yes" : "no") << " |\n";
    }
    md << "\n";
  }

  if (amip_analysis) {
    const auto& an = *amip_analysis;
    md << "## Robustness (influence-based removal)\n\n";
    md << "alpha cap: " << fmt(an.alpha_cap) << "\n\n";
    md << "| target | attempts | successes | confirmed |\n|---|---|---|---|\n";
    for (const amip::Target t :
         {amip::Target::sign, amip::Target::significance, amip::Target::both}) {
      const auto& ts = an.by_target[static_cast<std::size_t>(t)];
      md << "| " << fmt_target(t) << " | " << ts.attempts << " | "
         << ts.successes << " | " << ts.confirmed << " |\n";
    }
    md << "\n| coefficient | target | success | confirmed | n_drop | alpha | "
          "qoi_base | qoi_refit |\n|---|---|---|---|---|---|---|---|\n";
    for (const auto& r : an.results) {
      md << "| " << r.coef_name << " | " << fmt_target(r.target) << " | "
         << (r.success ? "yes" : "no") << " | " << (r.confirmed ? "yes" : "no")
         << " | " << r.n_drop << " | " << fmt(r.alpha) << " | "
         << fmt(r.qoi_base) << " | " << fmt(r.qoi_refit) << " |\n";
    }
    md << "\n";
  }
  return md.str();
}

void write_unicity_csv(const unicity::UnicityTable& table, std::ostream& out) {
  out << "level,epsilon,unicity_mean,ci_low,ci_high,n_eligible,n_excluded,m,"
         "seeds\n";
  for (const auto& r : table.rows) {
    out << logmodel::level_name(r.level.level) << ',' << r.epsilon << ','
        << fmt(r.mean) << ',' << fmt(r.ci_low) << ',' << fmt(r.ci_high) << ','
        << r.n_eligible << ',' << r.n_excluded << ',' << r.m << ','
        << r.n_seeds << '\n';
  }
}

void write_alpha_hist_csv(const amip::Analysis& analysis, std::ostream& out) {
  out << "target,bin_low,bin_high,count\n";
  constexpr int kBins = 20;
  for (const amip::Target t :
       {amip::Target::sign, amip::Target::significance, amip::Target::both}) {
    const auto& ts = analysis.by_target[static_cast<std::size_t>(t)];
    std::array<std::uint32_t, kBins> counts{};
    for (const double a : ts.alphas) {
      int bin = static_cast<int>(a * kBins);
      if (bin >= kBins) bin = kBins - 1;
      if (bin < 0) bin = 0;
      ++counts[static_cast<std::size_t>(bin)];
    }
    for (int b = 0; b < kBins; ++b) {
      out << fmt_target(t) << ',' << fmt(b * (1.0 / kBins)) << ','
          << fmt((b + 1) * (1.0 / kBins)) << ',' << counts[b] << '\n';
    }
  }
}

void write_features_csv(const habitfeat::FeatureMatrix& fm,
                        const habitfeat::EntropyVector* entropy,
                        std::ostream& out) {
  out << "actor";
  for (const auto& c : fm.columns) out << ',' << c.name;
  if (entropy) out << ",habit_entropy";
  out << ",gap_imputed\n";
  std::size_t e = 0;
  for (std::size_t i = 0; i < fm.actor_ids.size(); ++i) {
    out << fm.actor_ids[i];
    for (Eigen::Index j = 0; j < fm.values.cols(); ++j)
      out << ',' << fmt(fm.values(static_cast<Eigen::Index>(i), j));
    if (entropy) {
      while (e < entropy->actor_ids.size() &&
             entropy->actor_ids[e] < fm.actor_ids[i])
        ++e;
      if (e < entropy->actor_ids.size() &&
          entropy->actor_ids[e] == fm.actor_ids[i])
        out << ',' << fmt(entropy->entropy[static_cast<Eigen::Index>(e)]);
      else
        out << ',';
    }
    out << ',' << static_cast<int>(fm.gap_imputed[i]) << '\n';
  }
}

void emit_report(const Report& report, const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory: " + out_dir);

  auto open = [&](const char* name) {
    std::ofstream f(fs::path(out_dir) / name, std::ios::binary);
    if (!f) throw IoError(std::string("cannot write ") + name + " under " +
                          out_dir);
    return f;
  };

  {
    auto f = open("report.json");
    f << report.to_json().dump(2) << '\n';
  }
  {
    auto f = open("report.md");
    f << report.to_markdown();
  }
  if (report.unicity_table) {
    auto f = open("unicity.csv");
    write_unicity_csv(*report.unicity_table, f);
  }
  if (report.amip_analysis) {
    auto f = open("amip_alpha_hist.csv");
    write_alpha_hist_csv(*report.amip_analysis, f);
  }
}

}  // namespace tracerisk::cli
