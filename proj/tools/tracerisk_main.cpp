// Copyright 2026 The tracerisk Authors
// Use of this source code is governed by the Apache License, Version 2.0,
// which can be found in the LICENSE file.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tracerisk/errors.hpp"
#include "tracerisk/report.hpp"
#include "tracerisk/synthgen.hpp"
#include "tracerisk/version.hpp"

namespace {

using nlohmann::json;
using namespace tracerisk;

std::vector<std::string> split_list(const std::string& csv) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(csv);
  while (std::getline(in, item, ',')) out.push_back(item);
  return out;
}

template <typename T, typename Parse>
std::vector<T> parse_list(const std::string& csv, const char* what,
                          Parse parse) {
  std::vector<T> out;
  for (const std::string& s : split_list(csv)) {
    try {
      out.push_back(parse(s));
    } catch (const std::exception&) {
      throw ConfigError(std::string(what) + ": bad value: " + s);
    }
  }
  if (out.empty()) throw ConfigError(std::string(what) + ": empty list");
  return out;
}

// Every config key has a flag twin; values parsed here override the file.
struct Overrides {
  std::optional<std::string> config_path;
  std::optional<std::string> input, format, actor_col, ts_col, ts_format;
  std::optional<std::string> attr_cols;
  bool skip_bad_rows = false;
  std::optional<std::string> levels, epsilons, m, seeds, policy, attrs;
  std::optional<std::uint32_t> bootstrap_reps;
  std::optional<int> tz_offset_min;
  std::optional<std::int64_t> timeout_s, tail_cap_s;
  std::optional<std::string> duration_mode;
  std::optional<int> max_terms;
  std::optional<std::string> criterion;
  std::optional<double> alpha, alpha_cap;
  std::optional<bool> ids;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
};

void add_input_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config_path,
                  "JSON config file (flags override its keys)");
  cmd->add_option("-i,--input", o.input, "event log path");
  cmd->add_option("--format", o.format, "input format: csv|jsonl");
  cmd->add_option("--actor-col", o.actor_col, "actor id column (default actor)");
  cmd->add_option("--ts-col", o.ts_col, "timestamp column (default ts)");
  cmd->add_option("--ts-format", o.ts_format,
                  "timestamp format: iso8601|epoch");
  cmd->add_option("--attr-cols", o.attr_cols,
                  "extra attribute columns, comma separated");
  cmd->add_flag("--skip-bad-rows", o.skip_bad_rows,
                "count and skip malformed rows instead of failing");
}

void add_unicity_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--levels", o.levels,
                  "generalization levels, comma separated "
                  "(minute,quarter_hour,hour,date)");
  cmd->add_option("--epsilons", o.epsilons, "epsilon values, comma separated");
  cmd->add_option("--m", o.m, "sample size per seed, or \"all\"");
  cmd->add_option("--seeds", o.seeds,
                  "explicit unicity seeds, comma separated");
  cmd->add_option("--bootstrap-reps", o.bootstrap_reps,
                  "bootstrap replicates (default 1000)");
  cmd->add_option("--policy", o.policy,
                  "short-trajectory policy: exclude|clamp");
  cmd->add_option("--attrs", o.attrs,
                  "attribute columns joined into the QI tuple");
}

void add_feature_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--timeout-s", o.timeout_s,
                  "session inactivity timeout, seconds (default 1800)");
  cmd->add_option("--tail-cap-s", o.tail_cap_s,
                  "per-session tail cap, seconds (default 300)");
  cmd->add_option("--duration-mode", o.duration_mode,
                  "habit weights: session|count");
}

void add_regress_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--max-terms", o.max_terms,
                  "max predictors in subset search (default 5)");
  cmd->add_option("--criterion", o.criterion,
                  "selection criterion: adjusted_r2|aic");
  cmd->add_option("--alpha", o.alpha, "significance level (default 0.05)");
}

void add_amip_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--alpha-cap", o.alpha_cap,
                  "max removal share searched (default 0.5)");
  cmd->add_flag("--ids,!--no-ids", o.ids,
                "include removal ids in the report (default: synthetic "
                "inputs only)");
}

void add_run_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("-o,--out", o.out, "output directory (default .)");
  cmd->add_option("--seed", o.seed, "root seed for all randomness");
  cmd->add_option("--threads", o.threads,
                  "worker threads; never changes results");
  cmd->add_option("--tz-offset-min", o.tz_offset_min,
                  "local-time offset from UTC in minutes");
}

cli::PipelineConfig build_config(const Overrides& o) {
  cli::PipelineConfig cfg;
  if (o.config_path) {
    std::ifstream f(*o.config_path);
    if (!f) throw IoError("cannot read config file: " + *o.config_path);
    json j;
    try {
      j = json::parse(f);
    } catch (const json::exception& e) {
      throw ConfigError("config file: " + std::string(e.what()));
    }
    cfg = cli::PipelineConfig::from_json(j);
  }
  if (o.input) cfg.input.path = *o.input;
  if (o.format) {
    if (*o.format == "csv")
      cfg.input.format = logmodel::LogFormat::csv;
    else if (*o.format == "jsonl")
      cfg.input.format = logmodel::LogFormat::jsonl;
    else
      throw ConfigError("--format must be csv or jsonl");
  }
  if (o.actor_col) cfg.input.schema.actor_col = *o.actor_col;
  if (o.ts_col) cfg.input.schema.ts_col = *o.ts_col;
  if (o.ts_format) {
    if (*o.ts_format == "iso8601")
      cfg.input.schema.ts_format = logmodel::TsFormat::iso8601;
    else if (*o.ts_format == "epoch" || *o.ts_format == "epoch_seconds")
      cfg.input.schema.ts_format = logmodel::TsFormat::epoch_seconds;
    else
      throw ConfigError("--ts-format must be iso8601 or epoch");
  }
  if (o.attr_cols) cfg.input.schema.attr_cols = split_list(*o.attr_cols);
  if (o.skip_bad_rows) cfg.input.skip_bad_rows = true;

  if (o.levels) {
    cfg.unicity.levels.clear();
    for (const std::string& name : split_list(*o.levels)) {
      const auto lv = logmodel::level_from_name(name);
      if (!lv) throw ConfigError("--levels: unknown level: " + name);
      cfg.unicity.levels.push_back(*lv);
    }
  }
  if (o.epsilons)
    cfg.unicity.epsilons = parse_list<std::uint32_t>(
        *o.epsilons, "--epsilons",
        [](const std::string& s) { return std::stoul(s); });
  if (o.m) {
    if (*o.m == "all")
      cfg.unicity.sample_size = std::nullopt;
    else
      cfg.unicity.sample_size =
          static_cast<std::uint32_t>(std::stoul(*o.m));
  }
  if (o.seeds)
    cfg.unicity.seeds = parse_list<std::uint64_t>(
        *o.seeds, "--seeds",
        [](const std::string& s) { return std::stoull(s); });
  if (o.bootstrap_reps) cfg.unicity.bootstrap_reps = *o.bootstrap_reps;
  if (o.policy) {
    if (*o.policy == "exclude")
      cfg.unicity.policy = unicity::ShortTrajectoryPolicy::exclude;
    else if (*o.policy == "clamp")
      cfg.unicity.policy = unicity::ShortTrajectoryPolicy::clamp;
    else
      throw ConfigError("--policy must be exclude or clamp");
  }
  if (o.attrs) cfg.unicity.attrs = split_list(*o.attrs);
  if (o.tz_offset_min) {
    cfg.unicity.tz_offset_min = *o.tz_offset_min;
    cfg.features.partition.tz_offset_min = *o.tz_offset_min;
  }

  if (o.timeout_s) cfg.features.session.timeout_s = *o.timeout_s;
  if (o.tail_cap_s) cfg.features.session.tail_cap_s = *o.tail_cap_s;
  if (o.duration_mode) {
    if (*o.duration_mode == "session")
      cfg.features.duration_mode = habitfeat::DurationMode::session;
    else if (*o.duration_mode == "count")
      cfg.features.duration_mode = habitfeat::DurationMode::count;
    else
      throw ConfigError("--duration-mode must be session or count");
  }

  if (o.max_terms) cfg.regress.max_terms = *o.max_terms;
  if (o.criterion) {
    const auto c = regress::criterion_from_name(*o.criterion);
    if (!c) throw ConfigError("--criterion: unknown criterion: " + *o.criterion);
    cfg.regress.criterion = *c;
  }
  if (o.alpha) cfg.regress.alpha = *o.alpha;
  if (o.alpha_cap) cfg.amip.alpha_cap = *o.alpha_cap;
  if (o.ids) cfg.amip.include_removal_ids = *o.ids;
  if (o.out) cfg.output_dir = *o.out;
  if (o.seed) cfg.seed = *o.seed;
  if (o.threads) cfg.threads = *o.threads;
  return cfg;
}

logmodel::Dataset load_dataset(const cli::PipelineConfig& cfg,
                               logmodel::IngestStats* stats) {
  if (cfg.input.path.empty()) throw ConfigError("--input is required");
  return logmodel::parse_events_file(
      cfg.input.path, cfg.input.schema, cfg.input.format,
      cfg.input.skip_bad_rows ? logmodel::BadRowPolicy::skip_and_count
                              : logmodel::BadRowPolicy::fail_fast,
      stats);
}

std::ofstream open_out(const std::string& dir, const char* name) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory: " + dir);
  std::ofstream f(fs::path(dir) / name, std::ios::binary);
  if (!f) throw IoError(std::string("cannot write ") + name + " under " + dir);
  return f;
}

int run_ingest(const Overrides& o) {
  const auto cfg = build_config(o);
  logmodel::IngestStats stats;
  const auto d = load_dataset(cfg, &stats);
  json j = {{"rows", stats.rows},
            {"skipped", stats.skipped},
            {"actors", d.n_actors()},
            {"events", d.n_events()}};
  std::cout << j.dump(2) << '\n';
  return 0;
}

int run_unicity(const Overrides& o) {
  const auto cfg = build_config(o);
  const auto d = load_dataset(cfg, nullptr);

  logmodel::QISpec base;
  base.level = {cfg.unicity.levels.empty() ? logmodel::Level::minute
                                           : cfg.unicity.levels.front(),
                cfg.unicity.tz_offset_min};
  base.attrs = cfg.unicity.attrs;
  std::vector<logmodel::GeneralizationLevel> levels;
  for (const auto lv : cfg.unicity.levels)
    levels.push_back({lv, cfg.unicity.tz_offset_min});
  unicity::UnicityConfig ucfg;
  ucfg.epsilons = cfg.unicity.epsilons;
  ucfg.sample_size = cfg.unicity.sample_size;
  ucfg.seeds = cfg.resolved_seeds();
  ucfg.bootstrap_reps = cfg.unicity.bootstrap_reps;
  ucfg.policy = cfg.unicity.policy;
  const auto table =
      unicity::estimate_unicity(d, base, levels, ucfg, cfg.threads);

  cli::Report rep;
  rep.config = cfg;
  rep.unicity_table = table;
  std::cout << rep.to_json().at("unicity").dump(2) << '\n';
  if (o.out) {
    auto f = open_out(*o.out, "unicity.csv");
    cli::write_unicity_csv(table, f);
  }
  return 0;
}

int run_features(const Overrides& o) {
  const auto cfg = build_config(o);
  const auto d = load_dataset(cfg, nullptr);
  const auto fm = habitfeat::extract_features(d, cfg.features.partition,
                                              cfg.features.session);
  const auto ev = habitfeat::habit_entropy_by_actor(
      d, cfg.features.partition, cfg.features.session,
      cfg.features.duration_mode);

  json cols = json::array();
  for (const auto& c : fm.columns)
    cols.push_back({{"name", c.name}, {"definition", c.definition}});
  json imputed = json::array();
  for (std::size_t i = 0; i < fm.actor_ids.size(); ++i)
    if (fm.gap_imputed[i]) imputed.push_back(fm.actor_ids[i]);
  json j = {{"rows", fm.actor_ids.size()},
            {"dropped_low_activity", fm.n_dropped},
            {"dropped_zero_weight", ev.n_dropped},
            {"columns", std::move(cols)},
            {"gap_imputed_actors", std::move(imputed)}};
  std::cout << j.dump(2) << '\n';

  const std::string dir = o.out.value_or(".");
  {
    auto f = open_out(dir, "features.csv");
    cli::write_features_csv(fm, &ev, f);
  }
  {
    auto f = open_out(dir, "features_columns.json");
    f << j.dump(2) << '\n';
  }
  return 0;
}

int run_regress(const Overrides& o) {
  const auto cfg = build_config(o);
  const auto d = load_dataset(cfg, nullptr);
  const auto frame = cli::build_frame(d, cfg.features);
  if (frame.actor_ids.empty())
    throw ConfigError("regression frame is empty");

  cli::Report rep;
  rep.config = cfg;
  rep.regression = regress::select_model(frame.features, frame.y,
                                         cfg.regress.max_terms,
                                         cfg.regress.criterion,
                                         cfg.regress.alpha);
  const json j = rep.to_json().at("regress");
  std::cout << j.dump(2) << '\n';
  if (o.out) {
    auto f = open_out(*o.out, "regress.json");
    f << j.dump(2) << '\n';
  }
  return 0;
}

// Synthetic inputs carry a generator manifest next to the data file; only
// they default to naming the removed actors.
bool sibling_manifest_synthetic(const std::string& path) {
  namespace fs = std::filesystem;
  std::error_code ec;
  const fs::path dir = fs::path(path).parent_path();
  const fs::path manifest = (dir.empty() ? fs::path(".") : dir) / "manifest.json";
  if (!fs::exists(manifest, ec) || ec) return false;
  std::ifstream f(manifest);
  if (!f) return false;
  const auto j = json::parse(f, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object() || !j.contains("generator"))
    return false;
  const auto& gen = j.at("generator");
  return gen.is_object() && gen.contains("name") &&
         gen.at("name").is_string() &&
         gen.at("name").get<std::string>().find("-synthgen") !=
             std::string::npos;
}

int run_amip(const Overrides& o, const std::string& design_path) {
  const auto cfg = build_config(o);
  cli::Report rep;
  rep.config = cfg;

  if (!design_path.empty()) {
    std::ifstream f(design_path);
    if (!f) throw IoError("cannot read design file: " + design_path);
    const auto dm = synthgen::read_design_csv(f);
    const auto fit = regress::fit_ols(dm, cfg.regress.alpha);
    rep.amip_analysis = amip::analyze_all(fit, dm, cfg.amip.alpha_cap);
    rep.include_removal_ids = cfg.amip.include_removal_ids.value_or(
        sibling_manifest_synthetic(design_path));
    for (std::uint32_t i = 0; i < static_cast<std::uint32_t>(dm.X.rows()); ++i)
      rep.frame_actor_ids.push_back("row" + std::to_string(i));
  } else {
    const auto d = load_dataset(cfg, nullptr);
    const auto frame = cli::build_frame(d, cfg.features);
    if (frame.actor_ids.empty())
      throw ConfigError("regression frame is empty");
    rep.regression = regress::select_model(frame.features, frame.y,
                                           cfg.regress.max_terms,
                                           cfg.regress.criterion,
                                           cfg.regress.alpha);
    rep.amip_analysis = amip::analyze_all(
        rep.regression->fit, rep.regression->design, cfg.amip.alpha_cap);
    rep.include_removal_ids = cfg.amip.include_removal_ids.value_or(
        sibling_manifest_synthetic(cfg.input.path));
    rep.frame_actor_ids = frame.actor_ids;
  }

  const json j = rep.to_json().at("amip");
  std::cout << j.dump(2) << '\n';
  if (o.out) {
    {
      auto f = open_out(*o.out, "amip.json");
      f << j.dump(2) << '\n';
    }
    auto f = open_out(*o.out, "amip_alpha_hist.csv");
    cli::write_alpha_hist_csv(*rep.amip_analysis, f);
  }
  return 0;
}

int run_pipeline_cmd(const Overrides& o) {
  const auto cfg = build_config(o);
  const auto rep = cli::run_pipeline(cfg);
  cli::emit_report(rep, cfg.output_dir);
  for (const auto& s : rep.stages)
    std::fprintf(stderr, "[stage] %s: %s%s%s\n", s.name.c_str(),
                 s.status.c_str(), s.detail.empty() ? "" : " - ",
                 s.detail.c_str());
  std::cout << "report written to " << cfg.output_dir << "/report.json\n";
  return rep.ok() ? 0 : 1;
}

synthgen::WeeklySlot parse_slot(const std::string& s) {
  synthgen::WeeklySlot slot;
  int h = 0, min = 0;
  if (std::sscanf(s.c_str(), "%d@%d:%d+%d", &slot.day_of_week, &h, &min,
                  &slot.duration_min) != 4)
    throw ConfigError("--slot must look like DOW@HH:MM+MINUTES, got: " + s);
  slot.start_min = h * 60 + min;
  return slot;
}

struct SynthLogArgs {
  synthgen::LogGenConfig cfg;
  std::vector<std::string> slot_specs;
  std::string mode = "self_paced";
  std::string format = "csv";
  std::string out = ".";
};

int run_synth_log(SynthLogArgs& a) {
  if (a.mode == "scheduled")
    a.cfg.mode = synthgen::LogMode::scheduled;
  else if (a.mode == "self_paced")
    a.cfg.mode = synthgen::LogMode::self_paced;
  else
    throw ConfigError("--mode must be scheduled or self_paced");
  for (const auto& s : a.slot_specs) a.cfg.slots.push_back(parse_slot(s));
  const auto gen = synthgen::gen_event_log(a.cfg);

  const bool csv = a.format == "csv";
  if (!csv && a.format != "jsonl")
    throw ConfigError("--format must be csv or jsonl");
  const char* data_name = csv ? "events.csv" : "events.jsonl";
  {
    auto f = open_out(a.out, data_name);
    if (csv)
      synthgen::write_events_csv(gen.dataset, f);
    else
      synthgen::write_events_jsonl(gen.dataset, f);
  }
  {
    auto f = open_out(a.out, "manifest.json");
    f << gen.manifest.to_json().dump(2) << '\n';
  }
  std::cout << a.out << "/" << data_name << "\n"
            << a.out << "/manifest.json\n";
  return 0;
}

struct SynthRegArgs {
  synthgen::RegGenConfig cfg;
  std::string beta_csv;
  std::string preset;
  std::string out = ".";
};

int run_synth_reg(SynthRegArgs& a) {
  if (!a.preset.empty()) {
    if (a.preset == "fragile")
      a.cfg = synthgen::fragile_preset();
    else if (a.preset == "robust")
      a.cfg = synthgen::robust_preset();
    else
      throw ConfigError("--preset must be fragile or robust");
  }
  if (!a.beta_csv.empty())
    a.cfg.beta = parse_list<double>(
        a.beta_csv, "--beta", [](const std::string& s) { return std::stod(s); });
  const auto gen = synthgen::gen_regression_data(a.cfg);

  {
    auto f = open_out(a.out, "design.csv");
    synthgen::write_design_csv(gen.design, f);
  }
  json manifest = {
      {"generator",
       {{"name", std::string(kToolName) + "-synthgen"},
        {"version", kToolVersion}}},
      {"kind", "regression"},
      {"config",
       {{"n", a.cfg.n},
        {"p", a.cfg.p},
        {"beta", a.cfg.beta},
        {"noise_sigma", a.cfg.noise_sigma},
        {"planted_count", a.cfg.planted_count},
        {"planted_leverage", a.cfg.planted_leverage},
        {"planted_residual", a.cfg.planted_residual},
        {"seed", a.cfg.seed}}},
      {"truth", gen.truth.to_json()}};
  {
    auto f = open_out(a.out, "manifest.json");
    f << manifest.dump(2) << '\n';
  }
  std::cout << a.out << "/design.csv\n" << a.out << "/manifest.json\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"re-identification risk and regression-robustness toolkit"};
  app.set_version_flag("--version",
                       std::string(kToolName) + " " + kToolVersion);
  app.require_subcommand(1);

  Overrides o;

  auto* ingest = app.add_subcommand("ingest", "parse a log and summarize it");
  add_input_flags(ingest, o);

  auto* unicity_cmd =
      app.add_subcommand("unicity", "estimate unicity across levels");
  add_input_flags(unicity_cmd, o);
  add_unicity_flags(unicity_cmd, o);
  add_run_flags(unicity_cmd, o);

  auto* features_cmd =
      app.add_subcommand("features", "extract behavioral features");
  add_input_flags(features_cmd, o);
  add_feature_flags(features_cmd, o);
  add_run_flags(features_cmd, o);

  auto* regress_cmd =
      app.add_subcommand("regress", "fit habit entropy on features");
  add_input_flags(regress_cmd, o);
  add_feature_flags(regress_cmd, o);
  add_regress_flags(regress_cmd, o);
  add_run_flags(regress_cmd, o);

  auto* amip_cmd = app.add_subcommand(
      "amip", "find small removal sets that flip regression conclusions");
  std::string design_path;
  amip_cmd->add_option("--design", design_path,
                       "fit a y,f1,...,fp design CSV instead of a log");
  add_input_flags(amip_cmd, o);
  add_feature_flags(amip_cmd, o);
  add_regress_flags(amip_cmd, o);
  add_amip_flags(amip_cmd, o);
  add_run_flags(amip_cmd, o);

  auto* pipeline_cmd =
      app.add_subcommand("pipeline", "run every stage and emit the report");
  add_input_flags(pipeline_cmd, o);
  add_unicity_flags(pipeline_cmd, o);
  add_feature_flags(pipeline_cmd, o);
  add_regress_flags(pipeline_cmd, o);
  add_amip_flags(pipeline_cmd, o);
  add_run_flags(pipeline_cmd, o);

  auto* synth = app.add_subcommand("synth", "deterministic data generators");
  synth->require_subcommand(1);

  SynthLogArgs log_args;
  auto* synth_log = synth->add_subcommand("log", "generate an event log");
  synth_log->add_option("--actors", log_args.cfg.n_actors, "actor count");
  synth_log->add_option("--events-min", log_args.cfg.events_min,
                        "min events per actor");
  synth_log->add_option("--events-max", log_args.cfg.events_max,
                        "max events per actor");
  synth_log->add_option("--period-days", log_args.cfg.period_days,
                        "study period length");
  synth_log->add_option("--mode", log_args.mode,
                        "event placement: self_paced|scheduled");
  synth_log->add_option("--slot", log_args.slot_specs,
                        "weekly slot DOW@HH:MM+MINUTES (repeatable)");
  synth_log->add_option("--twin-pairs", log_args.cfg.twin_pairs,
                        "actor pairs with identical timestamps");
  synth_log->add_option("--seed", log_args.cfg.seed, "generator seed");
  synth_log->add_option("--format", log_args.format, "output: csv|jsonl");
  synth_log->add_option("-o,--out", log_args.out, "output directory");

  SynthRegArgs reg_args;
  auto* synth_reg =
      synth->add_subcommand("reg", "generate a regression benchmark");
  synth_reg->add_option("--n", reg_args.cfg.n, "bulk row count");
  synth_reg->add_option("--p", reg_args.cfg.p, "feature count");
  synth_reg->add_option("--beta", reg_args.beta_csv,
                        "true coefficients, intercept first, comma separated");
  synth_reg->add_option("--sigma", reg_args.cfg.noise_sigma, "noise sd");
  synth_reg->add_option("--planted-count", reg_args.cfg.planted_count,
                        "high-leverage rows to plant");
  synth_reg->add_option("--planted-leverage", reg_args.cfg.planted_leverage,
                        "feature magnitude of planted rows");
  synth_reg->add_option("--planted-residual", reg_args.cfg.planted_residual,
                        "residual offset of planted rows");
  synth_reg->add_option("--preset", reg_args.preset,
                        "named dataset: fragile|robust");
  synth_reg->add_option("--seed", reg_args.cfg.seed, "generator seed");
  synth_reg->add_option("-o,--out", reg_args.out, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*ingest) return run_ingest(o);
    if (*unicity_cmd) return run_unicity(o);
    if (*features_cmd) return run_features(o);
    if (*regress_cmd) return run_regress(o);
    if (*amip_cmd) return run_amip(o, design_path);
    if (*pipeline_cmd) return run_pipeline_cmd(o);
    if (*synth_log) return run_synth_log(log_args);
    if (*synth_reg) return run_synth_reg(reg_args);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
