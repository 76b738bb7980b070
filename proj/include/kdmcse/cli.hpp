#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kdmcse/checkpoint.hpp"
#include "kdmcse/config.hpp"
#include "kdmcse/errors.hpp"
#include "kdmcse/eval.hpp"
#include "kdmcse/gradcheck.hpp"
#include "kdmcse/similarity.hpp"
#include "kdmcse/teacher_store.hpp"
#include "kdmcse/trainer.hpp"

namespace kdmcse {
namespace cli {

struct Options {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string objective;
  std::string seed;
  std::string text_features;
  std::string visual_features;
  std::string manifest;
  std::string sts;
  std::string out;
  std::string checkpoint;
  std::size_t bins = 20;
};

namespace detail {

inline void require_input(const std::string& path, const char* flag) {
  if (path.empty()) fail(ErrorCode::ConfigError, std::string(flag) + " is required");
  if (!std::filesystem::exists(path)) {
    fail(ErrorCode::ConfigError, std::string(flag) + ": no such file '" + path + "'");
  }
}

inline void require_out(const std::string& path) {
  if (path.empty()) fail(ErrorCode::ConfigError, "--out is required");
}

inline TrainConfig build_config(const Options& opt) {
  TrainConfig config;
  if (!opt.config_path.empty()) {
    require_input(opt.config_path, "--config");
    config = load_train_config(opt.config_path);
  }
  for (const std::string& assignment : opt.overrides) {
    apply_override(config, assignment);
  }
  if (!opt.objective.empty()) apply_config_entry(config, "objective", opt.objective);
  if (!opt.seed.empty()) apply_config_entry(config, "seed", opt.seed);
  try {
    config.validate();
  } catch (const Error& e) {
    // anything wrong with the assembled config is a validation failure
    fail(ErrorCode::ConfigError, e.what());
  }
  return config;
}

}  // namespace detail

inline int cmd_train(const Options& opt) {
  const TrainConfig config = detail::build_config(opt);
  detail::require_input(opt.manifest, "--manifest");
  detail::require_out(opt.out);
  const bool needs_teacher = config.objective != Objective::simcse;
  if (needs_teacher) {
    detail::require_input(opt.text_features, "--text-features");
    detail::require_input(opt.visual_features, "--visual-features");
  }

  const DatasetManifest manifest = load_manifest(opt.manifest);
  FeatureTable text_table, visual_table;
  const FeatureTable* text = nullptr;
  const FeatureTable* visual = nullptr;
  if (!opt.text_features.empty()) {
    detail::require_input(opt.text_features, "--text-features");
    text_table = load_features(opt.text_features, Modality::text);
    text = &text_table;
  }
  if (!opt.visual_features.empty()) {
    detail::require_input(opt.visual_features, "--visual-features");
    visual_table = load_features(opt.visual_features, Modality::visual);
    visual = &visual_table;
  }
  std::vector<StsPair> dev_pairs;
  if (!opt.sts.empty()) {
    detail::require_input(opt.sts, "--sts");
    dev_pairs = load_sts_tsv(opt.sts);
  }

  std::set<std::string> id_set(manifest.text_only_ids.begin(), manifest.text_only_ids.end());
  for (const auto& [sid, iid] : manifest.multimodal_pairs) {
    (void)iid;
    id_set.insert(sid);
  }
  for (const StsPair& pair : dev_pairs) {
    id_set.insert(pair.id_a);
    id_set.insert(pair.id_b);
  }
  const std::vector<std::string> ids(id_set.begin(), id_set.end());

  StudentDims dims;
  dims.dim_h = config.dim_h;
  dims.dim_g = config.dim_g;
  dims.dim_t = text ? text->dim() : config.dim_g;
  dims.dim_v = visual ? visual->dim() : config.dim_g;
  StudentParams student = init_student(ids, dims, config.dropout_rate, config.seed);

  const TrainHistory history = train(config, manifest, text, visual, dev_pairs, student);

  std::filesystem::create_directories(opt.out);
  const std::filesystem::path out(opt.out);
  write_file(out / "steps.csv", step_history_csv(history));
  write_file(out / "evals.csv", eval_history_csv(history));
  save_checkpoint(out / "checkpoint_best.bin", history.best_params);

  std::printf("train: steps=%zu best_step=%zu best_spearman=%s\n", history.steps.size(),
              history.best_step, format_double(history.best_spearman).c_str());
  return 0;
}

inline int cmd_eval(const Options& opt) {
  detail::require_input(opt.checkpoint, "--checkpoint");
  detail::require_input(opt.sts, "--sts");
  const StudentParams student = load_checkpoint(opt.checkpoint);
  const std::vector<StsPair> pairs = load_sts_tsv(opt.sts);
  const EvalReport report = evaluate_student(student, pairs);
  std::printf("spearman=%s alignment=%s uniformity=%s\n", format_double(report.spearman).c_str(),
              format_double(report.alignment).c_str(),
              format_double(report.uniformity).c_str());
  return 0;
}

namespace detail {

inline std::string histogram_csv(const std::vector<HistogramBin>& bins) {
  std::string out = "bin_lo,bin_hi,count\n";
  for (const HistogramBin& b : bins) {
    out += format_double(b.lo);
    out += ',';
    out += format_double(b.hi);
    out += ',';
    out += std::to_string(b.count);
    out += '\n';
  }
  return out;
}

}  // namespace detail

inline int cmd_stats(const Options& opt) {
  detail::require_input(opt.text_features, "--text-features");
  detail::require_input(opt.visual_features, "--visual-features");
  detail::require_input(opt.manifest, "--manifest");
  detail::require_out(opt.out);
  if (opt.bins < 1) fail(ErrorCode::ConfigError, "--bins must be >= 1");

  const FeatureTable text = load_features(opt.text_features, Modality::text);
  const FeatureTable visual = load_features(opt.visual_features, Modality::visual);
  const DatasetManifest manifest = load_manifest(opt.manifest);

  Batch text_rows(text.size()), visual_rows(visual.size());
  for (std::size_t r = 0; r < text.size(); ++r) text_rows[r] = text.row(r);
  for (std::size_t r = 0; r < visual.size(); ++r) visual_rows[r] = visual.row(r);

  const SimilarityMatrix tt =
      pairwise_cosine(text_rows, text_rows, Modality::text, Modality::text);
  const SimilarityMatrix tv =
      pairwise_cosine(text_rows, visual_rows, Modality::text, Modality::visual);

  std::map<std::size_t, std::set<std::size_t>> gold;
  for (const auto& [sid, iid] : manifest.multimodal_pairs) {
    auto trow = text.row_of.find(sid);
    if (trow == text.row_of.end()) fail(ErrorCode::UnknownId, "caption " + sid);
    auto vcol = visual.row_of.find(iid);
    if (vcol == visual.row_of.end()) fail(ErrorCode::UnknownId, "image " + iid);
    gold[vcol->second].insert(trow->second);
  }
  const std::map<std::size_t, std::size_t> ranks = true_caption_rank(tv, gold);

  std::filesystem::create_directories(opt.out);
  const std::filesystem::path out(opt.out);
  write_file(out / "histogram_tt.csv", detail::histogram_csv(similarity_histogram(tt, opt.bins)));
  write_file(out / "histogram_tv.csv", detail::histogram_csv(similarity_histogram(tv, opt.bins)));

  std::string rank_csv = "image_id,max_rank\n";
  for (const auto& [col, rank] : ranks) {
    rank_csv += visual.ids[col];
    rank_csv += ',';
    rank_csv += std::to_string(rank);
    rank_csv += '\n';
  }
  write_file(out / "ranks.csv", rank_csv);
  return 0;
}

inline int cmd_gradcheck(const Options& opt) {
  const TrainConfig config = detail::build_config(opt);
  const std::vector<GradCheckRow> rows =
      run_objective_gradchecks(config.objective_config, config.seed,
                               /*batches_per_objective=*/5, /*epsilon=*/1e-4,
                               /*tolerance=*/1e-4);
  std::printf("objective,slot,max_rel_err,pass\n");
  bool all_pass = true;
  for (const GradCheckRow& row : rows) {
    all_pass = all_pass && row.pass;
    std::printf("%s,%s,%s,%s\n", row.objective.c_str(), row.slot.c_str(),
                format_double(row.max_rel_err).c_str(), row.pass ? "true" : "false");
  }
  return all_pass ? 0 : 2;
}

inline int cmd_export(const Options& opt) {
  detail::require_input(opt.checkpoint, "--checkpoint");
  detail::require_out(opt.out);
  const StudentParams student = load_checkpoint(opt.checkpoint);
  std::filesystem::create_directories(opt.out);
  const std::string blob = kdmcse::detail::encode_tensor_blob(
      student.ids, student.base.rows, student.base.cols, student.base.data.data());
  write_file(std::filesystem::path(opt.out) / "embeddings.bin", blob);
  return 0;
}

/// Entry point behind main(). Exit codes: 0 success, 1 validation failure
/// (flags, config, missing inputs), 2 runtime failure (malformed files,
/// non-finite loss, failing gradient check).
inline int run(std::vector<std::string> args) {
  CLI::App app{"contrastive sentence-embedding engine with teacher-filtered negatives"};
  app.name("kdmcse");
  app.require_subcommand(1);

  Options opt;
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", opt.config_path, "flat key = value config file");
    cmd->add_option("--set", opt.overrides, "override, KEY=VALUE (repeatable)");
    cmd->add_option("--objective", opt.objective, "objective name override");
    cmd->add_option("--seed", opt.seed, "seed override");
  };

  CLI::App* train_cmd = app.add_subcommand("train", "train a student and keep the best checkpoint");
  add_common(train_cmd);
  train_cmd->add_option("--text-features", opt.text_features, "teacher text feature file");
  train_cmd->add_option("--visual-features", opt.visual_features, "teacher visual feature file");
  train_cmd->add_option("--manifest", opt.manifest, "dataset manifest");
  train_cmd->add_option("--sts", opt.sts, "dev pair TSV for periodic evaluation");
  train_cmd->add_option("--out", opt.out, "output directory");

  CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint on an STS pair file");
  add_common(eval_cmd);
  eval_cmd->add_option("--checkpoint", opt.checkpoint, "checkpoint file");
  eval_cmd->add_option("--sts", opt.sts, "pair TSV");

  CLI::App* stats_cmd =
      app.add_subcommand("stats", "similarity histograms and true-caption ranks");
  add_common(stats_cmd);
  stats_cmd->add_option("--text-features", opt.text_features, "teacher text feature file");
  stats_cmd->add_option("--visual-features", opt.visual_features, "teacher visual feature file");
  stats_cmd->add_option("--manifest", opt.manifest, "dataset manifest (gold caption mapping)");
  stats_cmd->add_option("--out", opt.out, "output directory");
  stats_cmd->add_option("--bins", opt.bins, "histogram bin count");

  CLI::App* gradcheck_cmd =
      app.add_subcommand("gradcheck", "finite-difference check of every objective");
  add_common(gradcheck_cmd);

  CLI::App* export_cmd = app.add_subcommand("export", "dump student embeddings as EMB1");
  add_common(export_cmd);
  export_cmd->add_option("--checkpoint", opt.checkpoint, "checkpoint file");
  export_cmd->add_option("--out", opt.out, "output directory");

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*train_cmd) return cmd_train(opt);
    if (*eval_cmd) return cmd_eval(opt);
    if (*stats_cmd) return cmd_stats(opt);
    if (*gradcheck_cmd) return cmd_gradcheck(opt);
    if (*export_cmd) return cmd_export(opt);
  } catch (const kdmcse::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return e.code() == ErrorCode::ConfigError ? 1 : 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: Internal: %s\n", e.what());
    return 2;
  }
  return 1;
}

}  // namespace cli
}  // namespace kdmcse
