#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "kdmcse/encoder.hpp"
#include "kdmcse/errors.hpp"
#include "kdmcse/eval.hpp"
#include "kdmcse/io.hpp"
#include "kdmcse/objectives.hpp"
#include "kdmcse/rng.hpp"
#include "kdmcse/teacher_store.hpp"

namespace kdmcse {

enum class Objective { simcse, mcse, kdmcse, kdmcse_no_margin, kdmcse_no_filter };
enum class OptimizerKind { sgd, adam };

inline const char* objective_name(Objective o) {
  switch (o) {
    case Objective::simcse: return "simcse";
    case Objective::mcse: return "mcse";
    case Objective::kdmcse: return "kdmcse";
    case Objective::kdmcse_no_margin: return "kdmcse_no_margin";
    case Objective::kdmcse_no_filter: return "kdmcse_no_filter";
  }
  return "unknown";
}

inline Objective parse_objective(const std::string& name) {
  if (name == "simcse") return Objective::simcse;
  if (name == "mcse") return Objective::mcse;
  if (name == "kdmcse") return Objective::kdmcse;
  if (name == "kdmcse_no_margin") return Objective::kdmcse_no_margin;
  if (name == "kdmcse_no_filter") return Objective::kdmcse_no_filter;
  fail(ErrorCode::ConfigError, "unknown objective '" + name + "'");
}

inline const char* optimizer_name(OptimizerKind o) {
  return o == OptimizerKind::sgd ? "sgd" : "adam";
}

inline OptimizerKind parse_optimizer(const std::string& name) {
  if (name == "sgd") return OptimizerKind::sgd;
  if (name == "adam") return OptimizerKind::adam;
  fail(ErrorCode::ConfigError, "unknown optimizer '" + name + "'");
}

constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEpsilon = 1e-8;

struct TrainConfig {
  Objective objective = Objective::kdmcse;
  std::size_t batch_size = 64;
  double learning_rate = 3e-5;
  std::size_t steps = 1000;
  std::size_t eval_every = 125;
  std::uint64_t seed = 5;
  OptimizerKind optimizer = OptimizerKind::adam;
  double dropout_rate = 0.1;
  std::size_t dim_h = 64;
  std::size_t dim_g = 32;
  ObjectiveConfig objective_config;

  void validate() const {
    if (batch_size < 1) fail(ErrorCode::ConfigError, "batch_size must be >= 1");
    if (eval_every < 1) fail(ErrorCode::ConfigError, "eval_every must be >= 1");
    if (!(learning_rate > 0.0)) fail(ErrorCode::ConfigError, "learning_rate must be > 0");
    if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
      fail(ErrorCode::ConfigError, "dropout_rate must be in [0, 1)");
    }
    if (dim_h < 1 || dim_g < 1) fail(ErrorCode::ConfigError, "dims must be >= 1");
    objective_config.validate();
  }
};

struct DatasetManifest {
  std::vector<std::string> text_only_ids;
  std::vector<std::pair<std::string, std::string>> multimodal_pairs;  // (sentence, image)
};

/// Manifest file: one record per line, `text<TAB>id` or
/// `pair<TAB>sentence_id<TAB>image_id`; `#` starts a comment line.
inline DatasetManifest load_manifest(const std::filesystem::path& path) {
  const std::string data = read_file(path);
  DatasetManifest manifest;
  std::istringstream stream(data);
  std::string line;
  while (std::getline(stream, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    std::istringstream fields(line);
    std::string kind;
    std::getline(fields, kind, '\t');
    if (kind == "text") {
      std::string id;
      if (!std::getline(fields, id, '\t') || id.empty()) {
        fail(ErrorCode::MalformedFile, path.string() + ": text record without id");
      }
      manifest.text_only_ids.push_back(id);
    } else if (kind == "pair") {
      std::string sid, iid;
      if (!std::getline(fields, sid, '\t') || !std::getline(fields, iid, '\t') ||
          sid.empty() || iid.empty()) {
        fail(ErrorCode::MalformedFile, path.string() + ": pair record needs two ids");
      }
      manifest.multimodal_pairs.emplace_back(sid, iid);
    } else {
      fail(ErrorCode::MalformedFile, path.string() + ": unknown record '" + kind + "'");
    }
  }
  return manifest;
}

inline void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest) {
  std::string out;
  for (const std::string& id : manifest.text_only_ids) {
    out += "text\t";
    out += id;
    out += '\n';
  }
  for (const auto& [sid, iid] : manifest.multimodal_pairs) {
    out += "pair\t";
    out += sid;
    out += '\t';
    out += iid;
    out += '\n';
  }
  write_file(path, out);
}

/// p = ceil(|D| / |D^M|): every p-th step draws a multimodal batch.
inline std::size_t paired_step(std::size_t size_d, std::size_t size_dm) {
  if (size_d < 1 || size_dm < 1) {
    fail(ErrorCode::ConfigError, "paired_step: both dataset sizes must be >= 1");
  }
  return (size_d + size_dm - 1) / size_dm;
}

enum class Branch { text_only, multimodal };

inline const char* branch_name(Branch b) {
  return b == Branch::text_only ? "text_only" : "multimodal";
}

inline Branch step_kind(std::size_t t, std::size_t p) {
  if (p < 1) fail(ErrorCode::ConfigError, "step_kind: p must be >= 1");
  return t % p == 0 ? Branch::multimodal : Branch::text_only;
}

struct StepRecord {
  std::size_t step = 0;
  Branch branch = Branch::text_only;
  double loss = 0.0;
};

struct EvalRecord {
  std::size_t step = 0;
  EvalReport report;
};

struct TrainHistory {
  std::vector<StepRecord> steps;
  std::vector<EvalRecord> evals;
  StudentParams best_params;
  std::size_t best_step = 0;
  double best_spearman = std::nan("");
  bool best_from_eval = false;
};

// ---- parameter tensor traversal (fixed canonical order) ----

struct TensorView {
  std::string name;
  double* data = nullptr;
  std::size_t rows = 0;
  std::size_t cols = 0;

  std::size_t size() const { return rows * cols; }
};

namespace detail {

inline void append_head_views(const std::string& prefix, AffineHead& head, HeadGrads* grads,
                              std::vector<TensorView>& out) {
  if (grads == nullptr) {
    out.push_back({prefix + ".w1", head.w1.data.data(), head.w1.rows, head.w1.cols});
    out.push_back({prefix + ".b1", head.b1.data(), 1, head.b1.size()});
    out.push_back({prefix + ".w2", head.w2.data.data(), head.w2.rows, head.w2.cols});
    out.push_back({prefix + ".b2", head.b2.data(), 1, head.b2.size()});
  } else {
    out.push_back({prefix + ".w1", grads->w1.data.data(), grads->w1.rows, grads->w1.cols});
    out.push_back({prefix + ".b1", grads->b1.data(), 1, grads->b1.size()});
    out.push_back({prefix + ".w2", grads->w2.data.data(), grads->w2.rows, grads->w2.cols});
    out.push_back({prefix + ".b2", grads->b2.data(), 1, grads->b2.size()});
  }
}

}  // namespace detail

inline std::vector<TensorView> tensor_views(StudentParams& params) {
  std::vector<TensorView> views;
  views.push_back({"base", params.base.data.data(), params.base.rows, params.base.cols});
  detail::append_head_views("head_simcse", params.head_simcse, nullptr, views);
  detail::append_head_views("head_grounded", params.head_grounded, nullptr, views);
  detail::append_head_views("head_teacher_text", params.head_teacher_text, nullptr, views);
  detail::append_head_views("head_teacher_visual", params.head_teacher_visual, nullptr, views);
  return views;
}

inline std::vector<TensorView> tensor_views(StudentParams& params, StudentGrads& grads) {
  std::vector<TensorView> views;
  views.push_back({"base", grads.base.data.data(), grads.base.rows, grads.base.cols});
  detail::append_head_views("head_simcse", params.head_simcse, &grads.simcse, views);
  detail::append_head_views("head_grounded", params.head_grounded, &grads.grounded, views);
  detail::append_head_views("head_teacher_text", params.head_teacher_text, &grads.teacher_text,
                            views);
  detail::append_head_views("head_teacher_visual", params.head_teacher_visual,
                            &grads.teacher_visual, views);
  return views;
}

struct AdamState {
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
  std::size_t t = 0;
};

inline AdamState init_adam_state(StudentParams& params) {
  AdamState state;
  for (const TensorView& view : tensor_views(params)) {
    state.m.emplace_back(view.size(), 0.0);
    state.v.emplace_back(view.size(), 0.0);
  }
  return state;
}

/// One optimizer update. SGD is a plain step; Adam uses the standard
/// bias-corrected moments with beta1=0.9, beta2=0.999, eps=1e-8.
inline void optimizer_step(StudentParams& params, StudentGrads& grads, AdamState& state,
                           OptimizerKind kind, double learning_rate) {
  std::vector<TensorView> pviews = tensor_views(params);
  std::vector<TensorView> gviews = tensor_views(params, grads);
  if (pviews.size() != gviews.size()) fail(ErrorCode::ShapeMismatch, "optimizer_step: tensors");
  if (kind == OptimizerKind::adam) {
    if (state.m.size() != pviews.size()) {
      fail(ErrorCode::ShapeMismatch, "optimizer_step: adam state");
    }
    ++state.t;
  }
  const double bias1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(state.t));
  const double bias2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(state.t));
  for (std::size_t ti = 0; ti < pviews.size(); ++ti) {
    TensorView& p = pviews[ti];
    const TensorView& g = gviews[ti];
    if (p.rows != g.rows || p.cols != g.cols) {
      fail(ErrorCode::ShapeMismatch, "optimizer_step: " + p.name);
    }
    if (kind == OptimizerKind::sgd) {
      for (std::size_t k = 0; k < p.size(); ++k) {
        p.data[k] -= learning_rate * g.data[k];
      }
    } else {
      std::vector<double>& m = state.m[ti];
      std::vector<double>& v = state.v[ti];
      for (std::size_t k = 0; k < p.size(); ++k) {
        const double grad = g.data[k];
        m[k] = kAdamBeta1 * m[k] + (1.0 - kAdamBeta1) * grad;
        v[k] = kAdamBeta2 * v[k] + (1.0 - kAdamBeta2) * grad * grad;
        const double m_hat = m[k] / bias1;
        const double v_hat = v[k] / bias2;
        p.data[k] -= learning_rate * m_hat / (std::sqrt(v_hat) + kAdamEpsilon);
      }
    }
  }
}

namespace detail {

/// Without-replacement sampling: a fresh shuffled order per epoch, batches
/// drawn sequentially, partial tail batches dropped.
class EpochSampler {
 public:
  EpochSampler(std::size_t count, std::uint64_t seed, std::uint64_t tag)
      : count_(count), seed_(seed), tag_(tag) {
    order_.resize(count);
    for (std::size_t i = 0; i < count; ++i) order_[i] = i;
    reshuffle();
  }

  std::vector<std::size_t> next_batch(std::size_t batch_size) {
    if (batch_size > count_) batch_size = count_;
    if (pos_ + batch_size > count_) reshuffle();
    std::vector<std::size_t> batch(order_.begin() + static_cast<std::ptrdiff_t>(pos_),
                                   order_.begin() + static_cast<std::ptrdiff_t>(pos_ + batch_size));
    pos_ += batch_size;
    return batch;
  }

 private:
  void reshuffle() {
    SplitMix64 rng(derive_seed(seed_, tag_, epoch_));
    rng.shuffle(order_);
    pos_ = 0;
    ++epoch_;
  }

  std::size_t count_;
  std::uint64_t seed_;
  std::uint64_t tag_;
  std::vector<std::size_t> order_;
  std::size_t pos_ = 0;
  std::uint64_t epoch_ = 0;
};

inline ObjectiveConfig effective_objective_config(const TrainConfig& config) {
  ObjectiveConfig cfg = config.objective_config;
  if (config.objective == Objective::kdmcse_no_margin) cfg.margin = 0.0;
  if (config.objective == Objective::kdmcse_no_filter) cfg.filter_enabled = false;
  return cfg;
}

}  // namespace detail

/// Interleaved training: text-only batches apply the dropout-positive
/// objective; every p-th step draws a multimodal batch and applies the
/// configured distilled objective. The teacher tables are read-only; only
/// the student is updated. Fully deterministic given the config seed.
inline TrainHistory train(const TrainConfig& config, const DatasetManifest& manifest,
                          const FeatureTable* teacher_text, const FeatureTable* teacher_visual,
                          const std::vector<StsPair>& dev_pairs, StudentParams& student) {
  config.validate();
  const bool needs_multimodal = config.objective != Objective::simcse;

  if (needs_multimodal) {
    if (manifest.multimodal_pairs.empty()) {
      fail(ErrorCode::InconsistentManifest,
           std::string(objective_name(config.objective)) + " needs multimodal pairs");
    }
    if (teacher_text == nullptr || teacher_visual == nullptr) {
      fail(ErrorCode::InconsistentManifest, "multimodal objectives need both teacher tables");
    }
    for (const auto& [sid, iid] : manifest.multimodal_pairs) {
      if (!teacher_text->has(sid)) {
        fail(ErrorCode::InconsistentManifest, "no teacher text feature for " + sid);
      }
      if (!teacher_visual->has(iid)) {
        fail(ErrorCode::InconsistentManifest, "no teacher visual feature for " + iid);
      }
    }
    const std::size_t dim_g = student.head_grounded.out_dim();
    if (student.head_teacher_text.out_dim() != dim_g ||
        student.head_teacher_visual.out_dim() != dim_g) {
      fail(ErrorCode::ShapeMismatch, "projection heads disagree on the grounded dim");
    }
    if (student.head_teacher_text.in_dim() != teacher_text->dim() ||
        student.head_teacher_visual.in_dim() != teacher_visual->dim()) {
      fail(ErrorCode::ShapeMismatch, "teacher head input dims do not match the tables");
    }
  }
  for (const std::string& id : manifest.text_only_ids) {
    if (!student.row_of.count(id)) {
      fail(ErrorCode::InconsistentManifest, "student has no embedding for " + id);
    }
  }
  for (const auto& [sid, iid] : manifest.multimodal_pairs) {
    (void)iid;
    if (!student.row_of.count(sid)) {
      fail(ErrorCode::InconsistentManifest, "student has no embedding for " + sid);
    }
  }
  if (manifest.text_only_ids.empty() && manifest.multimodal_pairs.empty()) {
    fail(ErrorCode::InconsistentManifest, "manifest is empty");
  }
  if (!needs_multimodal && manifest.text_only_ids.empty()) {
    fail(ErrorCode::InconsistentManifest, "simcse needs text records in the manifest");
  }

  // Branch schedule: p = ceil(|D| / |D^M|); degenerate manifests collapse to
  // a single branch, and simcse never leaves the text branch.
  std::size_t p = 0;  // 0 means "no multimodal steps"
  bool always_multimodal = false;
  if (needs_multimodal) {
    if (manifest.text_only_ids.empty()) {
      always_multimodal = true;
    } else {
      p = paired_step(manifest.text_only_ids.size(), manifest.multimodal_pairs.size());
    }
  }

  const ObjectiveConfig obj_cfg = detail::effective_objective_config(config);
  detail::EpochSampler text_sampler(std::max<std::size_t>(manifest.text_only_ids.size(), 1),
                                    config.seed, 1);
  detail::EpochSampler pair_sampler(std::max<std::size_t>(manifest.multimodal_pairs.size(), 1),
                                    config.seed, 2);
  AdamState adam = init_adam_state(student);

  TrainHistory history;
  history.steps.reserve(config.steps);

  for (std::size_t t = 1; t <= config.steps; ++t) {
    Branch branch = Branch::text_only;
    if (always_multimodal) {
      branch = Branch::multimodal;
    } else if (p >= 1) {
      branch = step_kind(t, p);
    }

    double loss_value = 0.0;
    StudentGrads grads = zero_grads(student);
    try {
      if (branch == Branch::text_only) {
        const std::vector<std::size_t> batch = text_sampler.next_batch(config.batch_size);
        const std::size_t n = batch.size();
        std::vector<SentenceForward> fwd_z(n), fwd_zp(n);
        Batch h_z(n), h_zp(n);
        for (std::size_t i = 0; i < n; ++i) {
          const std::string& id = manifest.text_only_ids[batch[i]];
          fwd_z[i] = forward_sentence(student, id, DropoutMask{derive_seed(config.seed, t, 1, i)},
                                      HeadKind::simcse);
          fwd_zp[i] = forward_sentence(student, id, DropoutMask{derive_seed(config.seed, t, 2, i)},
                                       HeadKind::simcse);
          h_z[i] = fwd_z[i].proj.output;
          h_zp[i] = fwd_zp[i].proj.output;
        }
        const LossResult loss = simcse_loss(h_z, h_zp, obj_cfg);
        loss_value = loss.mean;
        for (std::size_t i = 0; i < n; ++i) {
          sentence_backward(student, HeadKind::simcse, fwd_z[i],
                            loss.grads.at(Slot::view_z)[i], grads);
          sentence_backward(student, HeadKind::simcse, fwd_zp[i],
                            loss.grads.at(Slot::view_z_prime)[i], grads);
        }
      } else {
        const std::vector<std::size_t> batch = pair_sampler.next_batch(config.batch_size);
        const std::size_t n = batch.size();
        std::vector<SentenceForward> fwd_z(n), fwd_zp(n);
        Batch s_z(n), s_zp(n);
        std::vector<std::string> sentence_ids(n), image_ids(n);
        for (std::size_t i = 0; i < n; ++i) {
          const auto& [sid, iid] = manifest.multimodal_pairs[batch[i]];
          sentence_ids[i] = sid;
          image_ids[i] = iid;
          fwd_z[i] = forward_sentence(student, sid, DropoutMask{derive_seed(config.seed, t, 3, i)},
                                      HeadKind::grounded);
          fwd_zp[i] = forward_sentence(student, sid, DropoutMask{derive_seed(config.seed, t, 4, i)},
                                       HeadKind::grounded);
          s_z[i] = fwd_z[i].proj.output;
          s_zp[i] = fwd_zp[i].proj.output;
        }
        const Batch t_raw = gather(*teacher_text, sentence_ids);
        const Batch v_raw = gather(*teacher_visual, image_ids);
        Batch t_proj(n), v_proj(n);
        for (std::size_t i = 0; i < n; ++i) {
          t_proj[i] = project(student, t_raw[i], HeadKind::teacher_text);
          v_proj[i] = project(student, v_raw[i], HeadKind::teacher_visual);
        }

        LossResult loss;
        if (config.objective == Objective::mcse) {
          loss = mcse_loss(s_z, s_zp, v_proj, obj_cfg);
        } else {
          loss = kdmcse_loss(s_z, s_zp, v_proj, t_proj, soft_labels(t_raw, v_raw), obj_cfg);
        }
        loss_value = loss.mean;
        for (std::size_t i = 0; i < n; ++i) {
          sentence_backward(student, HeadKind::grounded, fwd_z[i],
                            loss.grads.at(Slot::view_z)[i], grads);
          sentence_backward(student, HeadKind::grounded, fwd_zp[i],
                            loss.grads.at(Slot::view_z_prime)[i], grads);
        }
      }
    } catch (const Error& e) {
      if (e.code() == ErrorCode::NonFiniteLoss) {
        fail(ErrorCode::NonFiniteLoss, "step " + std::to_string(t) + ": " + e.what());
      }
      throw;
    }

    optimizer_step(student, grads, adam, config.optimizer, config.learning_rate);
    history.steps.push_back({t, branch, loss_value});

    if (t % config.eval_every == 0 && dev_pairs.size() >= 2) {
      EvalRecord record;
      record.step = t;
      record.report = evaluate_student(student, dev_pairs);
      history.evals.push_back(record);
      if (!history.best_from_eval || record.report.spearman > history.best_spearman) {
        history.best_from_eval = true;
        history.best_spearman = record.report.spearman;
        history.best_step = t;
        history.best_params = student;
      }
    }
  }

  if (!history.best_from_eval) {
    history.best_params = student;
    history.best_step = config.steps;
    history.best_spearman = std::nan("");
  }
  return history;
}

inline std::string step_history_csv(const TrainHistory& history) {
  std::string out = "step,branch,loss\n";
  for (const StepRecord& r : history.steps) {
    out += std::to_string(r.step);
    out += ',';
    out += branch_name(r.branch);
    out += ',';
    out += format_double(r.loss);
    out += '\n';
  }
  return out;
}

inline std::string eval_history_csv(const TrainHistory& history) {
  std::string out = "step,spearman,alignment,uniformity\n";
  for (const EvalRecord& r : history.evals) {
    out += std::to_string(r.step);
    out += ',';
    out += format_double(r.report.spearman);
    out += ',';
    out += format_double(r.report.alignment);
    out += ',';
    out += format_double(r.report.uniformity);
    out += '\n';
  }
  return out;
}

}  // namespace kdmcse
