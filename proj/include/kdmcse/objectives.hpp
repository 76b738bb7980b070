#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "kdmcse/errors.hpp"
#include "kdmcse/numerics.hpp"
#include "kdmcse/similarity.hpp"

namespace kdmcse {

/// Which batch tensor a gradient belongs to. The two student views carry
/// real gradients; teacher slots are reported as exact zeros (the teacher is
/// frozen, so the losses are defined with a stop-gradient on its features).
enum class Slot { view_z, view_z_prime, teacher_visual, teacher_text };

inline const char* slot_name(Slot s) {
  switch (s) {
    case Slot::view_z: return "view_z";
    case Slot::view_z_prime: return "view_z_prime";
    case Slot::teacher_visual: return "teacher_visual";
    case Slot::teacher_text: return "teacher_text";
  }
  return "unknown";
}

/// Loss values plus analytic gradients of the batch-mean loss with respect
/// to every row of every participating batch.
struct LossResult {
  std::vector<double> per_anchor;
  double mean = 0.0;
  std::map<Slot, Batch> grads;
};

struct ObjectiveConfig {
  double tau = 0.05;         // temperature of the text-only objective
  double tau_prime = 0.05;   // temperature of the multimodal objectives
  double margin = 0.125;     // angular margin m_c in radians
  double threshold = 0.9;    // teacher-similarity filter threshold
  bool sum_over_both_dropout_views = true;
  bool filter_enabled = true;
  FilterOrientation filter_orientation = FilterOrientation::exclude_high;

  void validate() const {
    if (!(tau > 0.0)) fail(ErrorCode::ConfigError, "tau must be > 0");
    if (!(tau_prime > 0.0)) fail(ErrorCode::ConfigError, "tau_prime must be > 0");
    if (!(margin >= 0.0)) fail(ErrorCode::MarginOutOfRange, "margin must be >= 0");
    if (!(threshold >= -1.0 && threshold <= 1.0)) {
      fail(ErrorCode::ThresholdOutOfRange, "threshold must be in [-1, 1]");
    }
  }
};

namespace detail {

struct PairGeom {
  double cos = 0.0;
  double na2 = 0.0;
  double nb2 = 0.0;
  double inv_ab = 0.0;  // 1 / sqrt(na2 * nb2)
};

inline PairGeom pair_geom(const Vector& a, const Vector& b) {
  PairGeom g;
  g.na2 = squared_norm(a);
  g.nb2 = squared_norm(b);
  if (g.na2 == 0.0 || g.nb2 == 0.0) {
    fail(ErrorCode::ZeroNormVector, "loss input has a zero-norm row");
  }
  g.inv_ab = 1.0 / std::sqrt(g.na2 * g.nb2);
  double c = dot(a, b) * g.inv_ab;
  if (c > 1.0) c = 1.0;
  if (c < -1.0) c = -1.0;
  g.cos = c;
  return g;
}

/// Adds w * d cos(a,b)/da to ga.
inline void add_cosine_grad_left(const Vector& a, const Vector& b, const PairGeom& g,
                                 double w, Vector& ga) {
  const double ca = g.cos / g.na2;
  for (std::size_t k = 0; k < a.size(); ++k) {
    ga[k] += w * (b[k] * g.inv_ab - ca * a[k]);
  }
}

/// Adds w * d cos(a,b)/db to gb.
inline void add_cosine_grad_right(const Vector& a, const Vector& b, const PairGeom& g,
                                  double w, Vector& gb) {
  const double cb = g.cos / g.nb2;
  for (std::size_t k = 0; k < b.size(); ++k) {
    gb[k] += w * (a[k] * g.inv_ab - cb * b[k]);
  }
}

/// logit = cos(theta(c) + shift) / tau for theta = arccos(c), together with
/// its derivative with respect to c. shift == 0 short-circuits to the
/// identity so margin-free paths reduce bitwise to plain-cosine logits.
struct AngularLogit {
  double value = 0.0;
  double dcos = 0.0;
};

inline AngularLogit angular_logit(double c, double shift, double inv_tau) {
  if (shift == 0.0) return {c * inv_tau, inv_tau};
  const double theta = std::acos(c);
  double sin_theta = std::sin(theta);
  if (sin_theta < 1e-12) sin_theta = 1e-12;  // arccos slope is unbounded at |c| = 1
  return {std::cos(theta + shift) * inv_tau,
          std::sin(theta + shift) / sin_theta * inv_tau};
}

/// -log softmax at `pos` over `logits`; fills d loss / d logit. The
/// normalizer is accumulated in ascending value order so per-anchor losses
/// are exactly invariant under batch permutations.
struct SoftmaxLoss {
  double loss = 0.0;
  std::vector<double> dlogit;
};

inline SoftmaxLoss softmax_cross_entropy(const std::vector<double>& logits,
                                         std::size_t pos) {
  std::vector<double> sorted(logits);
  std::sort(sorted.begin(), sorted.end());
  const double max_logit = sorted.back();
  double sum = 0.0;
  for (double v : sorted) sum += std::exp(v - max_logit);
  SoftmaxLoss out;
  out.loss = max_logit + std::log(sum) - logits[pos];
  out.dlogit.resize(logits.size());
  for (std::size_t k = 0; k < logits.size(); ++k) {
    out.dlogit[k] = std::exp(logits[k] - max_logit) / sum;
  }
  out.dlogit[pos] -= 1.0;
  return out;
}

inline std::size_t checked_batch(const Batch& batch, const char* name) {
  if (batch.empty()) fail(ErrorCode::EmptyBatch, std::string(name) + " is empty");
  const std::size_t dim = batch.front().size();
  if (dim == 0) fail(ErrorCode::DimensionMismatch, std::string(name) + " has empty rows");
  for (const Vector& row : batch) {
    if (row.size() != dim) {
      fail(ErrorCode::DimensionMismatch, std::string(name) + " has ragged rows");
    }
  }
  return dim;
}

inline void require_same_batch(std::size_t n, const Batch& batch, const char* name) {
  if (batch.size() != n) {
    fail(ErrorCode::BatchLengthMismatch,
         std::string(name) + ": expected " + std::to_string(n) + " rows, got " +
             std::to_string(batch.size()));
  }
}

inline Batch zero_like(const Batch& batch) {
  Batch zeros(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) zeros[i].assign(batch[i].size(), 0.0);
  return zeros;
}

inline void finalize(LossResult& result) {
  result.mean = stable_sum(result.per_anchor) / static_cast<double>(result.per_anchor.size());
  if (!std::isfinite(result.mean)) {
    fail(ErrorCode::NonFiniteLoss, "batch loss is not finite");
  }
}

}  // namespace detail

/// Dropout-positive InfoNCE: the positive for anchor i is its own second
/// dropout view, negatives are the other rows of the second view.
inline LossResult simcse_loss(const Batch& h_z, const Batch& h_z_prime,
                              const ObjectiveConfig& cfg) {
  cfg.validate();
  const std::size_t dim = detail::checked_batch(h_z, "h_z");
  detail::require_same_batch(h_z.size(), h_z_prime, "h_z_prime");
  if (detail::checked_batch(h_z_prime, "h_z_prime") != dim) {
    fail(ErrorCode::DimensionMismatch, "simcse_loss: view dims differ");
  }
  const std::size_t n = h_z.size();
  const double inv_tau = 1.0 / cfg.tau;

  LossResult result;
  result.per_anchor.resize(n);
  result.grads[Slot::view_z] = detail::zero_like(h_z);
  result.grads[Slot::view_z_prime] = detail::zero_like(h_z_prime);

  std::vector<detail::PairGeom> geom(n);
  std::vector<double> logits(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      geom[j] = detail::pair_geom(h_z[i], h_z_prime[j]);
      logits[j] = geom[j].cos * inv_tau;
    }
    const detail::SoftmaxLoss sm = detail::softmax_cross_entropy(logits, i);
    result.per_anchor[i] = sm.loss;
    for (std::size_t j = 0; j < n; ++j) {
      const double w = sm.dlogit[j] * inv_tau / static_cast<double>(n);
      detail::add_cosine_grad_left(h_z[i], h_z_prime[j], geom[j], w,
                                   result.grads[Slot::view_z][i]);
      detail::add_cosine_grad_right(h_z[i], h_z_prime[j], geom[j], w,
                                    result.grads[Slot::view_z_prime][j]);
    }
  }
  detail::finalize(result);
  return result;
}

/// Multimodal InfoNCE against frozen teacher features, summed over both
/// dropout views. Gradients flow to the student views only; the teacher slot
/// is reported as exact zeros.
inline LossResult mcse_loss(const Batch& s_z, const Batch& s_z_prime, const Batch& v,
                            const ObjectiveConfig& cfg,
                            Slot teacher_slot = Slot::teacher_visual) {
  cfg.validate();
  const std::size_t dim = detail::checked_batch(s_z, "s_z");
  detail::require_same_batch(s_z.size(), s_z_prime, "s_z_prime");
  detail::require_same_batch(s_z.size(), v, "teacher batch");
  if (detail::checked_batch(s_z_prime, "s_z_prime") != dim ||
      detail::checked_batch(v, "teacher batch") != dim) {
    fail(ErrorCode::DimensionMismatch, "mcse_loss: batches must share the grounded dim");
  }
  const std::size_t n = s_z.size();
  const double inv_tau = 1.0 / cfg.tau_prime;

  LossResult result;
  result.per_anchor.assign(n, 0.0);
  result.grads[Slot::view_z] = detail::zero_like(s_z);
  result.grads[Slot::view_z_prime] = detail::zero_like(s_z_prime);
  result.grads[teacher_slot] = detail::zero_like(v);

  std::vector<detail::PairGeom> geom(n);
  std::vector<double> logits(n);
  for (const Slot view : {Slot::view_z, Slot::view_z_prime}) {
    const Batch& s = view == Slot::view_z ? s_z : s_z_prime;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        geom[j] = detail::pair_geom(s[i], v[j]);
        logits[j] = geom[j].cos * inv_tau;
      }
      const detail::SoftmaxLoss sm = detail::softmax_cross_entropy(logits, i);
      result.per_anchor[i] += sm.loss;
      for (std::size_t j = 0; j < n; ++j) {
        const double w = sm.dlogit[j] * inv_tau / static_cast<double>(n);
        detail::add_cosine_grad_left(s[i], v[j], geom[j], w, result.grads[view][i]);
      }
    }
  }
  detail::finalize(result);
  return result;
}

/// mcse_loss with the denominator restricted to mask-approved negatives.
inline LossResult filtered_infonce(const Batch& s_z, const Batch& s_z_prime,
                                   const Batch& m, const FilterMask& mask,
                                   const ObjectiveConfig& cfg,
                                   Slot teacher_slot = Slot::teacher_visual) {
  cfg.validate();
  const std::size_t dim = detail::checked_batch(s_z, "s_z");
  detail::require_same_batch(s_z.size(), s_z_prime, "s_z_prime");
  detail::require_same_batch(s_z.size(), m, "teacher batch");
  if (detail::checked_batch(s_z_prime, "s_z_prime") != dim ||
      detail::checked_batch(m, "teacher batch") != dim) {
    fail(ErrorCode::DimensionMismatch, "filtered_infonce: batches must share the grounded dim");
  }
  const std::size_t n = s_z.size();
  if (mask.rows != n || mask.cols != n) {
    fail(ErrorCode::MaskShapeMismatch,
         "filtered_infonce: mask is " + std::to_string(mask.rows) + "x" +
             std::to_string(mask.cols) + ", batch is " + std::to_string(n));
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (mask.at(i, i) != 1) {
      fail(ErrorCode::DegenerateDenominator,
           "filtered_infonce: mask diagonal " + std::to_string(i) + " is zero");
    }
  }
  const double inv_tau = 1.0 / cfg.tau_prime;

  LossResult result;
  result.per_anchor.assign(n, 0.0);
  result.grads[Slot::view_z] = detail::zero_like(s_z);
  result.grads[Slot::view_z_prime] = detail::zero_like(s_z_prime);
  result.grads[teacher_slot] = detail::zero_like(m);

  for (const Slot view : {Slot::view_z, Slot::view_z_prime}) {
    const Batch& s = view == Slot::view_z ? s_z : s_z_prime;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<std::size_t> included;
      included.reserve(n);
      for (std::size_t j = 0; j < n; ++j) {
        if (mask.at(i, j) == 1) included.push_back(j);
      }
      std::vector<detail::PairGeom> geom(included.size());
      std::vector<double> logits(included.size());
      std::size_t pos = 0;
      for (std::size_t k = 0; k < included.size(); ++k) {
        const std::size_t j = included[k];
        geom[k] = detail::pair_geom(s[i], m[j]);
        logits[k] = geom[k].cos * inv_tau;
        if (j == i) pos = k;
      }
      const detail::SoftmaxLoss sm = detail::softmax_cross_entropy(logits, pos);
      result.per_anchor[i] += sm.loss;
      for (std::size_t k = 0; k < included.size(); ++k) {
        const double w = sm.dlogit[k] * inv_tau / static_cast<double>(n);
        detail::add_cosine_grad_left(s[i], m[included[k]], geom[k], w,
                                     result.grads[view][i]);
      }
    }
  }
  detail::finalize(result);
  return result;
}

/// Fixed additive angular margin on the positive pair; negatives keep their
/// plain cosine logits.
inline LossResult arccse_loss(const Batch& h_z, const Batch& h_z_prime,
                              const ObjectiveConfig& cfg) {
  cfg.validate();
  const std::size_t dim = detail::checked_batch(h_z, "h_z");
  detail::require_same_batch(h_z.size(), h_z_prime, "h_z_prime");
  if (detail::checked_batch(h_z_prime, "h_z_prime") != dim) {
    fail(ErrorCode::DimensionMismatch, "arccse_loss: view dims differ");
  }
  const std::size_t n = h_z.size();
  const double inv_tau = 1.0 / cfg.tau;
  constexpr double pi = 3.14159265358979323846;

  LossResult result;
  result.per_anchor.resize(n);
  result.grads[Slot::view_z] = detail::zero_like(h_z);
  result.grads[Slot::view_z_prime] = detail::zero_like(h_z_prime);

  std::vector<detail::PairGeom> geom(n);
  std::vector<double> logits(n);
  std::vector<double> dcos_factor(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      geom[j] = detail::pair_geom(h_z[i], h_z_prime[j]);
      if (j == i) {
        if (std::acos(geom[j].cos) + cfg.margin > pi) {
          fail(ErrorCode::MarginOutOfRange,
               "arccse_loss: margin pushes the positive angle past pi");
        }
        const detail::AngularLogit al = detail::angular_logit(geom[j].cos, cfg.margin, inv_tau);
        logits[j] = al.value;
        dcos_factor[j] = al.dcos;
      } else {
        logits[j] = geom[j].cos * inv_tau;
        dcos_factor[j] = inv_tau;
      }
    }
    const detail::SoftmaxLoss sm = detail::softmax_cross_entropy(logits, i);
    result.per_anchor[i] = sm.loss;
    for (std::size_t j = 0; j < n; ++j) {
      const double w = sm.dlogit[j] * dcos_factor[j] / static_cast<double>(n);
      detail::add_cosine_grad_left(h_z[i], h_z_prime[j], geom[j], w,
                                   result.grads[Slot::view_z][i]);
      detail::add_cosine_grad_right(h_z[i], h_z_prime[j], geom[j], w,
                                    result.grads[Slot::view_z_prime][j]);
    }
  }
  detail::finalize(result);
  return result;
}

/// Adaptive angular margin: each negative's angle is reduced by
/// margin * delta[i][j] before the cosine, so teacher-dissimilar negatives
/// are pushed further away. The positive keeps its plain cosine logit.
inline LossResult adapacse_loss(const Batch& anchor, const Batch& positive,
                                const MarginWeights& delta, const ObjectiveConfig& cfg) {
  cfg.validate();
  const std::size_t dim = detail::checked_batch(anchor, "anchor");
  detail::require_same_batch(anchor.size(), positive, "positive");
  if (detail::checked_batch(positive, "positive") != dim) {
    fail(ErrorCode::DimensionMismatch, "adapacse_loss: batch dims differ");
  }
  const std::size_t n = anchor.size();
  if (delta.rows != n || delta.cols != n) {
    fail(ErrorCode::ShapeMismatch,
         "adapacse_loss: delta is " + std::to_string(delta.rows) + "x" +
             std::to_string(delta.cols) + ", batch is " + std::to_string(n));
  }
  constexpr double pi = 3.14159265358979323846;
  double max_delta = 0.0;
  for (double d : delta.entries) max_delta = std::max(max_delta, d);
  if (cfg.margin * max_delta >= pi) {
    fail(ErrorCode::MarginOutOfRange, "adapacse_loss: margin * max(delta) must stay below pi");
  }
  const double inv_tau = 1.0 / cfg.tau;

  LossResult result;
  result.per_anchor.resize(n);
  result.grads[Slot::view_z] = detail::zero_like(anchor);
  result.grads[Slot::view_z_prime] = detail::zero_like(positive);

  std::vector<detail::PairGeom> geom(n);
  std::vector<double> logits(n);
  std::vector<double> dcos_factor(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      geom[j] = detail::pair_geom(anchor[i], positive[j]);
      if (j == i) {
        logits[j] = geom[j].cos * inv_tau;
        dcos_factor[j] = inv_tau;
      } else {
        const detail::AngularLogit al =
            detail::angular_logit(geom[j].cos, -cfg.margin * delta.at(i, j), inv_tau);
        logits[j] = al.value;
        dcos_factor[j] = al.dcos;
      }
    }
    const detail::SoftmaxLoss sm = detail::softmax_cross_entropy(logits, i);
    result.per_anchor[i] = sm.loss;
    for (std::size_t j = 0; j < n; ++j) {
      const double w = sm.dlogit[j] * dcos_factor[j] / static_cast<double>(n);
      detail::add_cosine_grad_left(anchor[i], positive[j], geom[j], w,
                                   result.grads[Slot::view_z][i]);
      detail::add_cosine_grad_right(anchor[i], positive[j], geom[j], w,
                                    result.grads[Slot::view_z_prime][j]);
    }
  }
  detail::finalize(result);
  return result;
}

/// Adaptive angular margin against a frozen teacher batch with threshold
/// filtering; optionally summed over both dropout views.
inline LossResult adapacse_filtered_loss(const Batch& s_z, const Batch& s_z_prime,
                                         const Batch& m, const FilterMask& mask,
                                         const MarginWeights& delta,
                                         const ObjectiveConfig& cfg,
                                         Slot teacher_slot = Slot::teacher_visual) {
  cfg.validate();
  const std::size_t dim = detail::checked_batch(s_z, "s_z");
  detail::require_same_batch(s_z.size(), s_z_prime, "s_z_prime");
  detail::require_same_batch(s_z.size(), m, "teacher batch");
  if (detail::checked_batch(s_z_prime, "s_z_prime") != dim ||
      detail::checked_batch(m, "teacher batch") != dim) {
    fail(ErrorCode::DimensionMismatch,
         "adapacse_filtered_loss: batches must share the grounded dim");
  }
  const std::size_t n = s_z.size();
  if (mask.rows != n || mask.cols != n) {
    fail(ErrorCode::MaskShapeMismatch, "adapacse_filtered_loss: mask shape");
  }
  if (delta.rows != n || delta.cols != n) {
    fail(ErrorCode::ShapeMismatch, "adapacse_filtered_loss: delta shape");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (mask.at(i, i) != 1) {
      fail(ErrorCode::DegenerateDenominator,
           "adapacse_filtered_loss: mask diagonal " + std::to_string(i) + " is zero");
    }
  }
  constexpr double pi = 3.14159265358979323846;
  double max_delta = 0.0;
  for (double d : delta.entries) max_delta = std::max(max_delta, d);
  if (cfg.margin * max_delta >= pi) {
    fail(ErrorCode::MarginOutOfRange,
         "adapacse_filtered_loss: margin * max(delta) must stay below pi");
  }
  const double inv_tau = 1.0 / cfg.tau_prime;

  LossResult result;
  result.per_anchor.assign(n, 0.0);
  result.grads[Slot::view_z] = detail::zero_like(s_z);
  result.grads[Slot::view_z_prime] = detail::zero_like(s_z_prime);
  result.grads[teacher_slot] = detail::zero_like(m);

  std::vector<Slot> views{Slot::view_z};
  if (cfg.sum_over_both_dropout_views) views.push_back(Slot::view_z_prime);

  for (const Slot view : views) {
    const Batch& s = view == Slot::view_z ? s_z : s_z_prime;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<std::size_t> included;
      included.reserve(n);
      for (std::size_t j = 0; j < n; ++j) {
        if (mask.at(i, j) == 1) included.push_back(j);
      }
      std::vector<detail::PairGeom> geom(included.size());
      std::vector<double> logits(included.size());
      std::vector<double> dcos_factor(included.size());
      std::size_t pos = 0;
      for (std::size_t k = 0; k < included.size(); ++k) {
        const std::size_t j = included[k];
        geom[k] = detail::pair_geom(s[i], m[j]);
        if (j == i) {
          pos = k;
          logits[k] = geom[k].cos * inv_tau;
          dcos_factor[k] = inv_tau;
        } else {
          const detail::AngularLogit al =
              detail::angular_logit(geom[k].cos, -cfg.margin * delta.at(i, j), inv_tau);
          logits[k] = al.value;
          dcos_factor[k] = al.dcos;
        }
      }
      const detail::SoftmaxLoss sm = detail::softmax_cross_entropy(logits, pos);
      result.per_anchor[i] += sm.loss;
      for (std::size_t k = 0; k < included.size(); ++k) {
        const double w = sm.dlogit[k] * dcos_factor[k] / static_cast<double>(n);
        detail::add_cosine_grad_left(s[i], m[included[k]], geom[k], w,
                                     result.grads[view][i]);
      }
    }
  }
  detail::finalize(result);
  return result;
}

/// Combined objective: the mean of the text-teacher and visual-teacher
/// filtered adaptive-margin branches. Masks and margin weights are derived
/// here from the raw-teacher soft labels and treated as constants during
/// differentiation.
inline LossResult kdmcse_loss(const Batch& s_z, const Batch& s_z_prime, const Batch& v,
                              const Batch& t, const SoftLabels& soft,
                              const ObjectiveConfig& cfg) {
  cfg.validate();
  const std::size_t n = s_z.size();
  if (soft.tt.rows != n || soft.tt.cols != n || soft.tv.rows != n || soft.tv.cols != n) {
    fail(ErrorCode::ShapeMismatch, "kdmcse_loss: soft labels must be NxN for the batch");
  }
  const FilterMask mask_tv = cfg.filter_enabled
                                 ? filter_mask(soft.tv, cfg.threshold, cfg.filter_orientation)
                                 : all_pass_mask(n, n);
  const FilterMask mask_tt = cfg.filter_enabled
                                 ? filter_mask(soft.tt, cfg.threshold, cfg.filter_orientation)
                                 : all_pass_mask(n, n);
  const MarginWeights delta_tv = margin_weights(soft.tv);
  const MarginWeights delta_tt = margin_weights(soft.tt);

  const LossResult branch_v = adapacse_filtered_loss(s_z, s_z_prime, v, mask_tv, delta_tv,
                                                     cfg, Slot::teacher_visual);
  const LossResult branch_t = adapacse_filtered_loss(s_z, s_z_prime, t, mask_tt, delta_tt,
                                                     cfg, Slot::teacher_text);

  LossResult result;
  result.per_anchor.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    result.per_anchor[i] = 0.5 * (branch_v.per_anchor[i] + branch_t.per_anchor[i]);
  }
  for (const Slot view : {Slot::view_z, Slot::view_z_prime}) {
    Batch combined = detail::zero_like(s_z);
    const Batch& gv = branch_v.grads.at(view);
    const Batch& gt = branch_t.grads.at(view);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < combined[i].size(); ++k) {
        combined[i][k] = 0.5 * (gv[i][k] + gt[i][k]);
      }
    }
    result.grads[view] = std::move(combined);
  }
  result.grads[Slot::teacher_visual] = detail::zero_like(v);
  result.grads[Slot::teacher_text] = detail::zero_like(t);
  detail::finalize(result);
  return result;
}

}  // namespace kdmcse
