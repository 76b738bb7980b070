#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "kdmcse/errors.hpp"
#include "kdmcse/objectives.hpp"
#include "kdmcse/rng.hpp"

namespace kdmcse {

using SlotBatches = std::map<Slot, Batch>;

struct GradCheckReport {
  std::map<Slot, double> max_rel_err;
  double tolerance = 1e-4;

  double worst() const {
    double w = 0.0;
    for (const auto& [slot, err] : max_rel_err) w = std::max(w, err);
    return w;
  }

  bool passed() const { return worst() < tolerance; }
};

/// Central finite differences against the analytic gradients of the
/// batch-mean loss. Slots listed in `differentiable` are perturbed
/// coordinate by coordinate; any other slot reported by the loss must carry
/// an exactly-zero gradient (frozen teacher inputs).
template <typename LossFn>
GradCheckReport grad_check(const LossFn& loss_fn, const SlotBatches& inputs,
                           const std::vector<Slot>& differentiable, double epsilon,
                           double tolerance) {
  if (!(epsilon >= 1e-6 && epsilon <= 1e-3)) {
    fail(ErrorCode::ConfigError, "grad_check: epsilon must be in [1e-6, 1e-3]");
  }
  const LossResult base = loss_fn(inputs);
  if (!std::isfinite(base.mean)) fail(ErrorCode::NonFiniteLoss, "grad_check: base loss");

  GradCheckReport report;
  report.tolerance = tolerance;

  for (const auto& [slot, grad] : base.grads) {
    bool is_diff = false;
    for (Slot s : differentiable) is_diff = is_diff || s == slot;
    if (is_diff) continue;
    double worst = 0.0;
    for (const Vector& row : grad) {
      for (double g : row) {
        if (g != 0.0) worst = std::numeric_limits<double>::infinity();
      }
    }
    report.max_rel_err[slot] = worst;
  }

  for (Slot slot : differentiable) {
    const Batch& analytic = base.grads.at(slot);
    double worst = 0.0;
    SlotBatches perturbed = inputs;
    Batch& batch = perturbed.at(slot);
    for (std::size_t i = 0; i < batch.size(); ++i) {
      for (std::size_t k = 0; k < batch[i].size(); ++k) {
        const double saved = batch[i][k];
        batch[i][k] = saved + epsilon;
        const double up = loss_fn(perturbed).mean;
        batch[i][k] = saved - epsilon;
        const double down = loss_fn(perturbed).mean;
        batch[i][k] = saved;
        if (!std::isfinite(up) || !std::isfinite(down)) {
          fail(ErrorCode::NonFiniteLoss, "grad_check: perturbed loss");
        }
        const double fd = (up - down) / (2.0 * epsilon);
        const double a = analytic[i][k];
        const double rel = std::abs(a - fd) / std::max({std::abs(a), std::abs(fd), 1e-8});
        worst = std::max(worst, rel);
      }
    }
    report.max_rel_err[slot] = worst;
  }
  return report;
}

struct GradCheckRow {
  std::string objective;
  std::string slot;
  double max_rel_err = 0.0;
  bool pass = false;
};

namespace detail {

/// Random batches shaped like a mid-training step: all vectors cluster
/// around one direction so the softmax stays unsaturated. Saturated batches
/// have analytic gradients near the 1e-8 denominator guard, where a central
/// difference measures only floating-point noise; clustered ones keep every
/// gradient coordinate well above it. Teacher features are noisy copies of a
/// few concept directions so threshold masks actually drop entries.
struct GradCheckCase {
  Batch view_z;
  Batch view_z_prime;
  Batch teacher;        // projected-space teacher batch
  Batch teacher_raw_a;  // raw features behind the soft labels
  Batch teacher_raw_b;
};

inline Vector random_unit(SplitMix64& rng, std::size_t dim) {
  Vector v(dim);
  double n2 = 0.0;
  do {
    n2 = 0.0;
    for (std::size_t k = 0; k < dim; ++k) {
      v[k] = rng.gaussian();
      n2 += v[k] * v[k];
    }
  } while (n2 < 1e-12);
  const double inv = 1.0 / std::sqrt(n2);
  for (double& x : v) x *= inv;
  return v;
}

inline GradCheckCase make_gradcheck_case(std::uint64_t seed, std::size_t n, std::size_t dim) {
  SplitMix64 rng(seed);
  GradCheckCase c;
  c.view_z.resize(n);
  c.view_z_prime.resize(n);
  c.teacher.resize(n);
  c.teacher_raw_a.resize(n);
  c.teacher_raw_b.resize(n);
  const Vector center = random_unit(rng, dim);
  const double spread = 0.45 / std::sqrt(static_cast<double>(dim));
  const double view_gap = 0.35 / std::sqrt(static_cast<double>(dim));
  const std::size_t concepts = 2;
  Batch concept_dirs(concepts);
  for (std::size_t k = 0; k < concepts; ++k) concept_dirs[k] = random_unit(rng, dim);
  for (std::size_t i = 0; i < n; ++i) {
    c.view_z[i].resize(dim);
    c.view_z_prime[i].resize(dim);
    c.teacher[i].resize(dim);
    for (std::size_t k = 0; k < dim; ++k) {
      c.view_z[i][k] = center[k] + spread * rng.gaussian();
      c.view_z_prime[i][k] = c.view_z[i][k] + view_gap * rng.gaussian();
      c.teacher[i][k] = center[k] + spread * rng.gaussian();
    }
    const Vector& dir = concept_dirs[i % concepts];
    c.teacher_raw_a[i].resize(dim);
    c.teacher_raw_b[i].resize(dim);
    for (std::size_t k = 0; k < dim; ++k) {
      c.teacher_raw_a[i][k] = dir[k] + 0.15 * rng.gaussian();
      c.teacher_raw_b[i][k] = dir[k] + 0.15 * rng.gaussian();
    }
  }
  return c;
}

}  // namespace detail

/// Runs grad_check for all six objectives on `batches_per_objective` random
/// batches (N in {2,3,4}, dim in {4,8}) and reports the worst relative error
/// per (objective, slot). Shared by the CLI subcommand and the test suites.
inline std::vector<GradCheckRow> run_objective_gradchecks(const ObjectiveConfig& cfg,
                                                          std::uint64_t seed,
                                                          int batches_per_objective,
                                                          double epsilon,
                                                          double tolerance) {
  const std::size_t n_choices[] = {2, 3, 4};
  const std::size_t dim_choices[] = {4, 8};
  std::vector<GradCheckRow> rows;

  struct Case {
    std::string name;
    std::function<GradCheckReport(const detail::GradCheckCase&)> run;
  };

  const std::vector<Slot> both_views{Slot::view_z, Slot::view_z_prime};

  std::vector<Case> cases;
  cases.push_back({"simcse", [&](const detail::GradCheckCase& c) {
                     SlotBatches in{{Slot::view_z, c.view_z}, {Slot::view_z_prime, c.view_z_prime}};
                     auto fn = [&](const SlotBatches& b) {
                       return simcse_loss(b.at(Slot::view_z), b.at(Slot::view_z_prime), cfg);
                     };
                     return grad_check(fn, in, both_views, epsilon, tolerance);
                   }});
  cases.push_back({"mcse", [&](const detail::GradCheckCase& c) {
                     SlotBatches in{{Slot::view_z, c.view_z},
                                    {Slot::view_z_prime, c.view_z_prime},
                                    {Slot::teacher_visual, c.teacher}};
                     auto fn = [&](const SlotBatches& b) {
                       return mcse_loss(b.at(Slot::view_z), b.at(Slot::view_z_prime),
                                        b.at(Slot::teacher_visual), cfg);
                     };
                     return grad_check(fn, in, both_views, epsilon, tolerance);
                   }});
  cases.push_back({"filtered_infonce", [&](const detail::GradCheckCase& c) {
                     const SoftLabels soft = soft_labels(c.teacher_raw_a, c.teacher_raw_b);
                     const FilterMask mask =
                         filter_mask(soft.tv, cfg.threshold, cfg.filter_orientation);
                     SlotBatches in{{Slot::view_z, c.view_z},
                                    {Slot::view_z_prime, c.view_z_prime},
                                    {Slot::teacher_visual, c.teacher}};
                     auto fn = [&, mask](const SlotBatches& b) {
                       return filtered_infonce(b.at(Slot::view_z), b.at(Slot::view_z_prime),
                                               b.at(Slot::teacher_visual), mask, cfg);
                     };
                     return grad_check(fn, in, both_views, epsilon, tolerance);
                   }});
  cases.push_back({"arccse", [&](const detail::GradCheckCase& c) {
                     SlotBatches in{{Slot::view_z, c.view_z}, {Slot::view_z_prime, c.view_z_prime}};
                     auto fn = [&](const SlotBatches& b) {
                       return arccse_loss(b.at(Slot::view_z), b.at(Slot::view_z_prime), cfg);
                     };
                     return grad_check(fn, in, both_views, epsilon, tolerance);
                   }});
  cases.push_back({"adapacse", [&](const detail::GradCheckCase& c) {
                     const SoftLabels soft = soft_labels(c.teacher_raw_a, c.teacher_raw_b);
                     const MarginWeights delta = margin_weights(soft.tt);
                     SlotBatches in{{Slot::view_z, c.view_z}, {Slot::view_z_prime, c.view_z_prime}};
                     auto fn = [&, delta](const SlotBatches& b) {
                       return adapacse_loss(b.at(Slot::view_z), b.at(Slot::view_z_prime), delta,
                                            cfg);
                     };
                     return grad_check(fn, in, both_views, epsilon, tolerance);
                   }});
  cases.push_back({"kdmcse", [&](const detail::GradCheckCase& c) {
                     const SoftLabels soft = soft_labels(c.teacher_raw_a, c.teacher_raw_b);
                     SlotBatches in{{Slot::view_z, c.view_z},
                                    {Slot::view_z_prime, c.view_z_prime},
                                    {Slot::teacher_visual, c.teacher},
                                    {Slot::teacher_text, c.teacher_raw_a}};
                     auto fn = [&, soft](const SlotBatches& b) {
                       return kdmcse_loss(b.at(Slot::view_z), b.at(Slot::view_z_prime),
                                          b.at(Slot::teacher_visual), b.at(Slot::teacher_text),
                                          soft, cfg);
                     };
                     return grad_check(fn, in, both_views, epsilon, tolerance);
                   }});

  for (std::size_t ci = 0; ci < cases.size(); ++ci) {
    std::map<Slot, double> worst;
    for (int b = 0; b < batches_per_objective; ++b) {
      const std::uint64_t case_seed = derive_seed(seed, ci, static_cast<std::uint64_t>(b));
      SplitMix64 pick(case_seed);
      const std::size_t n = n_choices[pick.next() % 3];
      const std::size_t dim = dim_choices[pick.next() % 2];
      const detail::GradCheckCase data = detail::make_gradcheck_case(pick.next(), n, dim);
      const GradCheckReport report = cases[ci].run(data);
      for (const auto& [slot, err] : report.max_rel_err) {
        auto it = worst.find(slot);
        if (it == worst.end()) {
          worst[slot] = err;
        } else {
          it->second = std::max(it->second, err);
        }
      }
    }
    for (const auto& [slot, err] : worst) {
      rows.push_back({cases[ci].name, slot_name(slot), err, err < tolerance});
    }
  }
  return rows;
}

}  // namespace kdmcse
