#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "kdmcse/errors.hpp"
#include "kdmcse/numerics.hpp"

namespace kdmcse {

enum class Modality { text, visual };

inline const char* modality_name(Modality m) {
  return m == Modality::text ? "text" : "visual";
}

/// Pairwise cosine matrix between two vector collections.
struct SimilarityMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  Modality row_modality = Modality::text;
  Modality col_modality = Modality::text;
  std::vector<double> entries;

  double at(std::size_t i, std::size_t j) const { return entries[i * cols + j]; }
  double& at(std::size_t i, std::size_t j) { return entries[i * cols + j]; }
};

/// 0/1 mask over negative pairs. Diagonal entries are always 1 so the
/// positive term of a contrastive denominator can never be filtered away.
struct FilterMask {
  std::size_t rows = 0;
  std::size_t cols = 0;
  double threshold = 1.0;
  std::vector<std::uint8_t> entries;

  std::uint8_t at(std::size_t i, std::size_t j) const { return entries[i * cols + j]; }
  std::uint8_t& at(std::size_t i, std::size_t j) { return entries[i * cols + j]; }
};

/// Per-pair margin scale: delta = |1 - similarity|, in [0, 2].
struct MarginWeights {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> entries;

  double at(std::size_t i, std::size_t j) const { return entries[i * cols + j]; }
  double& at(std::size_t i, std::size_t j) { return entries[i * cols + j]; }
};

/// Direction of the threshold filter.
///   exclude_high  - drop negatives whose teacher similarity is >= threshold
///                   (removes near-duplicate "noisy" negatives; the default).
///   paper_literal - drop negatives whose teacher similarity is < threshold
///                   (the opposite orientation, kept for comparison).
enum class FilterOrientation { exclude_high, paper_literal };

inline SimilarityMatrix pairwise_cosine(const Batch& rows, const Batch& cols,
                                        Modality row_modality = Modality::text,
                                        Modality col_modality = Modality::text) {
  SimilarityMatrix sim;
  sim.rows = rows.size();
  sim.cols = cols.size();
  sim.row_modality = row_modality;
  sim.col_modality = col_modality;
  sim.entries.assign(sim.rows * sim.cols, 0.0);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (squared_norm(rows[i]) == 0.0) {
      fail(ErrorCode::ZeroNormVector, "pairwise_cosine: zero-norm row " + std::to_string(i));
    }
  }
  for (std::size_t j = 0; j < cols.size(); ++j) {
    if (squared_norm(cols[j]) == 0.0) {
      fail(ErrorCode::ZeroNormVector, "pairwise_cosine: zero-norm col " + std::to_string(j));
    }
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      sim.at(i, j) = cosine(rows[i], cols[j]);
    }
  }
  return sim;
}

/// The two soft-label matrices consumed by the distilled objectives:
/// text-text and text-visual teacher similarities. Visual-visual and
/// visual-text pairings exist in principle but feed no objective.
struct SoftLabels {
  SimilarityMatrix tt;
  SimilarityMatrix tv;
};

inline SoftLabels soft_labels(const Batch& teacher_text, const Batch& teacher_visual) {
  if (teacher_text.size() != teacher_visual.size()) {
    fail(ErrorCode::BatchLengthMismatch,
         "soft_labels: text batch " + std::to_string(teacher_text.size()) +
             " vs visual batch " + std::to_string(teacher_visual.size()));
  }
  SoftLabels labels;
  labels.tt = pairwise_cosine(teacher_text, teacher_text, Modality::text, Modality::text);
  labels.tv = pairwise_cosine(teacher_text, teacher_visual, Modality::text, Modality::visual);
  return labels;
}

inline FilterMask filter_mask(const SimilarityMatrix& sim, double threshold,
                              FilterOrientation orientation = FilterOrientation::exclude_high) {
  if (!(threshold >= -1.0 && threshold <= 1.0)) {
    fail(ErrorCode::ThresholdOutOfRange, "filter_mask: threshold must be in [-1, 1]");
  }
  FilterMask mask;
  mask.rows = sim.rows;
  mask.cols = sim.cols;
  mask.threshold = threshold;
  mask.entries.assign(sim.rows * sim.cols, 1);
  for (std::size_t i = 0; i < sim.rows; ++i) {
    for (std::size_t j = 0; j < sim.cols; ++j) {
      if (i == j) continue;  // positives always survive
      const bool drop = orientation == FilterOrientation::exclude_high
                            ? sim.at(i, j) >= threshold
                            : sim.at(i, j) < threshold;
      if (drop) mask.at(i, j) = 0;
    }
  }
  return mask;
}

inline FilterMask all_pass_mask(std::size_t rows, std::size_t cols) {
  FilterMask mask;
  mask.rows = rows;
  mask.cols = cols;
  mask.threshold = 1.0;
  mask.entries.assign(rows * cols, 1);
  return mask;
}

inline MarginWeights margin_weights(const SimilarityMatrix& sim) {
  MarginWeights delta;
  delta.rows = sim.rows;
  delta.cols = sim.cols;
  delta.entries.resize(sim.entries.size());
  for (std::size_t k = 0; k < sim.entries.size(); ++k) {
    delta.entries[k] = std::abs(1.0 - sim.entries[k]);
  }
  return delta;
}

struct HistogramBin {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 0;
};

/// Equal-width histogram over [-1, 1] of the similarity entries. For square
/// matrices the diagonal (identically 1 for self-similarities) is skipped;
/// rectangular matrices are binned in full.
inline std::vector<HistogramBin> similarity_histogram(const SimilarityMatrix& sim,
                                                      std::size_t bins) {
  if (bins < 1) fail(ErrorCode::DegenerateInput, "similarity_histogram: bins must be >= 1");
  std::vector<HistogramBin> hist(bins);
  const double width = 2.0 / static_cast<double>(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    hist[b].lo = -1.0 + width * static_cast<double>(b);
    hist[b].hi = (b + 1 == bins) ? 1.0 : -1.0 + width * static_cast<double>(b + 1);
  }
  const bool square = sim.rows == sim.cols;
  for (std::size_t i = 0; i < sim.rows; ++i) {
    for (std::size_t j = 0; j < sim.cols; ++j) {
      if (square && i == j) continue;
      const double v = sim.at(i, j);
      const double position = (v + 1.0) / width;
      std::size_t b = position <= 0.0 ? 0 : static_cast<std::size_t>(position);
      if (b >= bins) b = bins - 1;  // v == 1.0 lands in the last bin
      ++hist[b].count;
    }
  }
  return hist;
}

/// For each image column: rank all caption rows by similarity (descending,
/// ties broken by ascending caption index) and report the worst 1-based rank
/// among the image's gold captions.
inline std::map<std::size_t, std::size_t> true_caption_rank(
    const SimilarityMatrix& tv,
    const std::map<std::size_t, std::set<std::size_t>>& gold) {
  std::map<std::size_t, std::size_t> result;
  for (const auto& [image, captions] : gold) {
    if (image >= tv.cols) {
      fail(ErrorCode::UnknownGoldIndex, "true_caption_rank: image column " + std::to_string(image));
    }
    std::vector<std::size_t> order(tv.rows);
    for (std::size_t i = 0; i < tv.rows; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const double sa = tv.at(a, image);
      const double sb = tv.at(b, image);
      if (sa != sb) return sa > sb;
      return a < b;
    });
    std::vector<std::size_t> rank_of(tv.rows, 0);
    for (std::size_t pos = 0; pos < order.size(); ++pos) rank_of[order[pos]] = pos + 1;
    std::size_t worst = 0;
    for (std::size_t caption : captions) {
      if (caption >= tv.rows) {
        fail(ErrorCode::UnknownGoldIndex,
             "true_caption_rank: caption row " + std::to_string(caption));
      }
      worst = std::max(worst, rank_of[caption]);
    }
    result[image] = worst;
  }
  return result;
}

}  // namespace kdmcse
