#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "kdmcse/errors.hpp"

namespace kdmcse {

using Vector = std::vector<double>;
using Batch = std::vector<Vector>;

/// Dense row-major matrix of doubles.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  Vector row(std::size_t r) const {
    return Vector(data.begin() + static_cast<std::ptrdiff_t>(r * cols),
                  data.begin() + static_cast<std::ptrdiff_t>((r + 1) * cols));
  }

  bool operator==(const Matrix& other) const = default;
};

inline bool all_finite(const Vector& v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

/// Dot product with a fixed left-to-right accumulation order so results do
/// not depend on how callers partition work.
inline double dot(const Vector& a, const Vector& b) {
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) acc += a[k] * b[k];
  return acc;
}

inline double squared_norm(const Vector& a) { return dot(a, a); }

inline double norm(const Vector& a) { return std::sqrt(squared_norm(a)); }

/// Cosine similarity, clamped to [-1, 1]. The denominator is computed as
/// sqrt(|a|^2 * |b|^2) so exact rational inputs (e.g. [1,2] vs [2,1]) give
/// exact results.
inline double cosine(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) {
    fail(ErrorCode::DimensionMismatch,
         "cosine: dims " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  }
  if (a.empty()) fail(ErrorCode::DimensionMismatch, "cosine: empty vectors");
  const double na2 = squared_norm(a);
  const double nb2 = squared_norm(b);
  if (na2 == 0.0) fail(ErrorCode::ZeroNormVector, "cosine: left operand has zero norm");
  if (nb2 == 0.0) fail(ErrorCode::ZeroNormVector, "cosine: right operand has zero norm");
  const double c = dot(a, b) / std::sqrt(na2 * nb2);
  return std::clamp(c, -1.0, 1.0);
}

/// Angle between two vectors in radians, in [0, pi]. The clamp inside
/// cosine() keeps the arccos argument valid even when floating-point
/// overshoot would push |cos| past 1.
inline double angle(const Vector& a, const Vector& b) {
  return std::acos(cosine(a, b));
}

/// log(sum(exp(v))) with max-shift. Terms are accumulated in ascending value
/// order, so the result depends only on the multiset of inputs and batch
/// permutations cannot perturb it.
inline double log_sum_exp(const std::vector<double>& values) {
  if (values.empty()) fail(ErrorCode::EmptySequence, "log_sum_exp: empty input");
  std::vector<double> sorted(values);
  std::sort(sorted.begin(), sorted.end());
  const double max_value = sorted.back();
  double sum = 0.0;
  for (double v : sorted) sum += std::exp(v - max_value);
  return max_value + std::log(sum);
}

/// Sum in ascending value order; used wherever a reduction must be exactly
/// invariant under permutations of its inputs.
inline double stable_sum(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  double acc = 0.0;
  for (double v : values) acc += v;
  return acc;
}

/// 1-based ranks with ties assigned the average rank of the run.
inline std::vector<double> average_ranks(const std::vector<double>& values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    if (values[i] != values[j]) return values[i] < values[j];
    return i < j;
  });
  std::vector<double> ranks(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

/// Spearman rank correlation: Pearson correlation of average ranks.
inline double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) {
    fail(ErrorCode::LengthMismatch,
         "spearman: lengths " + std::to_string(x.size()) + " vs " + std::to_string(y.size()));
  }
  if (x.size() < 2) fail(ErrorCode::DegenerateInput, "spearman: need at least 2 points");
  const std::vector<double> rx = average_ranks(x);
  const std::vector<double> ry = average_ranks(y);
  const std::size_t n = rx.size();
  const double mean = 0.5 * static_cast<double>(n + 1);
  double cov = 0.0, var_x = 0.0, var_y = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = rx[i] - mean;
    const double dy = ry[i] - mean;
    cov += dx * dy;
    var_x += dx * dx;
    var_y += dy * dy;
  }
  if (var_x == 0.0 || var_y == 0.0) {
    fail(ErrorCode::DegenerateInput, "spearman: constant sequence has no rank order");
  }
  return cov / std::sqrt(var_x * var_y);
}

}  // namespace kdmcse
