#pragma once

#include <cmath>
#include <filesystem>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "kdmcse/encoder.hpp"
#include "kdmcse/errors.hpp"
#include "kdmcse/io.hpp"
#include "kdmcse/numerics.hpp"

namespace kdmcse {

struct StsPair {
  std::string id_a;
  std::string id_b;
  double gold = 0.0;  // in [0, 5]
};

/// Pairs with gold at or above this score count as positives for the
/// alignment metric.
constexpr double kAlignmentGoldMin = 4.0;

inline std::vector<StsPair> load_sts_tsv(const std::filesystem::path& path) {
  const std::string data = read_file(path);
  std::vector<StsPair> pairs;
  std::istringstream stream(data);
  std::string line;
  while (std::getline(stream, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream fields(line);
    StsPair pair;
    std::string score;
    if (!std::getline(fields, pair.id_a, '\t') || !std::getline(fields, pair.id_b, '\t') ||
        !std::getline(fields, score, '\t')) {
      fail(ErrorCode::MalformedFile, path.string() + ": expected id_a\\tid_b\\tscore");
    }
    try {
      pair.gold = std::stod(score);
    } catch (const std::exception&) {
      fail(ErrorCode::MalformedFile, path.string() + ": bad score '" + score + "'");
    }
    if (!(pair.gold >= 0.0 && pair.gold <= 5.0)) {
      fail(ErrorCode::MalformedFile, path.string() + ": score outside [0, 5]");
    }
    pairs.push_back(std::move(pair));
  }
  return pairs;
}

inline void write_sts_tsv(const std::filesystem::path& path, const std::vector<StsPair>& pairs) {
  std::string out;
  for (const StsPair& p : pairs) {
    out += p.id_a;
    out += '\t';
    out += p.id_b;
    out += '\t';
    out += format_double(p.gold);
    out += '\n';
  }
  write_file(path, out);
}

/// STS-style evaluation: predicted score is the cosine of the two hidden
/// vectors (dropout disabled, no projection head); returns the Spearman
/// correlation against the gold scores.
inline double sts_eval(const StudentParams& student, const std::vector<StsPair>& pairs) {
  if (pairs.size() < 2) fail(ErrorCode::DegenerateInput, "sts_eval: need at least 2 pairs");
  std::vector<double> predicted(pairs.size());
  std::vector<double> gold(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const Vector a = eval_embedding(student, pairs[i].id_a);
    const Vector b = eval_embedding(student, pairs[i].id_b);
    predicted[i] = cosine(a, b);
    gold[i] = pairs[i].gold;
  }
  return spearman(predicted, gold);
}

namespace detail {
inline Vector normalized_or_fail(const Vector& v, const char* what) {
  const double n2 = squared_norm(v);
  if (n2 == 0.0) fail(ErrorCode::ZeroNormVector, what);
  Vector out(v);
  const double inv = 1.0 / std::sqrt(n2);
  for (double& x : out) x *= inv;
  return out;
}
}  // namespace detail

/// Mean squared distance between positively paired embeddings on the unit
/// sphere; 0 iff every pair coincides after normalization.
inline double alignment(const std::vector<std::pair<Vector, Vector>>& positive_pairs) {
  if (positive_pairs.empty()) fail(ErrorCode::EmptyInput, "alignment: no pairs");
  std::vector<double> distances;
  distances.reserve(positive_pairs.size());
  for (const auto& [x, y] : positive_pairs) {
    const Vector nx = detail::normalized_or_fail(x, "alignment");
    const Vector ny = detail::normalized_or_fail(y, "alignment");
    if (nx.size() != ny.size()) fail(ErrorCode::DimensionMismatch, "alignment: pair dims");
    double d2 = 0.0;
    for (std::size_t k = 0; k < nx.size(); ++k) {
      const double d = nx[k] - ny[k];
      d2 += d * d;
    }
    distances.push_back(d2);
  }
  return stable_sum(distances) / static_cast<double>(distances.size());
}

/// log of the mean Gaussian potential e^{-2|x-y|^2} over distinct unordered
/// pairs of normalized points; at most 0, more negative means more spread.
inline double uniformity(const Batch& points) {
  if (points.size() < 2) fail(ErrorCode::FewerThanTwoPoints, "uniformity: need >= 2 points");
  Batch unit(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    unit[i] = detail::normalized_or_fail(points[i], "uniformity");
  }
  std::vector<double> potentials;
  potentials.reserve(points.size() * (points.size() - 1) / 2);
  for (std::size_t i = 0; i < unit.size(); ++i) {
    for (std::size_t j = i + 1; j < unit.size(); ++j) {
      if (unit[i].size() != unit[j].size()) {
        fail(ErrorCode::DimensionMismatch, "uniformity: point dims");
      }
      double d2 = 0.0;
      for (std::size_t k = 0; k < unit[i].size(); ++k) {
        const double d = unit[i][k] - unit[j][k];
        d2 += d * d;
      }
      potentials.push_back(std::exp(-2.0 * d2));
    }
  }
  return std::log(stable_sum(potentials) / static_cast<double>(potentials.size()));
}

struct EvalReport {
  double spearman = 0.0;
  double alignment = 0.0;
  double uniformity = 0.0;
};

/// The dev-set report used for checkpoint selection: Spearman over all
/// pairs, alignment over pairs with gold >= 4 (NaN when none qualify),
/// uniformity over the distinct sentences appearing in the pairs.
inline EvalReport evaluate_student(const StudentParams& student,
                                   const std::vector<StsPair>& pairs) {
  EvalReport report;
  report.spearman = sts_eval(student, pairs);

  std::vector<std::pair<Vector, Vector>> positives;
  for (const StsPair& p : pairs) {
    if (p.gold >= kAlignmentGoldMin) {
      positives.emplace_back(eval_embedding(student, p.id_a), eval_embedding(student, p.id_b));
    }
  }
  report.alignment =
      positives.empty() ? std::nan("") : alignment(positives);

  std::set<std::string> unique_ids;
  for (const StsPair& p : pairs) {
    unique_ids.insert(p.id_a);
    unique_ids.insert(p.id_b);
  }
  Batch points;
  points.reserve(unique_ids.size());
  for (const std::string& id : unique_ids) points.push_back(eval_embedding(student, id));
  report.uniformity = uniformity(points);
  return report;
}

}  // namespace kdmcse
