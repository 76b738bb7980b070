#include "kdmcse/eval.hpp"

#include <cmath>

#include <gtest/gtest.h>

#include "kdmcse/encoder.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using kdmcse::Batch;
using kdmcse::ErrorCode;
using kdmcse::StsPair;
using kdmcse::StudentParams;
using kdmcse::Vector;
using testutil::expect_error;

namespace {

StudentParams student_with_rows(const Batch& rows, double dropout_rate = 0.1) {
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < rows.size(); ++i) ids.push_back("s" + std::to_string(i));
  StudentParams params = kdmcse::init_student(
      ids, kdmcse::StudentDims{rows.front().size(), 4, 4, 4}, dropout_rate, 9);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t k = 0; k < rows[i].size(); ++k) params.base.at(i, k) = rows[i][k];
  }
  return params;
}

}  // namespace

TEST(StsEval, PerfectAndReversedOrder) {
  kdmcse::SplitMix64 rng(51);
  const Batch rows = testutil::random_batch(rng, 6, 8);
  const StudentParams student = student_with_rows(rows);

  std::vector<StsPair> pairs;
  for (std::size_t i = 0; i + 1 < 6; ++i) {
    const double c = kdmcse::cosine(rows[i], rows[i + 1]);
    pairs.push_back({"s" + std::to_string(i), "s" + std::to_string(i + 1),
                     5.0 * (c + 1.0) / 2.0});
  }
  EXPECT_DOUBLE_EQ(kdmcse::sts_eval(student, pairs), 1.0);

  for (StsPair& p : pairs) p.gold = 5.0 - p.gold;
  EXPECT_DOUBLE_EQ(kdmcse::sts_eval(student, pairs), -1.0);
}

TEST(StsEval, MatchesBruteForceOracle) {
  kdmcse::SplitMix64 rng(52);
  const Batch rows = testutil::random_batch(rng, 8, 6);
  const StudentParams student = student_with_rows(rows);
  std::vector<StsPair> pairs;
  std::vector<double> predicted, gold;
  for (int k = 0; k < 10; ++k) {
    const std::size_t a = rng.next() % 8;
    std::size_t b = rng.next() % 8;
    while (b == a) b = (b + 1) % 8;
    const double score = rng.uniform(0.0, 5.0);
    pairs.push_back({"s" + std::to_string(a), "s" + std::to_string(b), score});
    predicted.push_back(oracle::cosine(rows[a], rows[b]));
    gold.push_back(score);
  }
  EXPECT_NEAR(kdmcse::sts_eval(student, pairs), oracle::spearman(predicted, gold), 1e-12);
}

TEST(StsEval, IgnoresDropoutRate) {
  kdmcse::SplitMix64 rng(53);
  const Batch rows = testutil::random_batch(rng, 4, 6);
  const StudentParams a = student_with_rows(rows, 0.0);
  const StudentParams b = student_with_rows(rows, 0.45);
  std::vector<StsPair> pairs{{"s0", "s1", 1.0}, {"s1", "s2", 2.0}, {"s2", "s3", 3.5}};
  EXPECT_EQ(kdmcse::sts_eval(a, pairs), kdmcse::sts_eval(b, pairs));
}

TEST(StsEval, DegenerateGold) {
  kdmcse::SplitMix64 rng(54);
  const StudentParams student = student_with_rows(testutil::random_batch(rng, 3, 4));
  std::vector<StsPair> pairs{{"s0", "s1", 2.0}, {"s1", "s2", 2.0}};
  expect_error(ErrorCode::DegenerateInput, [&] { kdmcse::sts_eval(student, pairs); });
}

TEST(Alignment, Examples) {
  const Vector e1{1, 0, 0};
  const Vector e2{0, 1, 0};
  EXPECT_DOUBLE_EQ(kdmcse::alignment({{e1, e1}, {e2, e2}}), 0.0);
  EXPECT_DOUBLE_EQ(kdmcse::alignment({{e1, e2}}), 2.0);

  // scale of the inputs does not matter (normalized first)
  Vector big = e1;
  for (double& v : big) v *= 40.0;
  EXPECT_DOUBLE_EQ(kdmcse::alignment({{big, e2}}), 2.0);
}

TEST(Alignment, FixtureMatchesDirectMean) {
  kdmcse::SplitMix64 rng(55);
  std::vector<std::pair<Vector, Vector>> pairs;
  std::vector<double> expected;
  for (int k = 0; k < 3; ++k) {
    Vector x = testutil::random_unit(rng, 5);
    Vector y = testutil::random_unit(rng, 5);
    pairs.emplace_back(x, y);
    double d2 = 0.0;
    for (std::size_t i = 0; i < 5; ++i) d2 += (x[i] - y[i]) * (x[i] - y[i]);
    expected.push_back(d2);
  }
  const double mean = (expected[0] + expected[1] + expected[2]) / 3.0;
  EXPECT_NEAR(kdmcse::alignment(pairs), mean, 1e-12);

  // permutation invariance is exact
  std::vector<std::pair<Vector, Vector>> reversed(pairs.rbegin(), pairs.rend());
  EXPECT_EQ(kdmcse::alignment(pairs), kdmcse::alignment(reversed));
}

TEST(Alignment, EmptyInput) {
  expect_error(ErrorCode::EmptyInput, [] { kdmcse::alignment({}); });
}

TEST(Uniformity, Examples) {
  const Vector a{0.5, 0.5, 0.0};
  EXPECT_DOUBLE_EQ(kdmcse::uniformity({a, a}), 0.0);

  const Vector u{1, 0};
  Vector neg{-1, 0};
  EXPECT_NEAR(kdmcse::uniformity({u, neg}), -8.0, 1e-12);
}

TEST(Uniformity, MatchesBruteForceDoubleLoop) {
  kdmcse::SplitMix64 rng(56);
  Batch points = testutil::random_batch(rng, 4, 6);
  const double got = kdmcse::uniformity(points);
  double sum = 0.0;
  int count = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      double d2 = 0.0;
      for (std::size_t k = 0; k < 6; ++k) {
        const double d = points[i][k] - points[j][k];
        d2 += d * d;
      }
      sum += std::exp(-2.0 * d2);
      ++count;
    }
  }
  EXPECT_NEAR(got, std::log(sum / count), 1e-12);
}

TEST(Uniformity, DuplicatePointNeverDecreasesPotential) {
  kdmcse::SplitMix64 rng(57);
  for (int it = 0; it < 50; ++it) {
    Batch points = testutil::random_batch(rng, 3 + rng.next() % 3, 5);
    const double before = kdmcse::uniformity(points);
    points.push_back(points[rng.next() % points.size()]);
    const double after = kdmcse::uniformity(points);
    EXPECT_GE(after, before - 1e-12);
  }
}

TEST(Uniformity, FewerThanTwoPoints) {
  expect_error(ErrorCode::FewerThanTwoPoints, [] { kdmcse::uniformity({{1.0, 0.0}}); });
}

TEST(EvaluateStudent, ComponentsAndNanAlignment) {
  kdmcse::SplitMix64 rng(58);
  const Batch rows = testutil::random_batch(rng, 5, 6);
  const StudentParams student = student_with_rows(rows);
  std::vector<StsPair> pairs{
      {"s0", "s1", 4.5}, {"s1", "s2", 1.0}, {"s2", "s3", 2.0}, {"s3", "s4", 3.0}};
  const kdmcse::EvalReport report = kdmcse::evaluate_student(student, pairs);
  EXPECT_DOUBLE_EQ(report.spearman, kdmcse::sts_eval(student, pairs));
  // one qualifying positive pair (gold >= 4)
  const double expected_alignment = kdmcse::alignment(
      {{kdmcse::eval_embedding(student, "s0"), kdmcse::eval_embedding(student, "s1")}});
  EXPECT_DOUBLE_EQ(report.alignment, expected_alignment);
  EXPECT_TRUE(std::isfinite(report.uniformity));

  for (StsPair& p : pairs) p.gold = std::min(p.gold, 3.0);
  const kdmcse::EvalReport no_pos = kdmcse::evaluate_student(student, pairs);
  EXPECT_TRUE(std::isnan(no_pos.alignment));
}

TEST(StsTsv, RoundTripAndValidation) {
  testutil::TempDir dir("sts");
  std::vector<StsPair> pairs{{"a", "b", 2.5}, {"c", "d", 0.0}, {"e", "f", 5.0}};
  kdmcse::write_sts_tsv(dir.path() / "p.tsv", pairs);
  const std::vector<StsPair> loaded = kdmcse::load_sts_tsv(dir.path() / "p.tsv");
  ASSERT_EQ(loaded.size(), 3u);
  EXPECT_EQ(loaded[0].id_a, "a");
  EXPECT_DOUBLE_EQ(loaded[0].gold, 2.5);

  kdmcse::write_file(dir.path() / "bad.tsv", "a\tb\n");
  expect_error(ErrorCode::MalformedFile, [&] { kdmcse::load_sts_tsv(dir.path() / "bad.tsv"); });
  kdmcse::write_file(dir.path() / "range.tsv", "a\tb\t7.5\n");
  expect_error(ErrorCode::MalformedFile, [&] { kdmcse::load_sts_tsv(dir.path() / "range.tsv"); });
}
