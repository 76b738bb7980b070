// Acceptance suite: one test per criterion, each printing an explicit
// pass/fail line. Tolerances are fixed here, in code.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <set>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "kdmcse/checkpoint.hpp"
#include "kdmcse/cli.hpp"
#include "kdmcse/eval.hpp"
#include "kdmcse/gradcheck.hpp"
#include "kdmcse/objectives.hpp"
#include "kdmcse/similarity.hpp"
#include "kdmcse/synthetic.hpp"
#include "kdmcse/trainer.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using kdmcse::Batch;
using kdmcse::FilterMask;
using kdmcse::LossResult;
using kdmcse::MarginWeights;
using kdmcse::ObjectiveConfig;
using kdmcse::Slot;
using kdmcse::Vector;

namespace {

struct CriterionReporter {
  const char* name;
  explicit CriterionReporter(const char* n) : name(n) {}
  ~CriterionReporter() {
    std::printf("[criterion] %s: %s\n", name, ::testing::Test::HasFailure() ? "FAIL" : "PASS");
    std::fflush(stdout);
  }
};

ObjectiveConfig reference_cfg() {
  ObjectiveConfig cfg;  // tau = tau' = 0.05, margin = 0.125, threshold = 0.9
  return cfg;
}

struct RandomCase {
  Batch view_z, view_z_prime, teacher, raw_text, raw_visual;
};

RandomCase random_case(kdmcse::SplitMix64& rng, std::size_t n, std::size_t dim) {
  RandomCase c;
  c.view_z = testutil::random_batch(rng, n, dim);
  c.view_z_prime = testutil::nearby_batch(rng, c.view_z);
  c.teacher = testutil::random_batch(rng, n, dim);
  c.raw_text = testutil::concept_batch(rng, n, dim, 2, 0.15);
  c.raw_visual = testutil::concept_batch(rng, n, dim, 2, 0.15);
  return c;
}

}  // namespace

TEST(Acceptance, C1_GradientCorrectness) {
  CriterionReporter reporter("1 gradient correctness (six objectives, 20 batches, <1e-4)");
  const auto start = std::chrono::steady_clock::now();
  const std::vector<kdmcse::GradCheckRow> rows =
      kdmcse::run_objective_gradchecks(reference_cfg(), /*seed=*/2024,
                                       /*batches_per_objective=*/20, /*epsilon=*/1e-4,
                                       /*tolerance=*/1e-4);
  std::set<std::string> objectives;
  for (const kdmcse::GradCheckRow& row : rows) {
    objectives.insert(row.objective);
    EXPECT_TRUE(row.pass) << row.objective << "/" << row.slot << ": " << row.max_rel_err;
    EXPECT_LT(row.max_rel_err, 1e-4) << row.objective << "/" << row.slot;
  }
  EXPECT_EQ(objectives.size(), 6u);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  EXPECT_LT(seconds, 60.0);
}

TEST(Acceptance, C2_ReductionIdentities) {
  CriterionReporter reporter("2 reduction identities (<=1e-10, 100 random batches)");
  kdmcse::SplitMix64 rng(7001);
  for (int it = 0; it < 100; ++it) {
    const std::size_t n = 2 + rng.next() % 3;
    const std::size_t dim = 4 + 2 * (rng.next() % 3);
    const RandomCase c = random_case(rng, n, dim);
    ObjectiveConfig cfg = reference_cfg();

    // (a) adapacse with zero margin == plain InfoNCE over the same pairs
    ObjectiveConfig zero = cfg;
    zero.margin = 0.0;
    const kdmcse::SoftLabels soft = kdmcse::soft_labels(c.raw_text, c.raw_visual);
    const MarginWeights delta = kdmcse::margin_weights(soft.tt);
    const LossResult adap = kdmcse::adapacse_loss(c.view_z, c.view_z_prime, delta, zero);
    const LossResult inf = kdmcse::simcse_loss(c.view_z, c.view_z_prime, zero);
    for (std::size_t i = 0; i < n; ++i) {
      EXPECT_NEAR(adap.per_anchor[i], inf.per_anchor[i], 1e-10);
    }

    // (b) all-pass mask == unfiltered
    const LossResult filtered = kdmcse::filtered_infonce(c.view_z, c.view_z_prime, c.teacher,
                                                         kdmcse::all_pass_mask(n, n), cfg);
    const LossResult plain = kdmcse::mcse_loss(c.view_z, c.view_z_prime, c.teacher, cfg);
    for (std::size_t i = 0; i < n; ++i) {
      EXPECT_NEAR(filtered.per_anchor[i], plain.per_anchor[i], 1e-10);
    }

    // (c) arccse with zero margin == simcse
    const LossResult arc = kdmcse::arccse_loss(c.view_z, c.view_z_prime, zero);
    for (std::size_t i = 0; i < n; ++i) {
      EXPECT_NEAR(arc.per_anchor[i], inf.per_anchor[i], 1e-10);
    }

    // (d) identical teachers: the combined loss equals either branch
    const kdmcse::SoftLabels same = kdmcse::soft_labels(c.raw_text, c.raw_text);
    const LossResult combined =
        kdmcse::kdmcse_loss(c.view_z, c.view_z_prime, c.teacher, c.teacher, same, cfg);
    const FilterMask mask = kdmcse::filter_mask(same.tv, cfg.threshold);
    const MarginWeights branch_delta = kdmcse::margin_weights(same.tv);
    const LossResult branch = kdmcse::adapacse_filtered_loss(c.view_z, c.view_z_prime, c.teacher,
                                                             mask, branch_delta, cfg);
    for (std::size_t i = 0; i < n; ++i) {
      EXPECT_NEAR(combined.per_anchor[i], branch.per_anchor[i], 1e-10);
    }
  }
}

TEST(Acceptance, C3_InvarianceSuite) {
  CriterionReporter reporter("3 invariance suite (scale, permutation, monotonicity)");
  kdmcse::SplitMix64 rng(7002);

  // scale invariance: rescaling one row changes no loss by more than 1e-9
  for (int it = 0; it < 100; ++it) {
    const std::size_t n = 2 + rng.next() % 3;
    const RandomCase c = random_case(rng, n, 6);
    const ObjectiveConfig cfg = reference_cfg();
    const kdmcse::SoftLabels soft = kdmcse::soft_labels(c.raw_text, c.raw_visual);

    auto all_losses = [&](const Batch& a, const Batch& b) {
      std::vector<double> values;
      for (const LossResult& r :
           {kdmcse::simcse_loss(a, b, cfg), kdmcse::mcse_loss(a, b, c.teacher, cfg),
            kdmcse::arccse_loss(a, b, cfg),
            kdmcse::kdmcse_loss(a, b, c.teacher, c.teacher, soft, cfg)}) {
        values.insert(values.end(), r.per_anchor.begin(), r.per_anchor.end());
      }
      return values;
    };

    const std::vector<double> before = all_losses(c.view_z, c.view_z_prime);
    Batch scaled = c.view_z;
    const std::size_t row = rng.next() % n;
    const double lambda = rng.uniform(0.1, 10.0);
    for (double& x : scaled[row]) x *= lambda;
    const std::vector<double> after = all_losses(scaled, c.view_z_prime);
    for (std::size_t k = 0; k < before.size(); ++k) {
      EXPECT_NEAR(before[k], after[k], 1e-9);
    }
  }

  // permutation equivariance: exact
  for (int it = 0; it < 100; ++it) {
    const std::size_t n = 3 + rng.next() % 2;
    const RandomCase c = random_case(rng, n, 5);
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    kdmcse::SplitMix64 shuffle_rng(rng.next());
    shuffle_rng.shuffle(perm);
    Batch pa(n), pb(n), pt(n);
    for (std::size_t i = 0; i < n; ++i) {
      pa[i] = c.view_z[perm[i]];
      pb[i] = c.view_z_prime[perm[i]];
      pt[i] = c.teacher[perm[i]];
    }
    const ObjectiveConfig cfg = reference_cfg();
    const LossResult orig = kdmcse::mcse_loss(c.view_z, c.view_z_prime, c.teacher, cfg);
    const LossResult permuted = kdmcse::mcse_loss(pa, pb, pt, cfg);
    for (std::size_t i = 0; i < n; ++i) {
      EXPECT_EQ(permuted.per_anchor[i], orig.per_anchor[perm[i]]);
    }
    EXPECT_EQ(permuted.mean, orig.mean);
  }

  // mask monotonicity: dropping one more negative weakly decreases the loss
  for (int it = 0; it < 100; ++it) {
    const std::size_t n = 3;
    const RandomCase c = random_case(rng, n, 6);
    const ObjectiveConfig cfg = reference_cfg();
    FilterMask mask = kdmcse::all_pass_mask(n, n);
    const LossResult full =
        kdmcse::filtered_infonce(c.view_z, c.view_z_prime, c.teacher, mask, cfg);
    const std::size_t i = rng.next() % n;
    std::size_t j = rng.next() % n;
    while (j == i) j = (j + 1) % n;
    mask.at(i, j) = 0;
    const LossResult dropped =
        kdmcse::filtered_infonce(c.view_z, c.view_z_prime, c.teacher, mask, cfg);
    for (std::size_t k = 0; k < n; ++k) {
      EXPECT_LE(dropped.per_anchor[k], full.per_anchor[k] + 1e-12);
    }
  }

  // conditional margin monotonicity: theta > m * delta for all negatives
  for (int it = 0; it < 100; ++it) {
    const std::size_t n = 3;
    const RandomCase c = random_case(rng, n, 6);
    const kdmcse::SoftLabels soft = kdmcse::soft_labels(c.raw_text, c.raw_visual);
    const MarginWeights delta = kdmcse::margin_weights(soft.tt);
    double margin_cap = 3.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j || delta.at(i, j) == 0.0) continue;
        const double theta = kdmcse::angle(c.view_z[i], c.view_z_prime[j]);
        margin_cap = std::min(margin_cap, theta / delta.at(i, j));
      }
    }
    if (margin_cap <= 1e-6) continue;
    ObjectiveConfig lo = reference_cfg(), hi = reference_cfg();
    lo.margin = 0.45 * margin_cap;
    hi.margin = 0.9 * margin_cap;
    const LossResult small_margin = kdmcse::adapacse_loss(c.view_z, c.view_z_prime, delta, lo);
    const LossResult large_margin = kdmcse::adapacse_loss(c.view_z, c.view_z_prime, delta, hi);
    for (std::size_t i = 0; i < n; ++i) {
      EXPECT_GE(large_margin.per_anchor[i], small_margin.per_anchor[i] - 1e-12);
    }
  }

  // filter-mask threshold monotonicity: exact
  for (int it = 0; it < 100; ++it) {
    const Batch rows = testutil::concept_batch(rng, 5, 6);
    const kdmcse::SimilarityMatrix sim = kdmcse::pairwise_cosine(rows, rows);
    double t1 = rng.uniform(-1.0, 1.0);
    double t2 = rng.uniform(-1.0, 1.0);
    if (t1 > t2) std::swap(t1, t2);
    const FilterMask m1 = kdmcse::filter_mask(sim, t1);
    const FilterMask m2 = kdmcse::filter_mask(sim, t2);
    for (std::size_t k = 0; k < m1.entries.size(); ++k) {
      EXPECT_LE(m1.entries[k], m2.entries[k]);
    }
  }
}

TEST(Acceptance, C4_OracleEquivalence) {
  CriterionReporter reporter("4 oracle equivalence (independent transcription, <=1e-10)");
  kdmcse::SplitMix64 rng(7004);
  const std::size_t n = 3;
  const RandomCase c = random_case(rng, n, 4);
  const ObjectiveConfig cfg = reference_cfg();
  const Batch t_proj = testutil::random_batch(rng, n, 4);

  const kdmcse::SoftLabels soft = kdmcse::soft_labels(c.raw_text, c.raw_visual);
  const FilterMask mask_tv = kdmcse::filter_mask(soft.tv, cfg.threshold);
  const FilterMask mask_tt = kdmcse::filter_mask(soft.tt, cfg.threshold);
  const MarginWeights delta_tv = kdmcse::margin_weights(soft.tv);
  const MarginWeights delta_tt = kdmcse::margin_weights(soft.tt);

  oracle::mask_t omask_tv(n, std::vector<int>(n, 1)), omask_tt(n, std::vector<int>(n, 1));
  oracle::delta_t odelta_tv(n, std::vector<double>(n, 0)), odelta_tt(n, std::vector<double>(n, 0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      omask_tv[i][j] = mask_tv.at(i, j);
      omask_tt[i][j] = mask_tt.at(i, j);
      odelta_tv[i][j] = delta_tv.at(i, j);
      odelta_tt[i][j] = delta_tt.at(i, j);
    }
  }

  const LossResult simcse = kdmcse::simcse_loss(c.view_z, c.view_z_prime, cfg);
  const LossResult mcse = kdmcse::mcse_loss(c.view_z, c.view_z_prime, c.teacher, cfg);
  const LossResult filtered =
      kdmcse::filtered_infonce(c.view_z, c.view_z_prime, c.teacher, mask_tv, cfg);
  const LossResult arccse = kdmcse::arccse_loss(c.view_z, c.view_z_prime, cfg);
  const LossResult adapacse = kdmcse::adapacse_loss(c.view_z, c.view_z_prime, delta_tt, cfg);
  const LossResult adap_filtered = kdmcse::adapacse_filtered_loss(
      c.view_z, c.view_z_prime, c.teacher, mask_tv, delta_tv, cfg);
  const LossResult combined =
      kdmcse::kdmcse_loss(c.view_z, c.view_z_prime, c.teacher, t_proj, soft, cfg);

  for (std::size_t i = 0; i < n; ++i) {
    EXPECT_NEAR(simcse.per_anchor[i], oracle::simcse_anchor(i, c.view_z, c.view_z_prime, cfg.tau),
                1e-10);
    EXPECT_NEAR(mcse.per_anchor[i],
                oracle::mcse_anchor(i, c.view_z, c.view_z_prime, c.teacher, cfg.tau_prime),
                1e-10);
    EXPECT_NEAR(filtered.per_anchor[i],
                oracle::filtered_infonce_anchor(i, c.view_z, c.view_z_prime, c.teacher, omask_tv,
                                                cfg.tau_prime),
                1e-10);
    EXPECT_NEAR(arccse.per_anchor[i],
                oracle::arccse_anchor(i, c.view_z, c.view_z_prime, cfg.tau, cfg.margin), 1e-10);
    EXPECT_NEAR(adapacse.per_anchor[i],
                oracle::adapacse_anchor(i, c.view_z, c.view_z_prime, odelta_tt, cfg.tau,
                                        cfg.margin),
                1e-10);
    EXPECT_NEAR(adap_filtered.per_anchor[i],
                oracle::adapacse_filtered_anchor(i, c.view_z, c.view_z_prime, c.teacher, omask_tv,
                                                 odelta_tv, cfg.tau_prime, cfg.margin, true),
                1e-10);
    EXPECT_NEAR(combined.per_anchor[i],
                oracle::kdmcse_anchor(i, c.view_z, c.view_z_prime, c.teacher, t_proj, omask_tv,
                                      odelta_tv, omask_tt, odelta_tt, cfg.tau_prime, cfg.margin,
                                      true),
                1e-10);
  }

  // histograms and ranks match brute-force loops exactly
  const Batch stats_rows = testutil::random_batch(rng, 8, 5);
  const kdmcse::SimilarityMatrix sim = kdmcse::pairwise_cosine(stats_rows, stats_rows);
  const std::size_t bins = 9;
  const auto hist = kdmcse::similarity_histogram(sim, bins);
  std::vector<std::size_t> expected(bins, 0);
  for (std::size_t i = 0; i < sim.rows; ++i) {
    for (std::size_t j = 0; j < sim.cols; ++j) {
      if (i == j) continue;
      std::size_t b = static_cast<std::size_t>((sim.at(i, j) + 1.0) / (2.0 / bins));
      if (b >= bins) b = bins - 1;
      ++expected[b];
    }
  }
  for (std::size_t b = 0; b < bins; ++b) EXPECT_EQ(hist[b].count, expected[b]);

  const Batch img_rows = testutil::random_batch(rng, 4, 5);
  const kdmcse::SimilarityMatrix tv = kdmcse::pairwise_cosine(stats_rows, img_rows);
  std::map<std::size_t, std::set<std::size_t>> gold;
  for (std::size_t img = 0; img < 4; ++img) gold[img] = {img * 2, img * 2 + 1};
  const auto ranks = kdmcse::true_caption_rank(tv, gold);
  for (const auto& [img, captions] : gold) {
    std::size_t worst = 0;
    for (std::size_t cap : captions) {
      std::size_t rank = 1;
      for (std::size_t other = 0; other < tv.rows; ++other) {
        if (other == cap) continue;
        if (tv.at(other, img) > tv.at(cap, img) ||
            (tv.at(other, img) == tv.at(cap, img) && other < cap)) {
          ++rank;
        }
      }
      worst = std::max(worst, rank);
    }
    EXPECT_EQ(ranks.at(img), worst);
  }
}

namespace {

double run_synthetic(kdmcse::Objective objective, const kdmcse::SyntheticData& data) {
  kdmcse::TrainConfig config;
  config.objective = objective;
  config.batch_size = 16;
  config.steps = 2000;
  config.eval_every = 125;
  config.seed = 5;
  config.learning_rate = 0.03;
  config.dim_h = 64;
  config.dim_g = 32;

  std::set<std::string> ids(data.manifest.text_only_ids.begin(),
                            data.manifest.text_only_ids.end());
  for (const auto& pair : data.dev_pairs) {
    ids.insert(pair.id_a);
    ids.insert(pair.id_b);
  }
  kdmcse::StudentDims dims{config.dim_h, config.dim_g, data.text.dim(), data.visual.dim()};
  kdmcse::StudentParams student =
      kdmcse::init_student({ids.begin(), ids.end()}, dims, config.dropout_rate, config.seed);
  const kdmcse::TrainHistory history =
      kdmcse::train(config, data.manifest, &data.text, &data.visual, data.dev_pairs, student);
  return history.best_spearman;
}

}  // namespace

TEST(Acceptance, C5_SyntheticEndToEnd) {
  CriterionReporter reporter("5 synthetic end-to-end (dev Spearman >= 0.8, beats simcse)");
  const auto start = std::chrono::steady_clock::now();

  kdmcse::SyntheticSpec spec;  // 64 concepts, 256 sentences, 200 dev pairs
  const kdmcse::SyntheticData data = kdmcse::make_synthetic(spec);

  const double kdmcse_spearman = run_synthetic(kdmcse::Objective::kdmcse, data);
  const double simcse_spearman = run_synthetic(kdmcse::Objective::simcse, data);
  std::printf("  kdmcse dev spearman = %.4f, simcse ablation = %.4f\n", kdmcse_spearman,
              simcse_spearman);
  EXPECT_GE(kdmcse_spearman, 0.8);
  EXPECT_GT(kdmcse_spearman, simcse_spearman);

  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  EXPECT_LT(seconds, 300.0);
}

TEST(Acceptance, C6_AblationCoherence) {
  CriterionReporter reporter("6 ablation coherence (enum == hyperparameter, <=1e-12)");
  kdmcse::SyntheticSpec spec;
  spec.concepts = 8;
  spec.sentences = 32;
  spec.teacher_dim = 12;
  spec.dev_pair_count = 20;
  const kdmcse::SyntheticData data = kdmcse::make_synthetic(spec);

  auto run50 = [&](kdmcse::Objective objective, double margin, bool filter_enabled) {
    kdmcse::TrainConfig config;
    config.objective = objective;
    config.batch_size = 8;
    config.steps = 50;
    config.eval_every = 1000;
    config.seed = 5;
    config.learning_rate = 0.02;
    config.dim_h = 16;
    config.dim_g = 8;
    config.objective_config.margin = margin;
    config.objective_config.filter_enabled = filter_enabled;
    std::set<std::string> ids(data.manifest.text_only_ids.begin(),
                              data.manifest.text_only_ids.end());
    kdmcse::StudentDims dims{config.dim_h, config.dim_g, data.text.dim(), data.visual.dim()};
    kdmcse::StudentParams student =
        kdmcse::init_student({ids.begin(), ids.end()}, dims, config.dropout_rate, config.seed);
    return kdmcse::train(config, data.manifest, &data.text, &data.visual, {}, student);
  };

  const kdmcse::TrainHistory no_margin = run50(kdmcse::Objective::kdmcse_no_margin, 0.125, true);
  const kdmcse::TrainHistory zero_margin = run50(kdmcse::Objective::kdmcse, 0.0, true);
  ASSERT_EQ(no_margin.steps.size(), 50u);
  for (std::size_t i = 0; i < 50; ++i) {
    EXPECT_NEAR(no_margin.steps[i].loss, zero_margin.steps[i].loss, 1e-12);
  }

  const kdmcse::TrainHistory no_filter = run50(kdmcse::Objective::kdmcse_no_filter, 0.125, true);
  const kdmcse::TrainHistory filter_off = run50(kdmcse::Objective::kdmcse, 0.125, false);
  for (std::size_t i = 0; i < 50; ++i) {
    EXPECT_NEAR(no_filter.steps[i].loss, filter_off.steps[i].loss, 1e-12);
  }
}

TEST(Acceptance, C7_InterleavingSchedule) {
  CriterionReporter reporter("7 interleaving schedule (count == floor(T/p))");
  const std::size_t T = 100;
  for (const auto& [d, dm] : std::vector<std::pair<std::size_t, std::size_t>>{
           {1000, 250}, {1000, 300}, {5, 5}}) {
    const std::size_t p = kdmcse::paired_step(d, dm);
    std::size_t multimodal = 0;
    for (std::size_t t = 1; t <= T; ++t) {
      if (kdmcse::step_kind(t, p) == kdmcse::Branch::multimodal) ++multimodal;
    }
    EXPECT_EQ(multimodal, T / p) << "|D|=" << d << " |DM|=" << dm;
  }
}

TEST(Acceptance, C8_Determinism) {
  CriterionReporter reporter("8 determinism (byte-identical CSVs and checkpoints)");
  testutil::TempDir dir("accept_det");

  kdmcse::SyntheticSpec spec;
  spec.concepts = 6;
  spec.sentences = 24;
  spec.teacher_dim = 10;
  spec.dev_pair_count = 30;
  spec.seed = 11;
  const kdmcse::SyntheticData data = kdmcse::make_synthetic(spec);
  const auto text = dir.path() / "text.bin";
  const auto visual = dir.path() / "visual.bin";
  const auto manifest = dir.path() / "manifest.tsv";
  const auto sts = dir.path() / "sts.tsv";
  kdmcse::write_features(text, data.text);
  kdmcse::write_features(visual, data.visual);
  kdmcse::write_manifest(manifest, data.manifest);
  kdmcse::write_sts_tsv(sts, data.dev_pairs);

  auto run_cli = [&](const std::string& out) {
    return kdmcse::cli::run({"train", "--text-features", text.string(), "--visual-features",
                             visual.string(), "--manifest", manifest.string(), "--sts",
                             sts.string(), "--out", out, "--set", "dim_h=16", "--set", "dim_g=8",
                             "--set", "batch_size=8", "--set", "steps=30", "--set",
                             "eval_every=10", "--set", "learning_rate=0.02"});
  };
  ASSERT_EQ(run_cli((dir.path() / "run1").string()), 0);
  ASSERT_EQ(run_cli((dir.path() / "run2").string()), 0);

  for (const char* file : {"steps.csv", "evals.csv", "checkpoint_best.bin"}) {
    EXPECT_EQ(kdmcse::read_file(dir.path() / "run1" / file),
              kdmcse::read_file(dir.path() / "run2" / file))
        << file;
  }

  // the stored best checkpoint reproduces its recorded dev Spearman
  const kdmcse::StudentParams best =
      kdmcse::load_checkpoint(dir.path() / "run1" / "checkpoint_best.bin");
  const std::string evals = kdmcse::read_file(dir.path() / "run1" / "evals.csv");
  double best_recorded = -2.0;
  std::istringstream lines(evals);
  std::string line;
  std::getline(lines, line);
  while (std::getline(lines, line)) {
    const std::size_t c1 = line.find(',');
    const std::size_t c2 = line.find(',', c1 + 1);
    best_recorded = std::max(best_recorded, std::stod(line.substr(c1 + 1, c2 - c1 - 1)));
  }
  EXPECT_NEAR(kdmcse::sts_eval(best, data.dev_pairs), best_recorded, 1e-9);
}

TEST(Acceptance, C9_MetricFixtures) {
  CriterionReporter reporter("9 metric fixtures (alignment, uniformity, spearman)");
  const Vector e1{1, 0, 0};
  const Vector e2{0, 1, 0};
  EXPECT_EQ(kdmcse::alignment({{e1, e2}}), 2.0);

  const Vector a{1, 0};
  const Vector neg_a{-1, 0};
  EXPECT_NEAR(kdmcse::uniformity({a, neg_a}), -8.0, 1e-12);

  EXPECT_EQ(kdmcse::spearman({1, 2, 3}, {10, 20, 30}), 1.0);
  EXPECT_EQ(kdmcse::spearman({1, 2, 3}, {3, 2, 1}), -1.0);
  EXPECT_EQ(kdmcse::spearman({1, 2, 3, 4}, {2, 1, 4, 3}), 0.6);
}
