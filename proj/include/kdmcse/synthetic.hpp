#pragma once

#include <cstdio>
#include <string>
#include <vector>

#include "kdmcse/eval.hpp"
#include "kdmcse/numerics.hpp"
#include "kdmcse/rng.hpp"
#include "kdmcse/teacher_store.hpp"
#include "kdmcse/trainer.hpp"

namespace kdmcse {

/// Synthetic grounded corpus: a set of concept directions on the unit
/// sphere; each sentence and its paired image get noisy copies of the
/// sentence's concept as teacher features. Gold dev scores are teacher
/// text-text cosines rescaled to [0, 5], so a student that recovers the
/// teacher geometry scores highly.
struct SyntheticSpec {
  std::size_t concepts = 64;
  std::size_t sentences = 256;
  std::size_t teacher_dim = 32;
  double noise = 0.25;
  std::size_t dev_pair_count = 200;
  std::uint64_t seed = 5;
};

struct SyntheticData {
  FeatureTable text;
  FeatureTable visual;
  DatasetManifest manifest;
  std::vector<StsPair> dev_pairs;
};

namespace detail {

inline std::string synthetic_id(const char* prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%04zu", prefix, i);
  return buf;
}

inline Vector unit_gaussian(SplitMix64& rng, std::size_t dim) {
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

}  // namespace detail

inline SyntheticData make_synthetic(const SyntheticSpec& spec) {
  if (spec.concepts < 1 || spec.sentences < 2 || spec.teacher_dim < 2) {
    fail(ErrorCode::ConfigError, "make_synthetic: degenerate spec");
  }
  SplitMix64 rng(derive_seed(spec.seed, 100));

  Batch concept_dirs(spec.concepts);
  for (std::size_t k = 0; k < spec.concepts; ++k) {
    concept_dirs[k] = detail::unit_gaussian(rng, spec.teacher_dim);
  }

  std::vector<std::string> sentence_ids(spec.sentences);
  std::vector<std::string> image_ids(spec.sentences);
  Matrix text_features(spec.sentences, spec.teacher_dim);
  Matrix visual_features(spec.sentences, spec.teacher_dim);
  for (std::size_t i = 0; i < spec.sentences; ++i) {
    sentence_ids[i] = detail::synthetic_id("s", i);
    image_ids[i] = detail::synthetic_id("i", i);
    const Vector& dir = concept_dirs[i % spec.concepts];
    const Vector noise_t = detail::unit_gaussian(rng, spec.teacher_dim);
    const Vector noise_v = detail::unit_gaussian(rng, spec.teacher_dim);
    for (std::size_t k = 0; k < spec.teacher_dim; ++k) {
      text_features.at(i, k) = dir[k] + spec.noise * noise_t[k];
      visual_features.at(i, k) = dir[k] + spec.noise * noise_v[k];
    }
  }

  SyntheticData data;
  data.text = make_feature_table(Modality::text, sentence_ids, std::move(text_features), true);
  data.visual =
      make_feature_table(Modality::visual, image_ids, std::move(visual_features), true);
  data.manifest.text_only_ids = sentence_ids;
  for (std::size_t i = 0; i < spec.sentences; ++i) {
    data.manifest.multimodal_pairs.emplace_back(sentence_ids[i], image_ids[i]);
  }

  // Dev pairs: alternate random cross pairs with same-concept pairs so the
  // gold scores cover both coarse and fine similarity structure.
  const std::size_t per_concept = spec.sentences / spec.concepts;
  for (std::size_t k = 0; k < spec.dev_pair_count; ++k) {
    std::size_t a = 0, b = 0;
    if (k % 2 == 1 && per_concept >= 2) {
      const std::size_t group = rng.next() % spec.concepts;
      const std::size_t members = (spec.sentences - group + spec.concepts - 1) / spec.concepts;
      const std::size_t ma = rng.next() % members;
      std::size_t mb = rng.next() % members;
      while (mb == ma) mb = (mb + 1) % members;
      a = group + ma * spec.concepts;
      b = group + mb * spec.concepts;
    } else {
      a = rng.next() % spec.sentences;
      b = rng.next() % spec.sentences;
      while (b == a) b = (b + 1) % spec.sentences;
    }
    const double cos_ab = cosine(data.text.row(a), data.text.row(b));
    data.dev_pairs.push_back({sentence_ids[a], sentence_ids[b], 5.0 * (cos_ab + 1.0) / 2.0});
  }
  return data;
}

}  // namespace kdmcse
