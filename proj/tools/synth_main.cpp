// Writes a synthetic grounded fixture (teacher feature files, manifest, dev
// pairs) so the train/eval/stats subcommands can be exercised end to end
// without any real corpus.

#include <cstdio>
#include <filesystem>
#include <string>

#include <CLI11.hpp>

#include "kdmcse/eval.hpp"
#include "kdmcse/synthetic.hpp"
#include "kdmcse/teacher_store.hpp"
#include "kdmcse/trainer.hpp"

int main(int argc, char** argv) {
  CLI::App app{"synthetic grounded-corpus generator"};
  app.name("kdmcse-synth");

  std::string out;
  kdmcse::SyntheticSpec spec;
  app.add_option("--out", out, "output directory")->required();
  app.add_option("--sentences", spec.sentences, "sentence count");
  app.add_option("--concepts", spec.concepts, "concept count");
  app.add_option("--dim", spec.teacher_dim, "teacher feature dim");
  app.add_option("--noise", spec.noise, "per-sample noise scale");
  app.add_option("--dev-pairs", spec.dev_pair_count, "dev pair count");
  app.add_option("--seed", spec.seed, "seed");

  CLI11_PARSE(app, argc, argv);

  try {
    const kdmcse::SyntheticData data = kdmcse::make_synthetic(spec);
    std::filesystem::create_directories(out);
    const std::filesystem::path dir(out);
    kdmcse::write_features(dir / "text_features.bin", data.text);
    kdmcse::write_features(dir / "visual_features.bin", data.visual);
    kdmcse::write_manifest(dir / "manifest.tsv", data.manifest);
    kdmcse::write_sts_tsv(dir / "sts_dev.tsv", data.dev_pairs);
    std::printf("wrote %zu sentences, %zu pairs, %zu dev pairs to %s\n", data.text.size(),
                data.manifest.multimodal_pairs.size(), data.dev_pairs.size(), out.c_str());
  } catch (const kdmcse::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
