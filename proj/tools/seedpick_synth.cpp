// Writes synthetic feature packs for demos, tests and scale runs.
#include <CLI11.hpp>

#include <iostream>

#include "seedpick/error.hpp"
#include "seedpick/feature_store.hpp"
#include "seedpick/synthetic.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Generate synthetic feature packs"};
  seedpick::SyntheticConfig cfg;
  std::string out;
  bool demo = false;
  std::size_t novel = 0;
  std::size_t duplicates = 49;
  app.add_option("--out", out, "Output .sfp path")->required();
  app.add_flag("--demo", demo, "Write the bundled 8-scene demo pack");
  app.add_option("--scenes", cfg.scenes)->capture_default_str();
  app.add_option("--dim", cfg.dimension)->capture_default_str();
  app.add_option("--vocabulary", cfg.vocabulary)->capture_default_str();
  app.add_option("--min-modes", cfg.min_modes)->capture_default_str();
  app.add_option("--max-modes", cfg.max_modes)->capture_default_str();
  app.add_option("--min-views", cfg.min_views)->capture_default_str();
  app.add_option("--max-views", cfg.max_views)->capture_default_str();
  app.add_option("--noise", cfg.noise)->capture_default_str();
  app.add_option("--min-cost", cfg.min_cost)->capture_default_str();
  app.add_option("--max-cost", cfg.max_cost)->capture_default_str();
  app.add_flag("--cost-free", cfg.cost_free);
  app.add_option("--seed", cfg.seed)->capture_default_str();
  app.add_option("--sequence-novel", novel, "Write one redundant sequence with this many novel frames instead");
  app.add_option("--sequence-duplicates", duplicates)->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  try {
    seedpick::FeaturePack pack;
    if (demo) {
      pack = seedpick::make_demo_pack();
    } else if (novel > 0) {
      pack = seedpick::make_redundant_sequence_pack(novel, duplicates, cfg.dimension, cfg.seed);
    } else {
      pack = seedpick::make_synthetic_pack(cfg);
    }
    seedpick::write_pack(pack, out);
    std::cout << "wrote " << pack.scenes.size() << " scenes to " << out << "\n";
  } catch (const seedpick::Error& e) {
    std::cerr << kind_name(e.kind()) << ": " << e.what() << "\n";
    return 2;
  }
  return 0;
}
