// jcas: train / validate / compare the learned transceiver and its benchmarks.
#include <CLI11.hpp>

#include <cstdio>
#include <exception>

#include "jcas/experiment.hpp"

namespace {

jcas::ExperimentConfig load_with_overrides(const std::string& config_path,
                                           const std::string& out_dir,
                                           std::optional<uint64_t> seed,
                                           std::optional<unsigned> threads) {
  jcas::ExperimentConfig cfg = jcas::load_config(config_path);
  if (!out_dir.empty()) cfg.out_dir = out_dir;
  if (seed) cfg.train.seed = *seed;
  if (threads) cfg.threads = *threads;
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learned joint communication and sensing workbench"};
  app.require_subcommand(1);

  std::string config_path, checkpoint_path, out_dir, spec_path, out_file;
  std::vector<std::string> csv_paths;
  std::optional<uint64_t> seed;
  std::optional<unsigned> threads;

  auto add_common = [&](CLI::App* sub, bool needs_config) {
    auto* opt = sub->add_option("--config", config_path, "JSON experiment config");
    if (needs_config) opt->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory (overrides config and JCAS_OUT_DIR)");
    sub->add_option("--seed", seed, "seed override");
    sub->add_option("--threads", threads, "cap on worker threads");
  };

  CLI::App* train = app.add_subcommand("train", "train a model, write checkpoint + history");
  add_common(train, true);

  CLI::App* validate =
      app.add_subcommand("validate", "evaluate a checkpoint over the upsampling sweep");
  add_common(validate, true);
  validate->add_option("--checkpoint", checkpoint_path, "model checkpoint")
      ->required()
      ->check(CLI::ExistingFile);

  CLI::App* compare = app.add_subcommand(
      "encoding-compare", "train counting and one-hot variants, pair their curves");
  add_common(compare, true);

  CLI::App* bench =
      app.add_subcommand("esprit-bench", "benchmark estimator RMSE on synthetic scans");
  add_common(bench, true);

  CLI::App* plot = app.add_subcommand("plot", "render CSV columns as an SVG line chart");
  plot->add_option("csv", csv_paths, "input CSV files")->required()->check(CLI::ExistingFile);
  plot->add_option("--spec", spec_path, "JSON plot spec")->required()->check(CLI::ExistingFile);
  plot->add_option("--out", out_file, "output SVG path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) {
      const auto cfg = load_with_overrides(config_path, out_dir, seed, threads);
      const auto path = jcas::cmd_train(cfg);
      std::printf("wrote %s\n", path.c_str());
    } else if (validate->parsed()) {
      const auto cfg = load_with_overrides(config_path, out_dir, seed, threads);
      const auto path = jcas::cmd_validate(cfg, checkpoint_path);
      std::printf("wrote %s\n", path.c_str());
    } else if (compare->parsed()) {
      const auto cfg = load_with_overrides(config_path, out_dir, seed, threads);
      const auto path = jcas::cmd_encoding_compare(cfg);
      std::printf("wrote %s\n", path.c_str());
    } else if (bench->parsed()) {
      const auto cfg = load_with_overrides(config_path, out_dir, seed, threads);
      const auto path = jcas::cmd_esprit_bench(cfg);
      std::printf("wrote %s\n", path.c_str());
    } else if (plot->parsed()) {
      std::vector<std::filesystem::path> paths(csv_paths.begin(), csv_paths.end());
      jcas::cmd_plot(paths, spec_path, out_file);
      std::printf("wrote %s\n", out_file.c_str());
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
