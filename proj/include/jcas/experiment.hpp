// Configuration-driven experiment front end: JSON configs, result CSVs, and
// the subcommand implementations behind the CLI.
#pragma once

#include <filesystem>
#include <optional>

#include "jcas/csv.hpp"
#include "jcas/training.hpp"

namespace jcas {

struct ExperimentConfig {
  TrainConfig train;
  std::vector<std::size_t> u_list{1, 2, 3, 4, 6, 8, 16, 32, 64};
  std::size_t validation_samples = 100000;
  std::filesystem::path out_dir;
  unsigned threads = 1;

  void validate() const;
};

// Strict parse: unknown keys are an error (listed in the message). Angles are
// degrees at this boundary and converted once.
ExperimentConfig config_from_json(const std::string& json_text);
ExperimentConfig load_config(const std::filesystem::path& path);
std::string config_to_json(const ExperimentConfig& cfg);  // canonical, round-trips

// FNV-1a over the canonical serialization.
uint64_t config_hash(const ExperimentConfig& cfg);

struct CommandPaths {
  std::filesystem::path out_dir;  // resolved output directory
};

// train: checkpoint(s) + per-epoch history CSV. Returns the history path.
std::filesystem::path cmd_train(const ExperimentConfig& cfg);
// validate: per-u metrics CSV from a checkpoint.
std::filesystem::path cmd_validate(const ExperimentConfig& cfg,
                                   const std::filesystem::path& checkpoint);
// encoding-compare: two trainings differing only in the encoding; paired
// per-epoch CSV.
std::filesystem::path cmd_encoding_compare(const ExperimentConfig& cfg);
// esprit-bench: benchmark RMSE versus u on synthetic scans with known counts.
std::filesystem::path cmd_esprit_bench(const ExperimentConfig& cfg);
// plot: CSV columns -> SVG chart, per the JSON plot spec.
void cmd_plot(const std::vector<std::filesystem::path>& csv_paths,
              const std::filesystem::path& spec_path,
              const std::filesystem::path& out_svg);

CsvTable history_to_csv(const TrainHistory& history, uint64_t cfg_hash, uint64_t seed);
CsvTable metrics_to_csv(const std::vector<MetricsRecord>& records, uint64_t cfg_hash,
                        uint64_t seed);

}  // namespace jcas
