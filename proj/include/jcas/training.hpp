// Three-stage end-to-end training schedule and the validation loop.
#pragma once

#include <filesystem>

#include "jcas/esprit.hpp"
#include "jcas/model.hpp"

namespace jcas {

struct TrainConfig {
  ModelConfig model;
  double comm_snr_db = 20.0;
  double radar_snr_db = 20.0;
  double weight_radar = 0.9;  // w_r
  double weight_angle = 20.0; // w_a
  double learning_rate = 1e-3;
  uint32_t epochs = 30;
  uint32_t minibatches_per_epoch = 0;  // 0 means 20 * T_max
  uint32_t minibatch_size = 2000;
  SetMethod set_method = SetMethod::kPermute;
  uint64_t seed = 1;
  std::filesystem::path out_dir;  // stage/final checkpoints when non-empty

  uint32_t resolved_minibatches() const {
    return minibatches_per_epoch > 0 ? minibatches_per_epoch : 20 * model.max_targets;
  }
  NoiseConfig noise() const {
    return NoiseConfig::from_snr_db(comm_snr_db, radar_snr_db);
  }
  void validate() const;
};

// Stage 1 for the first third of the epochs, 2 for the second, 3 for the rest
// (boundaries at ceil(E/3) and ceil(2E/3)).
int stage_of(uint32_t epoch, uint32_t total_epochs);

// L1 = (1-wr) Lc + wr wa La; L2 = (1-wr) Lc + wr Ld; L3 = all three.
double combined_loss(int stage, double l_comm, double l_detect, double l_angle,
                     double w_r, double w_a);

struct EpochRecord {
  uint32_t epoch = 0;
  int stage = 1;
  double loss_comm = 0.0, loss_detect = 0.0, loss_angle = 0.0, loss_combined = 0.0;
  double pd = 0.0, pf = 0.0;
  double pf_minibatch_max = 0.0;  // worst per-minibatch training Pf of the epoch
  double bmi = 0.0;
  double angle_rmse = 0.0;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
};

// ---------------------------------------------------------------------------
// Frozen per-minibatch randomness: scenes, channel coefficients, and noise are
// constants of the sample so that gradients flow only through the channel
// algebra.
struct BatchData {
  std::size_t size = 0;
  std::vector<uint32_t> messages;  // 1..M
  Mat bits;                        // batch x nbits
  std::vector<uint32_t> target_counts;
  Mat counting_labels;    // batch x T_max
  Mat angle_targets;      // batch x T_max, first T_n entries per row
  CMat comm_steering;     // batch x K
  CVec comm_fade;         // beta per sample
  CVec comm_noise;        // receiver noise per sample
  std::vector<CMat> target_steering;  // T_max matrices of batch x K (zero rows if absent)
  std::vector<CVec> target_amp;       // T_max vectors (zero if absent)
  CMat radar_noise;       // batch x K
};

BatchData make_batch(const ModelConfig& cfg, const NoiseConfig& noise,
                     const TargetCountRule& rule, std::size_t size, Rng& rng);

// One recorded forward pass over a minibatch, through both channels, with the
// three losses. When update_offsets is set the false-alarm calibration of the
// current minibatch is written back to the model.
struct LossGraph {
  TapedMlp encoder, beamformer, decoder, detector, angler;
  Var constellation, beam, symbols, decoder_in, posterior, radar_rx;
  Var detect_probs;  // offset-adjusted probabilities
  Var l_comm, l_detect, l_angle, total;
  std::size_t matched_pairs = 0;  // angle pairs entering the angle loss
};
LossGraph build_loss_graph(Tape& tape, JcasModel& model, const BatchData& batch, int stage,
                           SetMethod method, double w_r, double w_a, bool update_offsets);

struct TrainResult {
  JcasModel model;
  TrainHistory history;
};

// Deterministic in (config, seed). Throws on divergence after writing a
// diagnostic snapshot next to the checkpoints.
TrainResult train(const TrainConfig& cfg);

// ---------------------------------------------------------------------------
struct MetricsRecord {
  std::size_t upsampling = 1;
  double bmi = 0.0;
  double pd = 0.0;
  double pf = 0.0;
  double rmse_nn = 0.0;         // detected-and-present targets, permute matched
  double rmse_esprit = 0.0;     // same scans and matching, detector-count order
  double gain_comm_db = 0.0;
  double gain_radar_db = 0.0;
  std::size_t num_scans = 0;
  std::size_t matched_nn = 0;   // pair count behind rmse_nn
  std::size_t matched_esprit = 0;
};

struct ValidationConfig {
  std::vector<std::size_t> u_list{1, 2, 3, 4, 6, 8, 16, 32, 64};
  std::size_t num_scans = 100000;
  uint64_t seed = 1;
  std::size_t beam_grid = 256;
};

std::vector<MetricsRecord> validate(const JcasModel& model, const NoiseConfig& noise,
                                    const ValidationConfig& vcfg);

// Mean of |a(theta)^T nu|^2 over a uniform grid of the region, in dB.
double beam_gain_db(const CVec& nu, const AngleRegion& region, std::size_t n_grid,
                    const ArrayConfig& cfg);

}  // namespace jcas
