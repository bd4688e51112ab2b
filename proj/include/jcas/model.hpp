// The five-subnet transceiver: symbol encoder, beamformer, decoder, target
// detector, and angle estimator, plus LLR/BMI post-processing and the scan
// combination rule.
#pragma once

#include <filesystem>

#include "jcas/array_channel.hpp"
#include "jcas/detection.hpp"
#include "jcas/mlp.hpp"
#include "jcas/set_match.hpp"

namespace jcas {

// Fixed natural bit labeling of messages 1..M; bit 0 is the most significant.
struct BitLabeling {
  uint32_t num_messages = 0;
  uint32_t num_bits = 0;

  static BitLabeling natural(uint32_t num_messages);
  int bit(uint32_t message, uint32_t k) const;  // message in 1..M
  // Rows of the batch bit matrix for the given messages.
  Mat bits_of(std::span<const uint32_t> messages) const;
  // M x num_bits indicator of bit k being 1 for each message.
  Mat bit_mask() const;
};

struct ModelConfig {
  uint32_t num_messages = 8;   // M, power of two
  uint32_t num_antennas = 16;  // K
  uint32_t max_targets = 3;    // T_max
  AngleRegion comm_region{deg_to_rad(30.0), deg_to_rad(50.0)};
  AngleRegion sensing_region{deg_to_rad(-20.0), deg_to_rad(20.0)};
  Encoding encoding = Encoding::kCounting;
  double pf_target = 1e-2;
  double d_over_lambda = 0.5;

  ArrayConfig array() const { return {num_antennas, d_over_lambda}; }
  void validate() const;
};

struct JcasModel {
  ModelConfig cfg;
  MlpNet encoder;     // [M, 2M, 2M, 2M, 2], mean power norm
  MlpNet beamformer;  // [5, K, K, 2K, 2K], power norm
  MlpNet decoder;     // [2, 2M, 2M, 2M, M], softmax
  MlpNet detector;    // [2K, 2K, 2K, K, T_max(+1)], sigmoid / softmax
  MlpNet angler;      // [2K, 2K, 2K, K, T_max], (pi/2) tanh
  BitLabeling labeling;
  LogitOffset offset;
  std::vector<double> onehot_offset;  // T_max+1 entries, one-hot encoding only

  // Beamformer input row: both angle regions plus a constant one.
  Mat beam_input() const;
};

JcasModel make_model(const ModelConfig& cfg, Rng& rng);

// Normalized constellation, M x 2 (re, im); row m-1 is the symbol of message m.
Mat constellation_of(const JcasModel& model);
// Transmit weight vector nu with unit total power.
CVec beam_vector_of(const JcasModel& model);

cdouble encode(const JcasModel& model, uint32_t message);
// Posterior over messages from the CSI-normalized receive sample.
std::vector<double> decode_posterior(const JcasModel& model, cdouble z_normalized);

// Bitwise log-likelihood ratios ln(P(bit=0)/P(bit=1)), clamped to +-40.
std::vector<double> posteriors_to_llrs(std::span<const double> posterior,
                                       const BitLabeling& labeling);
// Achievable-rate estimate in bits per symbol from per-bit LLRs and the
// transmitted bits.
double bmi(const Mat& llrs, const Mat& sent_bits);

// Raw detector logits; probability conversion (offset + sigmoid) lives with
// the detection encodings.
std::vector<double> detect_logits(const JcasModel& model, const CVec& z_radar);
std::vector<double> estimate_angles(const JcasModel& model, const CVec& z_radar);

// Batch helpers: z rows hold (re | im) halves.
Mat complex_rows(const CMat& z_columns);  // K x u columns -> u x 2K rows

struct ScanDecision {
  std::vector<double> probs;   // averaged over snapshots
  std::vector<double> angles;  // aligned by the set method, then averaged
};
// probs and angles are T_max x u (one column per snapshot).
ScanDecision scan_decision(const Mat& probs, const Mat& angles, SetMethod method);

// --- checkpoint container (versioned binary, little-endian f64 payload) ---
void save_checkpoint(const JcasModel& model, const std::filesystem::path& path);
JcasModel load_checkpoint(const std::filesystem::path& path);

}  // namespace jcas
