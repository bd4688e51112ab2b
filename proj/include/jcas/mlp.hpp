// Dense feed-forward networks with ELU hidden activations, the output
// transforms used by the transceiver subnets, and the Adam optimizer.
#pragma once

#include <string_view>

#include "jcas/rng.hpp"
#include "jcas/tape.hpp"

namespace jcas {

enum class OutputTransform : uint8_t {
  kLinear = 0,
  kMeanPowerNorm = 1,  // rows as complex pairs, unit mean power
  kPowerNorm = 2,      // whole vector scaled to unit energy
  kSoftmax = 3,
  kSigmoid = 4,
  kTanhHalfPi = 5,  // (pi/2) * tanh
};

std::string_view to_string(OutputTransform t);

struct MlpNet {
  std::vector<std::size_t> widths;  // input width first, output width last
  std::vector<Mat> weights;         // weights[l]: widths[l] x widths[l+1]
  std::vector<Mat> biases;          // 1 x widths[l+1]
  OutputTransform transform = OutputTransform::kLinear;

  std::size_t layer_count() const { return weights.size(); }
  std::size_t input_width() const { return widths.front(); }
  std::size_t output_width() const { return widths.back(); }
  std::size_t param_count() const;
};

// Glorot-uniform weights, zero biases.
MlpNet make_mlp(std::vector<std::size_t> widths, OutputTransform transform, Rng& rng);

// Plain evaluation (no gradients); applies the output transform.
Mat mlp_forward(const MlpNet& net, const Mat& input);
// Plain evaluation up to the last affine layer, before the output transform.
Mat mlp_forward_raw(const MlpNet& net, const Mat& input);

Mat apply_transform(const Mat& raw, OutputTransform t);

// Forward pass recorded on a tape. Parameters become gradient leaves whose
// handles are exposed for the optimizer.
struct TapedMlp {
  std::vector<Var> weights, biases;
  Var raw;  // pre-transform output
  Var out;  // post-transform output
};
TapedMlp mlp_forward(Tape& tape, const MlpNet& net, Var input);
Var apply_transform(Tape& tape, Var raw, OutputTransform t);

struct NetGrads {
  std::vector<Mat> weights, biases;
};
NetGrads grads_of(const Tape& tape, const TapedMlp& taped);

struct AdamState {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  uint64_t step = 0;
  std::vector<Mat> m_weights, v_weights, m_biases, v_biases;
};
AdamState make_adam(const MlpNet& net, double learning_rate);

// One Adam update with bias correction; increments the step counter.
void adam_step(MlpNet& net, const NetGrads& grads, AdamState& state);
// Single-tensor variant.
void adam_step(Mat& param, const Mat& grad, Mat& m, Mat& v, uint64_t step,
               const AdamState& hyper);

// Value-level losses (metrics; the Tape has differentiable twins).
double bce_value(const Mat& pred, const Mat& target);
double ce_value(const Mat& pred, const std::vector<uint32_t>& classes);
double mse_value(const Mat& pred, const Mat& target);

}  // namespace jcas
