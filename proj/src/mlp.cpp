#include "jcas/mlp.hpp"

#include <cmath>
#include <numbers>

namespace jcas {

std::string_view to_string(OutputTransform t) {
  switch (t) {
    case OutputTransform::kLinear: return "linear";
    case OutputTransform::kMeanPowerNorm: return "mean-power-norm";
    case OutputTransform::kPowerNorm: return "power-norm";
    case OutputTransform::kSoftmax: return "softmax";
    case OutputTransform::kSigmoid: return "sigmoid";
    case OutputTransform::kTanhHalfPi: return "tanh-half-pi";
  }
  return "unknown";
}

std::size_t MlpNet::param_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < weights.size(); ++l)
    n += weights[l].size() + biases[l].size();
  return n;
}

MlpNet make_mlp(std::vector<std::size_t> widths, OutputTransform transform, Rng& rng) {
  if (widths.size() < 2) throw std::invalid_argument("make_mlp: need at least two widths");
  MlpNet net;
  net.widths = std::move(widths);
  net.transform = transform;
  for (std::size_t l = 0; l + 1 < net.widths.size(); ++l) {
    const std::size_t fan_in = net.widths[l], fan_out = net.widths[l + 1];
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    Mat w(fan_in, fan_out);
    for (std::size_t i = 0; i < w.size(); ++i) w.data()[i] = rng.uniform(-bound, bound);
    net.weights.push_back(std::move(w));
    net.biases.emplace_back(1, fan_out);
  }
  return net;
}

namespace {

void affine_inplace(const Mat& x, const Mat& w, const Mat& b, Mat& y) {
  gemm(x, w, y, false);
  for (std::size_t i = 0; i < y.rows(); ++i)
    for (std::size_t j = 0; j < y.cols(); ++j) y(i, j) += b(0, j);
}

void elu_inplace(Mat& x) {
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x.data()[i] < 0.0) x.data()[i] = std::expm1(x.data()[i]);
}

}  // namespace

Mat mlp_forward_raw(const MlpNet& net, const Mat& input) {
  if (input.cols() != net.input_width())
    throw std::invalid_argument("mlp_forward: input width mismatch");
  Mat cur = input;
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    Mat next(cur.rows(), net.widths[l + 1]);
    affine_inplace(cur, net.weights[l], net.biases[l], next);
    if (l + 1 < net.layer_count()) elu_inplace(next);
    cur = std::move(next);
  }
  return cur;
}

Mat apply_transform(const Mat& raw, OutputTransform t) {
  Mat y = raw;
  switch (t) {
    case OutputTransform::kLinear:
      break;
    case OutputTransform::kMeanPowerNorm: {
      if (y.cols() != 2) throw std::invalid_argument("mean-power-norm expects 2 columns");
      double p = 0.0;
      for (std::size_t i = 0; i < y.size(); ++i) p += y.data()[i] * y.data()[i];
      p /= static_cast<double>(y.rows());
      const double inv = 1.0 / std::sqrt(std::max(p, 1e-300));
      for (std::size_t i = 0; i < y.size(); ++i) y.data()[i] *= inv;
      break;
    }
    case OutputTransform::kPowerNorm: {
      double s = 0.0;
      for (std::size_t i = 0; i < y.size(); ++i) s += y.data()[i] * y.data()[i];
      const double inv = 1.0 / std::sqrt(std::max(s, 1e-300));
      for (std::size_t i = 0; i < y.size(); ++i) y.data()[i] *= inv;
      break;
    }
    case OutputTransform::kSoftmax: {
      for (std::size_t i = 0; i < y.rows(); ++i) {
        auto r = y.row(i);
        const double m = *std::max_element(r.begin(), r.end());
        double sum = 0.0;
        for (double& v : r) {
          v = std::exp(v - m);
          sum += v;
        }
        for (double& v : r) v /= sum;
      }
      break;
    }
    case OutputTransform::kSigmoid: {
      for (std::size_t i = 0; i < y.size(); ++i) {
        const double x = y.data()[i];
        y.data()[i] = x >= 0.0 ? 1.0 / (1.0 + std::exp(-x))
                               : std::exp(x) / (1.0 + std::exp(x));
      }
      break;
    }
    case OutputTransform::kTanhHalfPi: {
      for (std::size_t i = 0; i < y.size(); ++i)
        y.data()[i] = 0.5 * std::numbers::pi * std::tanh(y.data()[i]);
      break;
    }
  }
  return y;
}

Mat mlp_forward(const MlpNet& net, const Mat& input) {
  return apply_transform(mlp_forward_raw(net, input), net.transform);
}

Var apply_transform(Tape& tape, Var raw, OutputTransform t) {
  switch (t) {
    case OutputTransform::kLinear: return raw;
    case OutputTransform::kMeanPowerNorm: return tape.mean_power_norm(raw);
    case OutputTransform::kPowerNorm: return tape.power_norm(raw);
    case OutputTransform::kSoftmax: return tape.softmax_rows(raw);
    case OutputTransform::kSigmoid: return tape.sigmoid(raw);
    case OutputTransform::kTanhHalfPi: return tape.tanh_scaled(raw, 0.5 * std::numbers::pi);
  }
  throw std::invalid_argument("apply_transform: unknown transform");
}

TapedMlp mlp_forward(Tape& tape, const MlpNet& net, Var input) {
  if (tape.value(input).cols() != net.input_width())
    throw std::invalid_argument("mlp_forward: input width mismatch");
  TapedMlp taped;
  Var cur = input;
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    Var w = tape.param(net.weights[l]);
    Var b = tape.param(net.biases[l]);
    taped.weights.push_back(w);
    taped.biases.push_back(b);
    cur = tape.add_rowvec(tape.matmul(cur, w), b);
    if (l + 1 < net.layer_count()) cur = tape.elu(cur);
  }
  taped.raw = cur;
  taped.out = apply_transform(tape, cur, net.transform);
  return taped;
}

NetGrads grads_of(const Tape& tape, const TapedMlp& taped) {
  NetGrads g;
  for (Var w : taped.weights) g.weights.push_back(tape.grad(w));
  for (Var b : taped.biases) g.biases.push_back(tape.grad(b));
  return g;
}

AdamState make_adam(const MlpNet& net, double learning_rate) {
  AdamState st;
  st.learning_rate = learning_rate;
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    st.m_weights.emplace_back(net.weights[l].rows(), net.weights[l].cols());
    st.v_weights.emplace_back(net.weights[l].rows(), net.weights[l].cols());
    st.m_biases.emplace_back(1, net.biases[l].cols());
    st.v_biases.emplace_back(1, net.biases[l].cols());
  }
  return st;
}

void adam_step(Mat& param, const Mat& grad, Mat& m, Mat& v, uint64_t step,
               const AdamState& hyper) {
  if (!param.same_shape(grad) || !param.same_shape(m) || !param.same_shape(v))
    throw std::invalid_argument("adam_step: shape mismatch");
  const double b1 = hyper.beta1, b2 = hyper.beta2;
  const double corr1 = 1.0 - std::pow(b1, static_cast<double>(step));
  const double corr2 = 1.0 - std::pow(b2, static_cast<double>(step));
  for (std::size_t i = 0; i < param.size(); ++i) {
    const double g = grad.data()[i];
    m.data()[i] = b1 * m.data()[i] + (1.0 - b1) * g;
    v.data()[i] = b2 * v.data()[i] + (1.0 - b2) * g * g;
    const double mhat = m.data()[i] / corr1;
    const double vhat = v.data()[i] / corr2;
    param.data()[i] -= hyper.learning_rate * mhat / (std::sqrt(vhat) + hyper.epsilon);
  }
}

void adam_step(MlpNet& net, const NetGrads& grads, AdamState& state) {
  if (grads.weights.size() != net.layer_count())
    throw std::invalid_argument("adam_step: gradient layer count mismatch");
  ++state.step;
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    adam_step(net.weights[l], grads.weights[l], state.m_weights[l], state.v_weights[l],
              state.step, state);
    adam_step(net.biases[l], grads.biases[l], state.m_biases[l], state.v_biases[l],
              state.step, state);
  }
}

namespace {
constexpr double kProbClamp = 1e-12;
}

double bce_value(const Mat& pred, const Mat& target) {
  if (!pred.same_shape(target)) throw std::invalid_argument("bce_value: shape mismatch");
  double loss = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double p = std::clamp(pred.data()[i], kProbClamp, 1.0 - kProbClamp);
    const double t = target.data()[i];
    loss -= t * std::log(p) + (1.0 - t) * std::log(1.0 - p);
  }
  return loss / static_cast<double>(pred.size());
}

double ce_value(const Mat& pred, const std::vector<uint32_t>& classes) {
  if (pred.rows() != classes.size()) throw std::invalid_argument("ce_value: count mismatch");
  double loss = 0.0;
  for (std::size_t n = 0; n < pred.rows(); ++n)
    loss -= std::log(std::clamp(pred(n, classes[n]), kProbClamp, 1.0 - kProbClamp));
  return loss / static_cast<double>(pred.rows());
}

double mse_value(const Mat& pred, const Mat& target) {
  if (!pred.same_shape(target)) throw std::invalid_argument("mse_value: shape mismatch");
  double loss = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred.data()[i] - target.data()[i];
    loss += d * d;
  }
  return loss / static_cast<double>(pred.size());
}

}  // namespace jcas
