#include "jcas/model.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

namespace jcas {

BitLabeling BitLabeling::natural(uint32_t num_messages) {
  if (num_messages < 2 || (num_messages & (num_messages - 1)) != 0)
    throw std::invalid_argument("BitLabeling: M must be a power of two >= 2");
  BitLabeling l;
  l.num_messages = num_messages;
  l.num_bits = static_cast<uint32_t>(std::bit_width(num_messages) - 1);
  return l;
}

int BitLabeling::bit(uint32_t message, uint32_t k) const {
  if (message < 1 || message > num_messages)
    throw std::invalid_argument("BitLabeling: message out of range");
  if (k >= num_bits) throw std::invalid_argument("BitLabeling: bit index out of range");
  return static_cast<int>((message - 1) >> (num_bits - 1 - k)) & 1;
}

Mat BitLabeling::bits_of(std::span<const uint32_t> messages) const {
  Mat b(messages.size(), num_bits);
  for (std::size_t n = 0; n < messages.size(); ++n)
    for (uint32_t k = 0; k < num_bits; ++k) b(n, k) = bit(messages[n], k);
  return b;
}

Mat BitLabeling::bit_mask() const {
  Mat s(num_messages, num_bits);
  for (uint32_t m = 1; m <= num_messages; ++m)
    for (uint32_t k = 0; k < num_bits; ++k) s(m - 1, k) = bit(m, k);
  return s;
}

void ModelConfig::validate() const {
  if (num_messages < 2 || (num_messages & (num_messages - 1)) != 0)
    throw std::invalid_argument("config: M must be a power of two >= 2");
  if (num_antennas < 2) throw std::invalid_argument("config: need at least 2 antennas");
  if (max_targets < 1) throw std::invalid_argument("config: T_max must be >= 1");
  if (!(d_over_lambda > 0.0)) throw std::invalid_argument("config: d/lambda must be > 0");
  if (comm_region.width() < 0.0 || sensing_region.width() < 0.0)
    throw std::invalid_argument("config: angle regions must have lo <= hi");
  if (!(pf_target > 0.0 && pf_target < 1.0))
    throw std::invalid_argument("config: Pf target must be in (0, 1)");
}

Mat JcasModel::beam_input() const {
  Mat in(1, 5);
  in(0, 0) = cfg.comm_region.lo;
  in(0, 1) = cfg.comm_region.hi;
  in(0, 2) = cfg.sensing_region.lo;
  in(0, 3) = cfg.sensing_region.hi;
  in(0, 4) = 1.0;
  return in;
}

JcasModel make_model(const ModelConfig& cfg, Rng& rng) {
  cfg.validate();
  const std::size_t m = cfg.num_messages, k = cfg.num_antennas, t = cfg.max_targets;
  JcasModel model;
  model.cfg = cfg;
  Rng enc_rng = rng.fork("init-encoder");
  Rng bf_rng = rng.fork("init-beamformer");
  Rng dec_rng = rng.fork("init-decoder");
  Rng det_rng = rng.fork("init-detector");
  Rng ang_rng = rng.fork("init-angle");
  model.encoder = make_mlp({m, 2 * m, 2 * m, 2 * m, 2}, OutputTransform::kMeanPowerNorm,
                           enc_rng);
  model.beamformer = make_mlp({5, k, k, 2 * k, 2 * k}, OutputTransform::kPowerNorm, bf_rng);
  model.decoder = make_mlp({2, 2 * m, 2 * m, 2 * m, m}, OutputTransform::kSoftmax, dec_rng);
  const std::size_t det_out = cfg.encoding == Encoding::kCounting ? t : t + 1;
  model.detector = make_mlp({2 * k, 2 * k, 2 * k, k, det_out},
                            cfg.encoding == Encoding::kCounting ? OutputTransform::kSigmoid
                                                                : OutputTransform::kSoftmax,
                            det_rng);
  model.angler = make_mlp({2 * k, 2 * k, 2 * k, k, t}, OutputTransform::kTanhHalfPi, ang_rng);
  model.labeling = BitLabeling::natural(cfg.num_messages);
  if (cfg.encoding == Encoding::kOneHot)
    model.onehot_offset.assign(t + 1, 0.0);
  return model;
}

Mat constellation_of(const JcasModel& model) {
  return mlp_forward(model.encoder, Mat::identity(model.cfg.num_messages));
}

CVec beam_vector_of(const JcasModel& model) {
  const Mat out = mlp_forward(model.beamformer, model.beam_input());
  const std::size_t k = model.cfg.num_antennas;
  CVec nu(k);
  for (std::size_t i = 0; i < k; ++i) nu[i] = {out(0, i), out(0, k + i)};
  return nu;
}

cdouble encode(const JcasModel& model, uint32_t message) {
  if (message < 1 || message > model.cfg.num_messages)
    throw std::invalid_argument("encode: message out of range");
  const Mat c = constellation_of(model);
  return {c(message - 1, 0), c(message - 1, 1)};
}

std::vector<double> decode_posterior(const JcasModel& model, cdouble z_normalized) {
  Mat in(1, 2);
  in(0, 0) = z_normalized.real();
  in(0, 1) = z_normalized.imag();
  const Mat out = mlp_forward(model.decoder, in);
  return {out.row(0).begin(), out.row(0).end()};
}

std::vector<double> posteriors_to_llrs(std::span<const double> posterior,
                                       const BitLabeling& labeling) {
  if (posterior.size() != labeling.num_messages)
    throw std::invalid_argument("posteriors_to_llrs: posterior length mismatch");
  constexpr double kLlrClamp = 40.0;
  std::vector<double> llrs(labeling.num_bits);
  for (uint32_t k = 0; k < labeling.num_bits; ++k) {
    double p0 = 0.0, p1 = 0.0;
    for (uint32_t m = 1; m <= labeling.num_messages; ++m)
      (labeling.bit(m, k) == 0 ? p0 : p1) += posterior[m - 1];
    double llr;
    if (p0 <= 0.0)
      llr = -kLlrClamp;
    else if (p1 <= 0.0)
      llr = kLlrClamp;
    else
      llr = std::log(p0 / p1);
    llrs[k] = std::clamp(llr, -kLlrClamp, kLlrClamp);
  }
  return llrs;
}

double bmi(const Mat& llrs, const Mat& sent_bits) {
  if (!llrs.same_shape(sent_bits)) throw std::invalid_argument("bmi: shape mismatch");
  if (llrs.rows() == 0) return 0.0;
  const double nbits = static_cast<double>(llrs.cols());
  double penalty = 0.0;  // sum of log2(1 + exp(-(1-2b) llr))
  for (std::size_t i = 0; i < llrs.size(); ++i) {
    const double t = (1.0 - 2.0 * sent_bits.data()[i]) * llrs.data()[i];
    // log(1 + e^{-t}), stable both ways
    const double l = t > 0.0 ? std::log1p(std::exp(-t)) : -t + std::log1p(std::exp(t));
    penalty += l;
  }
  penalty /= std::log(2.0) * static_cast<double>(llrs.rows());
  return nbits - penalty;
}

std::vector<double> detect_logits(const JcasModel& model, const CVec& z_radar) {
  const std::size_t k = model.cfg.num_antennas;
  if (z_radar.size() != k) throw std::invalid_argument("detect_logits: length mismatch");
  Mat in(1, 2 * k);
  for (std::size_t i = 0; i < k; ++i) {
    in(0, i) = z_radar[i].real();
    in(0, k + i) = z_radar[i].imag();
  }
  const Mat out = mlp_forward_raw(model.detector, in);
  return {out.row(0).begin(), out.row(0).end()};
}

std::vector<double> estimate_angles(const JcasModel& model, const CVec& z_radar) {
  const std::size_t k = model.cfg.num_antennas;
  if (z_radar.size() != k) throw std::invalid_argument("estimate_angles: length mismatch");
  Mat in(1, 2 * k);
  for (std::size_t i = 0; i < k; ++i) {
    in(0, i) = z_radar[i].real();
    in(0, k + i) = z_radar[i].imag();
  }
  const Mat out = mlp_forward(model.angler, in);
  return {out.row(0).begin(), out.row(0).end()};
}

Mat complex_rows(const CMat& z_columns) {
  const std::size_t k = z_columns.rows(), u = z_columns.cols();
  Mat rows(u, 2 * k);
  for (std::size_t s = 0; s < u; ++s)
    for (std::size_t i = 0; i < k; ++i) {
      rows(s, i) = z_columns(i, s).real();
      rows(s, k + i) = z_columns(i, s).imag();
    }
  return rows;
}

ScanDecision scan_decision(const Mat& probs, const Mat& angles, SetMethod method) {
  if (probs.cols() != angles.cols() || probs.cols() < 1)
    throw std::invalid_argument("scan_decision: need matching snapshot counts >= 1");
  const std::size_t t_max = probs.rows(), u = probs.cols();
  ScanDecision out;
  out.probs.assign(t_max, 0.0);
  for (std::size_t j = 0; j < t_max; ++j) {
    for (std::size_t s = 0; s < u; ++s) out.probs[j] += probs(j, s);
    out.probs[j] /= static_cast<double>(u);
  }

  const std::size_t ta = angles.rows();
  out.angles.assign(ta, 0.0);
  std::vector<double> reference(ta), col(ta);
  for (std::size_t j = 0; j < ta; ++j) reference[j] = angles(j, 0);
  for (std::size_t s = 0; s < u; ++s) {
    for (std::size_t j = 0; j < ta; ++j) col[j] = angles(j, s);
    std::vector<double> aligned = col;
    switch (method) {
      case SetMethod::kNone:
        break;
      case SetMethod::kSortInput:
      case SetMethod::kSortAll:
        std::sort(aligned.begin(), aligned.end());
        break;
      case SetMethod::kPermute: {
        // Align each snapshot to the first one.
        const auto idx = pairing_for(SetMethod::kPermute, reference, col);
        for (std::size_t j = 0; j < ta; ++j) aligned[j] = col[idx[j]];
        break;
      }
    }
    for (std::size_t j = 0; j < ta; ++j) out.angles[j] += aligned[j];
  }
  for (std::size_t j = 0; j < ta; ++j) out.angles[j] /= static_cast<double>(u);
  return out;
}

// ---------------------------------------------------------------------------
// Checkpoint container. Format (all integers little-endian):
//   magic "JCASCKPT" | u32 version=1 | u32 M | u32 K | u32 T_max
//   u8 encoding | u8 reserved x3
//   f64 comm_region lo, hi | f64 sensing_region lo, hi
//   f64 d_over_lambda | f64 pf_target
//   f64 logit_offset | u8 offset_calibrated | u8 pad x3
//   u32 onehot_offset_len | f64 x len
//   u32 labeling M | u32 labeling bit count
//   5 x subnet: u8 transform | u32 width count | u32 widths...
//               per layer: f64 weights (row-major), f64 biases
// ---------------------------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'J', 'C', 'A', 'S', 'C', 'K', 'P', 'T'};
constexpr uint32_t kVersion = 1;

template <typename T>
void write_pod(std::ostream& os, const T& v) {
  static_assert(std::endian::native == std::endian::little,
                "checkpoint writer assumes a little-endian host");
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& is) {
  T v;
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw std::runtime_error("checkpoint: truncated file");
  return v;
}

void write_net(std::ostream& os, const MlpNet& net) {
  write_pod(os, static_cast<uint8_t>(net.transform));
  write_pod(os, static_cast<uint32_t>(net.widths.size()));
  for (std::size_t w : net.widths) write_pod(os, static_cast<uint32_t>(w));
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    os.write(reinterpret_cast<const char*>(net.weights[l].data()),
             static_cast<std::streamsize>(net.weights[l].size() * sizeof(double)));
    os.write(reinterpret_cast<const char*>(net.biases[l].data()),
             static_cast<std::streamsize>(net.biases[l].size() * sizeof(double)));
  }
}

MlpNet read_net(std::istream& is) {
  MlpNet net;
  net.transform = static_cast<OutputTransform>(read_pod<uint8_t>(is));
  const uint32_t nw = read_pod<uint32_t>(is);
  if (nw < 2 || nw > 64) throw std::runtime_error("checkpoint: bad width count");
  net.widths.resize(nw);
  for (auto& w : net.widths) w = read_pod<uint32_t>(is);
  for (std::size_t l = 0; l + 1 < nw; ++l) {
    Mat w(net.widths[l], net.widths[l + 1]);
    is.read(reinterpret_cast<char*>(w.data()),
            static_cast<std::streamsize>(w.size() * sizeof(double)));
    Mat b(1, net.widths[l + 1]);
    is.read(reinterpret_cast<char*>(b.data()),
            static_cast<std::streamsize>(b.size() * sizeof(double)));
    if (!is) throw std::runtime_error("checkpoint: truncated parameters");
    net.weights.push_back(std::move(w));
    net.biases.push_back(std::move(b));
  }
  return net;
}

}  // namespace

void save_checkpoint(const JcasModel& model, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open checkpoint for writing: " + path.string());
  os.write(kMagic, sizeof(kMagic));
  write_pod(os, kVersion);
  write_pod(os, model.cfg.num_messages);
  write_pod(os, model.cfg.num_antennas);
  write_pod(os, model.cfg.max_targets);
  write_pod(os, static_cast<uint8_t>(model.cfg.encoding));
  const uint8_t pad3[3] = {};
  os.write(reinterpret_cast<const char*>(pad3), 3);
  write_pod(os, model.cfg.comm_region.lo);
  write_pod(os, model.cfg.comm_region.hi);
  write_pod(os, model.cfg.sensing_region.lo);
  write_pod(os, model.cfg.sensing_region.hi);
  write_pod(os, model.cfg.d_over_lambda);
  write_pod(os, model.cfg.pf_target);
  write_pod(os, model.offset.value);
  write_pod(os, static_cast<uint8_t>(model.offset.calibrated ? 1 : 0));
  os.write(reinterpret_cast<const char*>(pad3), 3);
  write_pod(os, static_cast<uint32_t>(model.onehot_offset.size()));
  for (double v : model.onehot_offset) write_pod(os, v);
  write_pod(os, model.labeling.num_messages);
  write_pod(os, model.labeling.num_bits);
  write_net(os, model.encoder);
  write_net(os, model.beamformer);
  write_net(os, model.decoder);
  write_net(os, model.detector);
  write_net(os, model.angler);
  if (!os) throw std::runtime_error("checkpoint: write failed: " + path.string());
}

JcasModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open checkpoint: " + path.string());
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error("checkpoint: bad magic: " + path.string());
  const uint32_t version = read_pod<uint32_t>(is);
  if (version != kVersion) throw std::runtime_error("checkpoint: unsupported version");

  JcasModel model;
  model.cfg.num_messages = read_pod<uint32_t>(is);
  model.cfg.num_antennas = read_pod<uint32_t>(is);
  model.cfg.max_targets = read_pod<uint32_t>(is);
  model.cfg.encoding = static_cast<Encoding>(read_pod<uint8_t>(is));
  is.ignore(3);
  model.cfg.comm_region.lo = read_pod<double>(is);
  model.cfg.comm_region.hi = read_pod<double>(is);
  model.cfg.sensing_region.lo = read_pod<double>(is);
  model.cfg.sensing_region.hi = read_pod<double>(is);
  model.cfg.d_over_lambda = read_pod<double>(is);
  model.cfg.pf_target = read_pod<double>(is);
  model.offset.value = read_pod<double>(is);
  model.offset.calibrated = read_pod<uint8_t>(is) != 0;
  is.ignore(3);
  const uint32_t n_off = read_pod<uint32_t>(is);
  if (n_off > 1024) throw std::runtime_error("checkpoint: bad offset length");
  model.onehot_offset.resize(n_off);
  for (auto& v : model.onehot_offset) v = read_pod<double>(is);
  const uint32_t lab_m = read_pod<uint32_t>(is);
  const uint32_t lab_bits = read_pod<uint32_t>(is);
  model.labeling = BitLabeling::natural(lab_m);
  if (model.labeling.num_bits != lab_bits)
    throw std::runtime_error("checkpoint: labeling bit count mismatch");
  model.encoder = read_net(is);
  model.beamformer = read_net(is);
  model.decoder = read_net(is);
  model.detector = read_net(is);
  model.angler = read_net(is);
  model.cfg.validate();
  return model;
}

}  // namespace jcas
