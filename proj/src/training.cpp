#include "jcas/training.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace jcas {

void TrainConfig::validate() const {
  model.validate();
  if (!(weight_radar > 0.0 && weight_radar < 1.0))
    throw std::invalid_argument("config: w_r must be in (0, 1)");
  if (!(weight_angle > 0.0)) throw std::invalid_argument("config: w_a must be > 0");
  if (epochs < 1) throw std::invalid_argument("config: epochs must be >= 1");
  if (minibatch_size < 1) throw std::invalid_argument("config: minibatch size must be >= 1");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("config: learning rate must be > 0");
}

int stage_of(uint32_t epoch, uint32_t total_epochs) {
  if (epoch >= total_epochs) throw std::invalid_argument("stage_of: epoch out of range");
  const uint32_t first = (total_epochs + 2) / 3;       // ceil(E/3)
  const uint32_t second = (2 * total_epochs + 2) / 3;  // ceil(2E/3)
  if (epoch < first) return 1;
  if (epoch < second) return 2;
  return 3;
}

double combined_loss(int stage, double l_comm, double l_detect, double l_angle,
                     double w_r, double w_a) {
  switch (stage) {
    case 1: return (1.0 - w_r) * l_comm + w_r * w_a * l_angle;
    case 2: return (1.0 - w_r) * l_comm + w_r * l_detect;
    case 3: return (1.0 - w_r) * l_comm + w_r * l_detect + w_r * w_a * l_angle;
    default: throw std::invalid_argument("combined_loss: stage must be 1..3");
  }
}

BatchData make_batch(const ModelConfig& cfg, const NoiseConfig& noise,
                     const TargetCountRule& rule, std::size_t size, Rng& rng) {
  const std::size_t k = cfg.num_antennas;
  const uint32_t t_max = cfg.max_targets;
  const BitLabeling labeling = BitLabeling::natural(cfg.num_messages);
  const ArrayConfig array = cfg.array();

  Rng scene_rng = rng.fork("target-draw");
  Rng noise_rng = rng.fork("channel-noise");

  BatchData b;
  b.size = size;
  b.messages.resize(size);
  b.target_counts.resize(size);
  b.angle_targets = Mat(size, t_max);
  b.comm_steering = CMat(size, k);
  b.comm_fade.resize(size);
  b.comm_noise.resize(size);
  b.target_steering.assign(t_max, CMat(size, k));
  b.target_amp.assign(t_max, CVec(size));
  b.radar_noise = CMat(size, k);

  for (std::size_t n = 0; n < size; ++n) {
    const SceneTruth scene = draw_scene(cfg.num_messages, t_max, cfg.comm_region,
                                        cfg.sensing_region, rule, noise, scene_rng);
    b.messages[n] = scene.message;
    b.target_counts[n] = static_cast<uint32_t>(scene.target_count());
    const CVec a_comm = steering(scene.comm_angle, array);
    for (std::size_t i = 0; i < k; ++i) b.comm_steering(n, i) = a_comm[i];
    b.comm_fade[n] = scene.comm_fade;
    b.comm_noise[n] = noise_rng.cnormal(noise.noise_var);
    for (std::size_t t = 0; t < scene.target_count(); ++t) {
      b.angle_targets(n, t) = scene.target_angles[t];
      const CVec a = steering(scene.target_angles[t], array);
      for (std::size_t i = 0; i < k; ++i) b.target_steering[t](n, i) = a[i];
      b.target_amp[t][n] = scene.target_amps[t];
    }
    for (std::size_t i = 0; i < k; ++i)
      b.radar_noise(n, i) = noise_rng.cnormal(noise.noise_var);
  }
  b.bits = labeling.bits_of(b.messages);
  b.counting_labels = counting_encode_batch(b.target_counts, t_max);
  return b;
}

LossGraph build_loss_graph(Tape& tape, JcasModel& model, const BatchData& batch, int stage,
                           SetMethod method, double w_r, double w_a, bool update_offsets) {
  const uint32_t t_max = model.cfg.max_targets;
  LossGraph g;

  // Transmitter: full constellation forwarded once, symbols gathered per
  // sample; the beamformer sees only the angle regions.
  Var enc_in = tape.constant(Mat::identity(model.cfg.num_messages));
  g.encoder = mlp_forward(tape, model.encoder, enc_in);
  g.constellation = g.encoder.out;
  Var bf_in = tape.constant(model.beam_input());
  g.beamformer = mlp_forward(tape, model.beamformer, bf_in);
  g.beam = g.beamformer.out;

  std::vector<uint32_t> row_idx(batch.size);
  for (std::size_t n = 0; n < batch.size; ++n) row_idx[n] = batch.messages[n] - 1;
  g.symbols = tape.gather_rows(g.constellation, row_idx);

  // Communication path: z / kappa = x + n / (beta a(phi)^T nu).
  Var comm_gain = tape.cdot_const(batch.comm_steering, g.beam);
  Var csi = tape.cscale_rows(comm_gain, batch.comm_fade);
  Var noise_term = tape.cscale_rows(tape.cinv(csi), batch.comm_noise);
  g.decoder_in = tape.add(g.symbols, noise_term);
  g.decoder = mlp_forward(tape, model.decoder, g.decoder_in);
  g.posterior = g.decoder.out;
  Var bit_probs = tape.matmul(g.posterior, tape.constant(model.labeling.bit_mask()));
  g.l_comm = tape.bce(bit_probs, batch.bits);

  // Sensing path: z_r = sum_k alpha_k (a^T nu x) a + n, slot-wise with
  // zero-amplitude padding for absent targets.
  Var z_r{};
  for (uint32_t t = 0; t < t_max; ++t) {
    Var gain_t = tape.cdot_const(batch.target_steering[t], g.beam);
    Var amp_gain = tape.cscale_rows(gain_t, batch.target_amp[t]);
    Var s = tape.cmul(g.symbols, amp_gain);
    Var term = tape.crank1_const(s, batch.target_steering[t]);
    z_r = t == 0 ? term : tape.add(z_r, term);
  }
  g.radar_rx = tape.add_cmat_const(z_r, batch.radar_noise);

  g.detector = mlp_forward(tape, model.detector, g.radar_rx);
  if (model.cfg.encoding == Encoding::kCounting) {
    if (update_offsets) {
      const Mat& logits = tape.value(g.detector.raw);
      std::vector<double> zero_labeled;
      zero_labeled.reserve(batch.size * t_max);
      for (std::size_t n = 0; n < batch.size; ++n)
        for (uint32_t j = batch.target_counts[n]; j < t_max; ++j)
          zero_labeled.push_back(logits(n, j));
      calibrate_offset(std::move(zero_labeled), model.cfg.pf_target, model.offset);
    }
    g.detect_probs = tape.sigmoid(tape.add_scalar(g.detector.raw, -model.offset.value));
    g.l_detect = tape.bce(g.detect_probs, batch.counting_labels);
  } else {
    if (update_offsets) {
      const double measured =
          soft_pf_onehot(tape.value(g.detector.out), batch.target_counts, t_max);
      model.onehot_offset =
          onehot_offset_vector(model.cfg.pf_target, measured, t_max);
    }
    Mat off_row(1, t_max + 1);
    for (uint32_t j = 0; j <= t_max; ++j)
      off_row(0, j) = j < model.onehot_offset.size() ? model.onehot_offset[j] : 0.0;
    g.detect_probs = tape.clip01(tape.add_const_rowvec(g.detector.out, off_row));
    g.l_detect = tape.ce(g.detect_probs, batch.target_counts);
  }

  g.angler = mlp_forward(tape, model.angler, g.radar_rx);

  // Angle loss: the true target count masks the estimate vector; the set
  // method fixes the pairing before the squared error.
  const Mat& est = tape.value(g.angler.out);
  Mat targets(batch.size, t_max);
  std::vector<uint32_t> est_idx(batch.size * t_max, 0);
  std::vector<uint32_t> counts(batch.size, 0);
  std::size_t matched = 0;
  std::vector<double> truth, est_head;
  for (std::size_t n = 0; n < batch.size; ++n) {
    const uint32_t t = batch.target_counts[n];
    counts[n] = t;
    if (t == 0) continue;
    truth.assign(batch.angle_targets.row(n).begin(),
                 batch.angle_targets.row(n).begin() + t);
    if (method == SetMethod::kSortInput || method == SetMethod::kSortAll)
      std::sort(truth.begin(), truth.end());
    est_head.assign(est.row(n).begin(), est.row(n).begin() + t);
    const std::vector<uint32_t> idx = pairing_for(method, truth, est_head);
    for (uint32_t j = 0; j < t; ++j) {
      targets(n, j) = truth[j];
      est_idx[n * t_max + j] = idx[j];
    }
    matched += t;
  }
  g.matched_pairs = matched;
  g.l_angle = tape.pair_sq_loss(g.angler.out, targets, std::move(est_idx), std::move(counts));

  switch (stage) {
    case 1:
      g.total = tape.weighted_sum({{1.0 - w_r, g.l_comm}, {w_r * w_a, g.l_angle}});
      break;
    case 2:
      g.total = tape.weighted_sum({{1.0 - w_r, g.l_comm}, {w_r, g.l_detect}});
      break;
    case 3:
      g.total = tape.weighted_sum(
          {{1.0 - w_r, g.l_comm}, {w_r, g.l_detect}, {w_r * w_a, g.l_angle}});
      break;
    default:
      throw std::invalid_argument("build_loss_graph: stage must be 1..3");
  }
  return g;
}

namespace {

struct Optimizers {
  AdamState encoder, beamformer, decoder, detector, angler;
};

void step_net(MlpNet& net, const Tape& tape, const TapedMlp& taped, AdamState& state) {
  adam_step(net, grads_of(tape, taped), state);
}

}  // namespace

TrainResult train(const TrainConfig& cfg) {
  cfg.validate();
  Rng root(cfg.seed, "train");
  JcasModel model = make_model(cfg.model, root);
  Optimizers opt{make_adam(model.encoder, cfg.learning_rate),
                 make_adam(model.beamformer, cfg.learning_rate),
                 make_adam(model.decoder, cfg.learning_rate),
                 make_adam(model.detector, cfg.learning_rate),
                 make_adam(model.angler, cfg.learning_rate)};
  const NoiseConfig noise = cfg.noise();
  const uint32_t n_mb = cfg.resolved_minibatches();
  const uint32_t t_max = cfg.model.max_targets;
  const double zero_prob = 1.0 / static_cast<double>(t_max + 1);
  const double nbits = static_cast<double>(model.labeling.num_bits);

  TrainHistory history;
  int prev_stage = 1;
  for (uint32_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const int stage = stage_of(epoch, cfg.epochs);
    if (stage != prev_stage) {
      if (!cfg.out_dir.empty())
        save_checkpoint(model, cfg.out_dir / ("checkpoint_stage" +
                                              std::to_string(prev_stage) + ".ckpt"));
      prev_stage = stage;
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.stage = stage;
    double sq_angle_sum = 0.0;
    std::size_t angle_pairs = 0;
    for (uint32_t mb = 0; mb < n_mb; ++mb) {
      // Target count cycles 1..T_max over minibatches, with independent
      // replacement by empty scenes so the detector sees negatives.
      const TargetCountRule rule =
          TargetCountRule::fixed_with_zero((mb % t_max) + 1, zero_prob);
      Rng mb_rng = root.fork("epoch", epoch).fork("minibatch", mb);
      const BatchData batch = make_batch(cfg.model, noise, rule, cfg.minibatch_size, mb_rng);

      Tape tape;
      LossGraph g = build_loss_graph(tape, model, batch, stage, cfg.set_method,
                                     cfg.weight_radar, cfg.weight_angle, true);
      const double total = tape.value(g.total)(0, 0);
      if (!std::isfinite(total)) {
        if (!cfg.out_dir.empty())
          save_checkpoint(model, cfg.out_dir / "diagnostic_snapshot.ckpt");
        throw std::runtime_error("training diverged (non-finite loss) at epoch " +
                                 std::to_string(epoch) + ", minibatch " +
                                 std::to_string(mb));
      }
      tape.backward(g.total);

      step_net(model.encoder, tape, g.encoder, opt.encoder);
      step_net(model.beamformer, tape, g.beamformer, opt.beamformer);
      step_net(model.decoder, tape, g.decoder, opt.decoder);
      if (stage >= 2) step_net(model.detector, tape, g.detector, opt.detector);
      if (stage != 2) step_net(model.angler, tape, g.angler, opt.angler);

      const double l_comm = tape.value(g.l_comm)(0, 0);
      const double l_detect = tape.value(g.l_detect)(0, 0);
      const double l_angle = tape.value(g.l_angle)(0, 0);
      rec.loss_comm += l_comm;
      rec.loss_detect += l_detect;
      rec.loss_angle += l_angle;
      rec.loss_combined += total;
      sq_angle_sum += l_angle * static_cast<double>(g.matched_pairs);
      angle_pairs += g.matched_pairs;

      // Training-time detection metrics are computed on unsorted rows.
      const Mat& probs = tape.value(g.detect_probs);
      const PdPf rates =
          model.cfg.encoding == Encoding::kCounting
              ? pd_pf_counting(batch.target_counts, probs, t_max, false)
              : pd_pf_onehot(batch.target_counts, probs, t_max);
      rec.pd += rates.pd.value_or(0.0);
      rec.pf += rates.pf.value_or(0.0);
      rec.pf_minibatch_max = std::max(rec.pf_minibatch_max, rates.pf.value_or(0.0));
    }
    const double inv = 1.0 / static_cast<double>(n_mb);
    rec.loss_comm *= inv;
    rec.loss_detect *= inv;
    rec.loss_angle *= inv;
    rec.loss_combined *= inv;
    rec.pd *= inv;
    rec.pf *= inv;
    // The bit-probability BCE is log2(M) - BMI up to the nats/bits factor.
    rec.bmi = nbits - nbits * rec.loss_comm / std::log(2.0);
    rec.angle_rmse =
        angle_pairs > 0 ? std::sqrt(sq_angle_sum / static_cast<double>(angle_pairs)) : 0.0;
    history.epochs.push_back(rec);
  }

  if (!cfg.out_dir.empty()) save_checkpoint(model, cfg.out_dir / "model.ckpt");
  return {std::move(model), std::move(history)};
}

double beam_gain_db(const CVec& nu, const AngleRegion& region, std::size_t n_grid,
                    const ArrayConfig& cfg) {
  if (n_grid < 1) throw std::invalid_argument("beam_gain_db: need a grid");
  double acc = 0.0;
  for (std::size_t i = 0; i < n_grid; ++i) {
    const double frac = n_grid == 1 ? 0.5
                                    : static_cast<double>(i) /
                                          static_cast<double>(n_grid - 1);
    const double theta = region.lo + region.width() * frac;
    const CVec a = steering(theta, cfg);
    cdouble dot = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) dot += a[j] * nu[j];
    acc += std::norm(dot);
  }
  return 10.0 * std::log10(std::max(acc / static_cast<double>(n_grid), 1e-300));
}

std::vector<MetricsRecord> validate(const JcasModel& model, const NoiseConfig& noise,
                                    const ValidationConfig& vcfg) {
  const ModelConfig& mc = model.cfg;
  const ArrayConfig array = mc.array();
  const uint32_t t_max = mc.max_targets;
  const Mat constellation = constellation_of(model);
  const CVec nu = beam_vector_of(model);
  const double gain_comm = beam_gain_db(nu, mc.comm_region, vcfg.beam_grid, array);
  const double gain_radar = beam_gain_db(nu, mc.sensing_region, vcfg.beam_grid, array);
  const bool counting = mc.encoding == Encoding::kCounting;
  const std::size_t det_width = counting ? t_max : t_max + 1;

  Rng base(vcfg.seed, "validate");
  std::vector<MetricsRecord> records;
  for (std::size_t u : vcfg.u_list) {
    MetricsRecord rec;
    rec.upsampling = u;
    rec.gain_comm_db = gain_comm;
    rec.gain_radar_db = gain_radar;
    rec.num_scans = vcfg.num_scans;

    double bmi_penalty = 0.0;
    std::size_t bmi_symbols = 0;
    double hits = 0.0, false_alarms = 0.0;
    std::size_t present = 0, absent = 0;
    double sse_nn = 0.0, sse_esprit = 0.0;
    std::size_t pairs_nn = 0, pairs_esprit = 0;

    Mat probs_cols(det_width, u), angle_cols(t_max, u);
    for (std::size_t scan = 0; scan < vcfg.num_scans; ++scan) {
      // Scenes and snapshot draws are keyed by scan and snapshot index only,
      // so runs with different upsampling factors share their scenes and the
      // first snapshots (common random numbers across the u sweep).
      Rng scene_rng = base.fork("scan", scan);
      const SceneTruth scene =
          draw_scene(mc.num_messages, t_max, mc.comm_region, mc.sensing_region,
                     TargetCountRule::uniform(), noise, scene_rng);
      CMat snapshots(mc.num_antennas, u);

      for (std::size_t s = 0; s < u; ++s) {
        Rng rng = scene_rng.fork("snapshot", s);
        const uint32_t msg = 1 + static_cast<uint32_t>(rng.next_u64() % mc.num_messages);
        const cdouble x{constellation(msg - 1, 0), constellation(msg - 1, 1)};
        CVec y(mc.num_antennas);
        for (std::size_t i = 0; i < y.size(); ++i) y[i] = nu[i] * x;

        // Communication side.
        const CommObservation obs = comm_channel(y, nu, scene, noise, array, rng);
        const cdouble z_norm = obs.deep_fade ? cdouble{} : obs.z / obs.csi;
        const std::vector<double> posterior = decode_posterior(model, z_norm);
        const std::vector<double> llrs = posteriors_to_llrs(posterior, model.labeling);
        for (uint32_t k = 0; k < model.labeling.num_bits; ++k) {
          const double b = model.labeling.bit(msg, k);
          const double t = (1.0 - 2.0 * b) * llrs[k];
          bmi_penalty += t > 0.0 ? std::log1p(std::exp(-t)) : -t + std::log1p(std::exp(t));
        }
        ++bmi_symbols;

        // Sensing side.
        const CVec z_r = radar_channel(y, scene, noise, array, rng);
        for (std::size_t i = 0; i < z_r.size(); ++i) snapshots(i, s) = z_r[i];
        const std::vector<double> logits = detect_logits(model, z_r);
        if (counting) {
          for (uint32_t j = 0; j < t_max; ++j) {
            const double x_off = logits[j] - model.offset.value;
            probs_cols(j, s) = x_off >= 0.0 ? 1.0 / (1.0 + std::exp(-x_off))
                                            : std::exp(x_off) / (1.0 + std::exp(x_off));
          }
        } else {
          Mat row(1, t_max + 1);
          std::copy(logits.begin(), logits.end(), row.data());
          const Mat soft = apply_transform(row, OutputTransform::kSoftmax);
          for (uint32_t j = 0; j <= t_max; ++j) probs_cols(j, s) = soft(0, j);
        }
        const std::vector<double> ang = estimate_angles(model, z_r);
        for (uint32_t j = 0; j < t_max; ++j) angle_cols(j, s) = ang[j];
      }

      const ScanDecision dec = scan_decision(probs_cols, angle_cols, SetMethod::kPermute);
      const uint32_t truth_count = static_cast<uint32_t>(scene.target_count());

      uint32_t detected = 0;
      std::vector<double> masked_angles;
      if (counting) {
        // Sort probabilities descending and carry the angle slots along.
        std::vector<uint32_t> order(t_max);
        for (uint32_t j = 0; j < t_max; ++j) order[j] = j;
        std::stable_sort(order.begin(), order.end(), [&](uint32_t a, uint32_t b) {
          return dec.probs[a] > dec.probs[b];
        });
        for (uint32_t j = 0; j < t_max; ++j) {
          const double r = round_half_up(dec.probs[order[j]]);
          if (j < truth_count) hits += r;
          else false_alarms += r;
          detected += static_cast<uint32_t>(r);
        }
        for (uint32_t j = 0; j < detected && j < t_max; ++j)
          masked_angles.push_back(dec.angles[order[j]]);
      } else {
        std::vector<double> adjusted(t_max + 1);
        for (uint32_t j = 0; j <= t_max; ++j) {
          const double off = j < model.onehot_offset.size() ? model.onehot_offset[j] : 0.0;
          adjusted[j] = std::clamp(dec.probs[j] + off, 0.0, 1.0);
        }
        detected = static_cast<uint32_t>(
            std::max_element(adjusted.begin(), adjusted.end()) - adjusted.begin());
        hits += std::min(truth_count, detected);
        false_alarms += std::max(truth_count, detected) - truth_count;
        for (uint32_t j = 0; j < detected && j < t_max; ++j)
          masked_angles.push_back(dec.angles[j]);
      }
      present += truth_count;
      absent += t_max - truth_count;

      // RMSE only over targets both detected and present.
      if (!masked_angles.empty() && truth_count > 0) {
        for (const auto& [ti, ei] : match_min_pairs(scene.target_angles, masked_angles)) {
          const double d = scene.target_angles[ti] - masked_angles[ei];
          sse_nn += d * d;
          ++pairs_nn;
        }
        const EspritResult bench = esprit_scan(snapshots, detected, array);
        for (const auto& [ti, ei] : match_min_pairs(scene.target_angles, bench.angles)) {
          const double d = scene.target_angles[ti] - bench.angles[ei];
          sse_esprit += d * d;
          ++pairs_esprit;
        }
      }
    }

    rec.bmi = static_cast<double>(model.labeling.num_bits) -
              bmi_penalty / (std::log(2.0) * static_cast<double>(bmi_symbols));
    rec.pd = present > 0 ? hits / static_cast<double>(present) : 0.0;
    rec.pf = absent > 0 ? false_alarms / static_cast<double>(absent) : 0.0;
    rec.rmse_nn = pairs_nn > 0 ? std::sqrt(sse_nn / static_cast<double>(pairs_nn)) : 0.0;
    rec.rmse_esprit =
        pairs_esprit > 0 ? std::sqrt(sse_esprit / static_cast<double>(pairs_esprit)) : 0.0;
    rec.matched_nn = pairs_nn;
    rec.matched_esprit = pairs_esprit;
    records.push_back(rec);
  }
  return records;
}

}  // namespace jcas
