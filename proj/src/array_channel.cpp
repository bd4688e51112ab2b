#include "jcas/array_channel.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace jcas {

NoiseConfig NoiseConfig::from_snr_db(double comm_snr_db, double radar_snr_db,
                                     double noise_var) {
  NoiseConfig n;
  n.noise_var = noise_var;
  n.comm_fade_var = noise_var * std::pow(10.0, comm_snr_db / 10.0);
  n.target_rcs_var = noise_var * std::pow(10.0, radar_snr_db / 10.0);
  return n;
}

CVec steering(double theta, const ArrayConfig& cfg) {
  CVec a(cfg.num_antennas);
  const double phase_step = 2.0 * std::numbers::pi * cfg.d_over_lambda * std::sin(theta);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double p = phase_step * static_cast<double>(i);
    a[i] = {std::cos(p), std::sin(p)};
  }
  return a;
}

namespace {

cdouble dot_t(const CVec& a, const CVec& b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot_t: length mismatch");
  cdouble s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

constexpr double kDeepFadeThreshold = 1e-15;

}  // namespace

CommObservation comm_channel(const CVec& y, const CVec& nu, const SceneTruth& scene,
                             const NoiseConfig& noise, const ArrayConfig& cfg, Rng& rng) {
  const CVec a = steering(scene.comm_angle, cfg);
  CommObservation obs;
  const cdouble n = noise.noise_var > 0.0 ? rng.cnormal(noise.noise_var) : cdouble{};
  obs.z = scene.comm_fade * dot_t(a, y) + n;
  obs.csi = scene.comm_fade * dot_t(a, nu);
  obs.deep_fade = std::abs(obs.csi) < kDeepFadeThreshold;
  return obs;
}

CVec radar_channel(const CVec& y, const SceneTruth& scene, const NoiseConfig& noise,
                   const ArrayConfig& cfg, Rng& rng) {
  const std::size_t k = cfg.num_antennas;
  if (y.size() != k) throw std::invalid_argument("radar_channel: y length mismatch");
  CVec z(k);
  for (std::size_t t = 0; t < scene.target_count(); ++t) {
    const CVec a = steering(scene.target_angles[t], cfg);
    const cdouble gain = scene.target_amps[t] * dot_t(a, y);
    for (std::size_t i = 0; i < k; ++i) z[i] += gain * a[i];
  }
  if (noise.noise_var > 0.0)
    for (std::size_t i = 0; i < k; ++i) z[i] += rng.cnormal(noise.noise_var);
  return z;
}

SceneTruth draw_scene(uint32_t num_messages, uint32_t t_max, const AngleRegion& comm_region,
                      const AngleRegion& sensing_region, const TargetCountRule& rule,
                      const NoiseConfig& noise, Rng& rng) {
  SceneTruth scene;
  scene.message = 1 + static_cast<uint32_t>(rng.next_u64() % num_messages);
  scene.comm_angle = comm_region.lo + comm_region.width() * rng.uniform();

  uint32_t count = 0;
  switch (rule.kind) {
    case TargetCountRule::Kind::kFixed:
      count = rule.fixed;
      break;
    case TargetCountRule::Kind::kFixedWithZeroProb:
      count = rng.uniform() < rule.zero_prob ? 0 : rule.fixed;
      break;
    case TargetCountRule::Kind::kUniform:
      count = static_cast<uint32_t>(rng.next_u64() % (t_max + 1));
      break;
  }
  if (count > t_max) throw std::invalid_argument("draw_scene: count exceeds t_max");

  scene.target_angles.resize(count);
  scene.target_amps.resize(count);
  for (uint32_t t = 0; t < count; ++t) {
    scene.target_angles[t] = sensing_region.lo + sensing_region.width() * rng.uniform();
    scene.target_amps[t] = rng.cnormal(noise.target_rcs_var);
  }
  scene.comm_fade = rng.cnormal(noise.comm_fade_var);
  return scene;
}

CMat snapshot_stack(const SceneTruth& scene, std::size_t u,
                    const std::function<CVec(Rng&)>& transmit, const NoiseConfig& noise,
                    const ArrayConfig& cfg, Rng& rng) {
  if (u < 1) throw std::invalid_argument("snapshot_stack: u must be >= 1");
  CMat z(cfg.num_antennas, u);
  for (std::size_t s = 0; s < u; ++s) {
    const CVec y = transmit(rng);
    const CVec col = radar_channel(y, scene, noise, cfg, rng);
    for (std::size_t i = 0; i < cfg.num_antennas; ++i) z(i, s) = col[i];
  }
  return z;
}

}  // namespace jcas
