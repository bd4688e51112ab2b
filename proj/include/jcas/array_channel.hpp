// Uniform linear array geometry, the Rayleigh communication channel, and the
// Swerling-1 multi-target sensing channel.
#pragma once

#include <functional>

#include "jcas/mat.hpp"
#include "jcas/rng.hpp"

namespace jcas {

struct ArrayConfig {
  std::size_t num_antennas = 16;
  double d_over_lambda = 0.5;
};

struct NoiseConfig {
  double comm_fade_var = 1.0;   // sigma_c^2
  double target_rcs_var = 1.0;  // sigma_r^2
  double noise_var = 1.0;       // sigma_n^2

  static NoiseConfig from_snr_db(double comm_snr_db, double radar_snr_db,
                                 double noise_var = 1.0);
  double comm_snr() const { return comm_fade_var / noise_var; }
  double radar_snr() const { return target_rcs_var / noise_var; }
};

struct AngleRegion {
  double lo = 0.0, hi = 0.0;  // radians
  double width() const { return hi - lo; }
};

// Everything drawn for one simulated scene.
struct SceneTruth {
  uint32_t message = 1;  // 1..M
  double comm_angle = 0.0;
  std::vector<double> target_angles;
  CVec target_amps;
  cdouble comm_fade{};

  std::size_t target_count() const { return target_angles.size(); }
};

struct TargetCountRule {
  enum class Kind { kFixed, kFixedWithZeroProb, kUniform };
  Kind kind = Kind::kUniform;
  uint32_t fixed = 0;
  double zero_prob = 0.0;

  static TargetCountRule fixed_count(uint32_t t) { return {Kind::kFixed, t, 0.0}; }
  static TargetCountRule fixed_with_zero(uint32_t t, double p) {
    return {Kind::kFixedWithZeroProb, t, p};
  }
  static TargetCountRule uniform() { return {Kind::kUniform, 0, 0.0}; }
};

// Steering vector entry i = exp(j 2 pi (d/lambda) i sin(theta)); transmit and
// receive arrays share the same geometry.
CVec steering(double theta, const ArrayConfig& cfg);

struct CommObservation {
  cdouble z{};    // received sample
  cdouble csi{};  // kappa = beta a(phi)^T nu
  bool deep_fade = false;
};

// z = beta a(phi)^T y + n. The receiver divides by csi.
CommObservation comm_channel(const CVec& y, const CVec& nu, const SceneTruth& scene,
                             const NoiseConfig& noise, const ArrayConfig& cfg, Rng& rng);

// z = sum_k alpha_k a(theta_k) a(theta_k)^T y + n.
CVec radar_channel(const CVec& y, const SceneTruth& scene, const NoiseConfig& noise,
                   const ArrayConfig& cfg, Rng& rng);

SceneTruth draw_scene(uint32_t num_messages, uint32_t t_max, const AngleRegion& comm_region,
                      const AngleRegion& sensing_region, const TargetCountRule& rule,
                      const NoiseConfig& noise, Rng& rng);

// u sensing snapshots of one scene: amplitudes and angles held fixed, the
// transmit vector redrawn per snapshot, noise independent per snapshot.
// Columns of the result are the snapshots.
CMat snapshot_stack(const SceneTruth& scene, std::size_t u,
                    const std::function<CVec(Rng&)>& transmit, const NoiseConfig& noise,
                    const ArrayConfig& cfg, Rng& rng);

inline double deg_to_rad(double deg) { return deg * 3.14159265358979323846 / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / 3.14159265358979323846; }

}  // namespace jcas
