// Counting and one-hot target-count encodings, their conversions, detection
// metrics, and fixed false alarm rate calibration.
#pragma once

#include <optional>
#include <span>

#include "jcas/mat.hpp"

namespace jcas {

enum class Encoding : uint8_t { kCounting = 0, kOneHot = 1 };

std::string_view to_string(Encoding e);
Encoding encoding_from_string(std::string_view s);

// Rounding to the next integer with .5 rounding up.
inline double round_half_up(double x) { return std::floor(x + 0.5); }

// First t entries 1, rest 0. Throws for t > t_max.
std::vector<double> counting_encode(uint32_t t, uint32_t t_max);
Mat counting_encode_batch(std::span<const uint32_t> counts, uint32_t t_max);

// Length T_max+1 one-hot style probabilities from a (descending) counting row.
// Rows that are not non-increasing are sorted descending first.
std::vector<double> counting_to_onehot(std::span<const double> counting);
// Suffix sums: counting[k] = sum of onehot[k+1 ... T_max] entries (1-based k).
std::vector<double> onehot_to_counting(std::span<const double> onehot);

struct PdPf {
  std::optional<double> pd;  // empty when no target slots were labeled present
  std::optional<double> pf;  // empty when no target slots were labeled absent
};

// Detection and weighted false alarm rate for counting rows. When
// sort_estimates is set each estimate row is sorted descending before
// rounding (validation behavior; training leaves rows unsorted).
PdPf pd_pf_counting(std::span<const uint32_t> counts, const Mat& estimates, uint32_t t_max,
                    bool sort_estimates);

// One-hot variant using the per-row argmax hard decision.
PdPf pd_pf_onehot(std::span<const uint32_t> counts, const Mat& estimates, uint32_t t_max);

struct LogitOffset {
  double value = 0.0;
  bool calibrated = false;
};

// Quantile calibration over the zero-labeled logits of one minibatch: sorts
// ascending and picks index floor((1 - pf_target) * X). Returns false (and
// leaves the previous offset in place) when the logit set is empty.
bool calibrate_offset(std::vector<double> zero_labeled_logits, double pf_target,
                      LogitOffset& offset);

// sigma(logit - offset), elementwise.
Mat apply_offset(const Mat& logits, const LogitOffset& offset);

// Soft weighted false alarm rate of one-hot probability rows (no hard
// decision).
double soft_pf_onehot(const Mat& probs, std::span<const uint32_t> counts, uint32_t t_max);

// Additive probability offset [1, -1/T_max, ...] scaled by the false alarm
// mismatch.
std::vector<double> onehot_offset_vector(double pf_target, double pf_measured,
                                         uint32_t t_max);

// Rows plus offset vector, clipped to [0, 1].
Mat apply_onehot_offset(const Mat& probs, std::span<const double> p_off);

// Round each probability and sum.
uint32_t count_targets(std::span<const double> probs);

}  // namespace jcas
