#include "jcas/detection.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace jcas {

std::string_view to_string(Encoding e) {
  return e == Encoding::kCounting ? "counting" : "onehot";
}

Encoding encoding_from_string(std::string_view s) {
  if (s == "counting") return Encoding::kCounting;
  if (s == "onehot" || s == "one-hot") return Encoding::kOneHot;
  throw std::invalid_argument("unknown encoding: " + std::string(s));
}

std::vector<double> counting_encode(uint32_t t, uint32_t t_max) {
  if (t > t_max) throw std::invalid_argument("counting_encode: count exceeds t_max");
  std::vector<double> c(t_max, 0.0);
  std::fill_n(c.begin(), t, 1.0);
  return c;
}

Mat counting_encode_batch(std::span<const uint32_t> counts, uint32_t t_max) {
  Mat labels(counts.size(), t_max);
  for (std::size_t n = 0; n < counts.size(); ++n) {
    if (counts[n] > t_max) throw std::invalid_argument("counting_encode: count exceeds t_max");
    for (uint32_t j = 0; j < counts[n]; ++j) labels(n, j) = 1.0;
  }
  return labels;
}

std::vector<double> counting_to_onehot(std::span<const double> counting) {
  std::vector<double> c(counting.begin(), counting.end());
  if (!std::is_sorted(c.rbegin(), c.rend()))
    std::sort(c.begin(), c.end(), std::greater<>());
  const std::size_t t_max = c.size();
  std::vector<double> o(t_max + 1);
  o[0] = 1.0 - c[0];
  for (std::size_t k = 1; k < t_max; ++k) o[k] = c[k - 1] - c[k];
  o[t_max] = c[t_max - 1];
  return o;
}

std::vector<double> onehot_to_counting(std::span<const double> onehot) {
  if (onehot.size() < 2) throw std::invalid_argument("onehot_to_counting: need T_max >= 1");
  const std::size_t t_max = onehot.size() - 1;
  std::vector<double> c(t_max);
  // Right-to-left suffix sums.
  c[t_max - 1] = onehot[t_max];
  for (std::size_t k = t_max - 1; k-- > 0;) c[k] = onehot[k + 1] + c[k + 1];
  return c;
}

PdPf pd_pf_counting(std::span<const uint32_t> counts, const Mat& estimates, uint32_t t_max,
                    bool sort_estimates) {
  if (estimates.rows() != counts.size() || estimates.cols() != t_max)
    throw std::invalid_argument("pd_pf_counting: shape mismatch");
  double hits = 0.0, false_alarms = 0.0;
  std::size_t present = 0, absent = 0;
  std::vector<double> row(t_max);
  for (std::size_t n = 0; n < counts.size(); ++n) {
    const uint32_t t = counts[n];
    std::copy_n(estimates.row(n).begin(), t_max, row.begin());
    if (sort_estimates) std::sort(row.begin(), row.end(), std::greater<>());
    for (uint32_t j = 0; j < t_max; ++j) {
      const double r = round_half_up(row[j]);
      if (j < t) hits += r;
      else false_alarms += r;
    }
    present += t;
    absent += t_max - t;
  }
  PdPf out;
  if (present > 0) out.pd = hits / static_cast<double>(present);
  if (absent > 0) out.pf = false_alarms / static_cast<double>(absent);
  return out;
}

PdPf pd_pf_onehot(std::span<const uint32_t> counts, const Mat& estimates, uint32_t t_max) {
  if (estimates.rows() != counts.size() || estimates.cols() != t_max + 1)
    throw std::invalid_argument("pd_pf_onehot: shape mismatch");
  double hits = 0.0, false_alarms = 0.0;
  std::size_t present = 0, absent = 0;
  for (std::size_t n = 0; n < counts.size(); ++n) {
    const auto row = estimates.row(n);
    const uint32_t h = static_cast<uint32_t>(
        std::max_element(row.begin(), row.end()) - row.begin());
    const uint32_t t = counts[n];
    hits += std::min(t, h);
    false_alarms += std::max(t, h) - t;
    present += t;
    absent += t_max - t;
  }
  PdPf out;
  if (present > 0) out.pd = hits / static_cast<double>(present);
  if (absent > 0) out.pf = false_alarms / static_cast<double>(absent);
  return out;
}

bool calibrate_offset(std::vector<double> zero_labeled_logits, double pf_target,
                      LogitOffset& offset) {
  if (zero_labeled_logits.empty()) return false;
  if (!(pf_target > 0.0 && pf_target < 1.0))
    throw std::invalid_argument("calibrate_offset: pf_target must be in (0, 1)");
  std::sort(zero_labeled_logits.begin(), zero_labeled_logits.end());
  const std::size_t x = zero_labeled_logits.size();
  std::size_t i = static_cast<std::size_t>(
      std::floor((1.0 - pf_target) * static_cast<double>(x)));
  i = std::min(i, x - 1);
  offset.value = zero_labeled_logits[i];
  offset.calibrated = true;
  return true;
}

Mat apply_offset(const Mat& logits, const LogitOffset& offset) {
  Mat probs = logits;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double x = probs.data()[i] - offset.value;
    probs.data()[i] = x >= 0.0 ? 1.0 / (1.0 + std::exp(-x))
                               : std::exp(x) / (1.0 + std::exp(x));
  }
  return probs;
}

double soft_pf_onehot(const Mat& probs, std::span<const uint32_t> counts, uint32_t t_max) {
  if (probs.rows() != counts.size() || probs.cols() != t_max + 1)
    throw std::invalid_argument("soft_pf_onehot: shape mismatch");
  double num = 0.0;
  double denom = 0.0;
  for (std::size_t n = 0; n < counts.size(); ++n) {
    const uint32_t t = counts[n];
    for (uint32_t k = t + 1; k <= t_max; ++k) num += (k - t) * probs(n, k);
    denom += t_max - t;
  }
  return denom > 0.0 ? num / denom : 0.0;
}

std::vector<double> onehot_offset_vector(double pf_target, double pf_measured,
                                         uint32_t t_max) {
  std::vector<double> off(t_max + 1, 0.0);
  const double delta = pf_target - pf_measured;
  off[0] = delta;
  for (uint32_t k = 1; k <= t_max; ++k) off[k] = -delta / static_cast<double>(t_max);
  return off;
}

Mat apply_onehot_offset(const Mat& probs, std::span<const double> p_off) {
  if (probs.cols() != p_off.size())
    throw std::invalid_argument("apply_onehot_offset: width mismatch");
  Mat out = probs;
  for (std::size_t n = 0; n < out.rows(); ++n)
    for (std::size_t j = 0; j < out.cols(); ++j)
      out(n, j) = std::clamp(out(n, j) + p_off[j], 0.0, 1.0);
  return out;
}

uint32_t count_targets(std::span<const double> probs) {
  double sum = 0.0;
  for (double p : probs) sum += round_half_up(p);
  return static_cast<uint32_t>(sum);
}

}  // namespace jcas
