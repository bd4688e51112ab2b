#include <doctest.h>

#include <cmath>

#include "jcas/detection.hpp"
#include "jcas/rng.hpp"

using namespace jcas;

TEST_CASE("counting encoding of the reference vectors") {
  CHECK(counting_encode(0, 3) == std::vector<double>{0, 0, 0});
  CHECK(counting_encode(3, 3) == std::vector<double>{1, 1, 1});
  CHECK(counting_encode(2, 3) == std::vector<double>{1, 1, 0});
  CHECK_THROWS_AS(counting_encode(4, 3), std::invalid_argument);
}

TEST_CASE("counting <-> one-hot hand conversions") {
  CHECK(counting_to_onehot(std::vector<double>{1, 1, 0}) ==
        std::vector<double>{0, 0, 1, 0});
  CHECK(counting_to_onehot(std::vector<double>{0, 0, 0}) ==
        std::vector<double>{1, 0, 0, 0});
  const auto o = counting_to_onehot(std::vector<double>{0.8, 0.5, 0.1});
  CHECK(o[0] == doctest::Approx(0.2));
  CHECK(o[1] == doctest::Approx(0.3));
  CHECK(o[2] == doctest::Approx(0.4));
  CHECK(o[3] == doctest::Approx(0.1));

  CHECK(onehot_to_counting(std::vector<double>{0, 0, 1, 0}) ==
        std::vector<double>{1, 1, 0});
  const auto c = onehot_to_counting(std::vector<double>{0.25, 0.25, 0.25, 0.25});
  CHECK(c[0] == doctest::Approx(0.75));
  CHECK(c[1] == doctest::Approx(0.5));
  CHECK(c[2] == doctest::Approx(0.25));
}

TEST_CASE("round trips: counting rows exactly, probability rows to 1e-15") {
  Rng rng(40, "roundtrip");
  for (int trial = 0; trial < 10000; ++trial) {
    // Random monotone counting row: binary prefix-of-ones half the time,
    // sorted uniforms otherwise.
    std::vector<double> c(3);
    if (trial % 2 == 0) {
      const uint32_t t = rng.next_u64() % 4;
      for (std::size_t i = 0; i < 3; ++i) c[i] = i < t ? 1.0 : 0.0;
    } else {
      for (auto& v : c) v = rng.uniform();
      std::sort(c.begin(), c.end(), std::greater<>());
    }
    const auto back = onehot_to_counting(counting_to_onehot(c));
    CHECK(back == c);  // bitwise
  }
  for (int trial = 0; trial < 10000; ++trial) {
    std::vector<double> o(4);
    double s = 0.0;
    for (auto& v : o) {
      v = rng.uniform() + 1e-3;
      s += v;
    }
    for (auto& v : o) v /= s;
    const auto back = counting_to_onehot(onehot_to_counting(o));
    for (std::size_t i = 0; i < 4; ++i) CHECK(back[i] == doctest::Approx(o[i]).epsilon(1e-12));
  }
}

TEST_CASE("counting rates on the worked example") {
  const std::vector<uint32_t> counts{1, 2};
  Mat est(2, 3);
  est(0, 0) = 1;  // [[1,0,0],[1,1,1]]
  est(1, 0) = 1;
  est(1, 1) = 1;
  est(1, 2) = 1;
  const PdPf r = pd_pf_counting(counts, est, 3, false);
  REQUIRE(r.pd.has_value());
  REQUIRE(r.pf.has_value());
  CHECK(*r.pd == doctest::Approx(1.0));
  CHECK(*r.pf == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("perfect counting estimates give (1, 0)") {
  const std::vector<uint32_t> counts{0, 1, 2, 3};
  const Mat est = counting_encode_batch(counts, 3);
  const PdPf r = pd_pf_counting(counts, est, 3, true);
  CHECK(*r.pd == doctest::Approx(1.0));
  CHECK(*r.pf == doctest::Approx(0.0));
}

TEST_CASE("all-zero estimates with targets present give (0, 0)") {
  const std::vector<uint32_t> counts{1, 2};
  const PdPf r = pd_pf_counting(counts, Mat(2, 3), 3, true);
  CHECK(*r.pd == doctest::Approx(0.0));
  CHECK(*r.pf == doctest::Approx(0.0));
}

TEST_CASE("undefined rates are reported as missing, not zero") {
  const std::vector<uint32_t> none{0, 0};
  const PdPf r = pd_pf_counting(none, Mat(2, 3), 3, true);
  CHECK_FALSE(r.pd.has_value());
  CHECK(r.pf.has_value());
  const std::vector<uint32_t> full{3, 3};
  const PdPf r2 = pd_pf_counting(full, Mat(2, 3, 1.0), 3, true);
  CHECK(r2.pd.has_value());
  CHECK_FALSE(r2.pf.has_value());
}

TEST_CASE("one-hot rates on the worked examples") {
  {
    Mat est(1, 4);
    est(0, 3) = 1.0;  // h = 3
    const PdPf r = pd_pf_onehot(std::vector<uint32_t>{1}, est, 3);
    CHECK(*r.pd == doctest::Approx(1.0));
    CHECK(*r.pf == doctest::Approx(1.0));
  }
  {
    Mat est(1, 4);
    est(0, 1) = 1.0;  // h = 1
    const PdPf r = pd_pf_onehot(std::vector<uint32_t>{2}, est, 3);
    CHECK(*r.pd == doctest::Approx(0.5));
    CHECK(*r.pf == doctest::Approx(0.0));
  }
  {
    // h = T everywhere
    const std::vector<uint32_t> counts{0, 1, 2};
    Mat est(3, 4);
    est(0, 0) = 1.0;
    est(1, 1) = 1.0;
    est(2, 2) = 1.0;
    const PdPf r = pd_pf_onehot(counts, est, 3);
    CHECK(*r.pd == doctest::Approx(1.0));
    CHECK(*r.pf == doctest::Approx(0.0));
  }
}

TEST_CASE("offset calibration hand example") {
  LogitOffset off;
  CHECK(calibrate_offset({-3.0, -1.0, 0.0, 2.0}, 0.25, off));
  CHECK(off.value == doctest::Approx(2.0));
  CHECK(off.calibrated);
}

TEST_CASE("offset calibration with equal logits centers at 0.5") {
  LogitOffset off;
  CHECK(calibrate_offset(std::vector<double>(8, 1.7), 0.01, off));
  CHECK(off.value == doctest::Approx(1.7));
  Mat logits(1, 8, 1.7);
  const Mat p = apply_offset(logits, off);
  for (std::size_t i = 0; i < p.size(); ++i) CHECK(p.data()[i] == doctest::Approx(0.5));
}

TEST_CASE("empty logit set keeps the previous offset") {
  LogitOffset off{1.25, true};
  CHECK_FALSE(calibrate_offset({}, 0.01, off));
  CHECK(off.value == doctest::Approx(1.25));
}

TEST_CASE("calibration hits the requested false alarm quantile") {
  Rng rng(41, "calib");
  std::vector<double> logits(100000);
  for (auto& l : logits) l = rng.normal(1.0);
  LogitOffset off;
  REQUIRE(calibrate_offset(logits, 1e-2, off));
  std::size_t above = 0;
  for (double l : logits)
    if (l - off.value >= 0.0) ++above;  // sigma(l - off) >= 0.5 rounds to 1
  const double rate = static_cast<double>(above) / static_cast<double>(logits.size());
  CHECK(rate > 0.85e-2);
  CHECK(rate < 1.15e-2);
}

TEST_CASE("apply_offset is a shifted sigmoid and monotone") {
  LogitOffset off{0.0, true};
  Mat logits(1, 3);
  logits(0, 0) = -1.0;
  logits(0, 1) = 0.0;
  logits(0, 2) = 1.0;
  const Mat p = apply_offset(logits, off);
  CHECK(p(0, 1) == doctest::Approx(0.5));
  CHECK(p(0, 0) < p(0, 1));
  CHECK(p(0, 1) < p(0, 2));
  LogitOffset shift{1.0, true};
  const Mat q = apply_offset(logits, shift);
  CHECK(q(0, 2) == doctest::Approx(0.5));
}

TEST_CASE("one-hot probability offset on the worked row") {
  Mat probs(1, 4, 0.25);
  const std::vector<uint32_t> counts{2};
  const double measured = soft_pf_onehot(probs, counts, 3);
  CHECK(measured == doctest::Approx(0.25));
  const auto p_off = onehot_offset_vector(0.01, measured, 3);
  CHECK(p_off[0] == doctest::Approx(-0.24));
  CHECK(p_off[1] == doctest::Approx(0.08));
  const Mat adjusted = apply_onehot_offset(probs, p_off);
  CHECK(adjusted(0, 0) == doctest::Approx(0.01));
  CHECK(adjusted(0, 1) == doctest::Approx(0.33));
  CHECK(adjusted(0, 2) == doctest::Approx(0.33));
  CHECK(adjusted(0, 3) == doctest::Approx(0.33));
}

TEST_CASE("one-hot offset is clipped to [0, 1]") {
  Mat probs(1, 3);
  probs(0, 0) = 0.05;
  probs(0, 1) = 0.9;
  probs(0, 2) = 0.05;
  std::vector<double> p_off{-0.2, 0.3, -0.1};
  const Mat adjusted = apply_onehot_offset(probs, p_off);
  CHECK(adjusted(0, 0) == doctest::Approx(0.0));
  CHECK(adjusted(0, 1) == doctest::Approx(1.0));
  CHECK(adjusted(0, 2) == doctest::Approx(0.0));
}

TEST_CASE("matched false alarm rate leaves one-hot rows unchanged") {
  Mat probs(2, 4);
  for (std::size_t i = 0; i < probs.size(); ++i) probs.data()[i] = 0.25;
  const std::vector<uint32_t> counts{2, 2};
  const double measured = soft_pf_onehot(probs, counts, 3);
  const auto p_off = onehot_offset_vector(measured, measured, 3);
  const Mat adjusted = apply_onehot_offset(probs, p_off);
  for (std::size_t i = 0; i < probs.size(); ++i)
    CHECK(adjusted.data()[i] == doctest::Approx(probs.data()[i]));
}

TEST_CASE("count_targets rounds and sums") {
  CHECK(count_targets(std::vector<double>{0.9, 0.8, 0.1}) == 2);
  CHECK(count_targets(std::vector<double>{0.0, 0.0, 0.0}) == 0);
  CHECK(count_targets(std::vector<double>{1.0, 1.0, 1.0}) == 3);
  CHECK(count_targets(std::vector<double>{0.5, 0.49, 0.0}) == 1);  // half rounds up
}

TEST_CASE("counting labels keep the prefix-of-ones structure") {
  Rng rng(42, "labels");
  for (int trial = 0; trial < 200; ++trial) {
    const uint32_t t = rng.next_u64() % 4;
    const auto c = counting_encode(t, 3);
    for (std::size_t j = 0; j + 1 < c.size(); ++j) CHECK(c[j] >= c[j + 1]);
    CHECK(static_cast<uint32_t>(c[0] + c[1] + c[2]) == t);
  }
}

TEST_CASE("hard counting and one-hot rates agree on consistent decisions") {
  Rng rng(43, "agree");
  for (int trial = 0; trial < 200; ++trial) {
    const uint32_t t_max = 3;
    std::vector<uint32_t> counts(8), decided(8);
    for (auto& c : counts) c = rng.next_u64() % (t_max + 1);
    for (std::size_t n = 0; n < 8; ++n) decided[n] = rng.next_u64() % (t_max + 1);
    Mat c_est(8, t_max), o_est(8, t_max + 1);
    for (std::size_t n = 0; n < 8; ++n) {
      for (uint32_t j = 0; j < decided[n]; ++j) c_est(n, j) = 1.0;
      o_est(n, decided[n]) = 1.0;
    }
    const PdPf rc = pd_pf_counting(counts, c_est, t_max, true);
    const PdPf ro = pd_pf_onehot(counts, o_est, t_max);
    if (rc.pd) CHECK(*rc.pd == doctest::Approx(*ro.pd));
    if (rc.pf) CHECK(*rc.pf == doctest::Approx(*ro.pf));
  }
}
