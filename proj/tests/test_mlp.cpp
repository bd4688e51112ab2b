#include <doctest.h>

#include <cmath>
#include <numbers>

#include "jcas/mlp.hpp"
#include "test_util.hpp"

using namespace jcas;
using jcas::testutil::fd_grad;
using jcas::testutil::l2_rel_err;

namespace {

Mat random_input(std::size_t rows, std::size_t cols, Rng& rng) {
  Mat m(rows, cols);
  for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = rng.normal(1.0);
  return m;
}

// Full-parameter finite-difference check of a random-weighted output
// functional for one network.
void check_net_gradients(MlpNet& net, const Mat& input, Rng& rng, double tol) {
  Mat w(input.rows(), net.output_width());
  for (std::size_t i = 0; i < w.size(); ++i) w.data()[i] = rng.normal(1.0);

  auto loss_value = [&](void) {
    const Mat y = mlp_forward(net, input);
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += y.data()[i] * w.data()[i];
    return s;
  };

  Tape tape;
  Var in = tape.constant(input);
  TapedMlp taped = mlp_forward(tape, net, in);
  // sum(w . y) has gradient w; mse against target t gives 2(y-t)/n, so build
  // the weighted functional directly from pair_sq pieces: easiest is a manual
  // seed through mse with target y - w * n / 2 evaluated at the current y.
  const Mat y0 = tape.value(taped.out);
  Mat target(y0.rows(), y0.cols());
  const double n = static_cast<double>(y0.size());
  for (std::size_t i = 0; i < y0.size(); ++i)
    target.data()[i] = y0.data()[i] - 0.5 * n * w.data()[i];
  Var loss = tape.mse(taped.out, target);
  tape.backward(loss);

  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    const Mat fd_w = fd_grad(net.weights[l], loss_value);
    CHECK(l2_rel_err(tape.grad(taped.weights[l]), fd_w) < tol);
    const Mat fd_b = fd_grad(net.biases[l], loss_value);
    CHECK(l2_rel_err(tape.grad(taped.biases[l]), fd_b) < tol);
  }
}

}  // namespace

TEST_CASE("zero network maps everything to zero") {
  Rng rng(1, "zero-net");
  MlpNet net = make_mlp({3, 4, 2}, OutputTransform::kLinear, rng);
  for (auto& w : net.weights) w.fill(0.0);
  const Mat y = mlp_forward(net, random_input(5, 3, rng));
  for (std::size_t i = 0; i < y.size(); ++i) CHECK(y.data()[i] == 0.0);
}

TEST_CASE("single identity layer applies the ELU hand values") {
  Rng rng(2, "elu");
  // widths {2, 2, 2}: first layer identity to expose the hidden ELU.
  MlpNet net = make_mlp({2, 2, 2}, OutputTransform::kLinear, rng);
  net.weights[0] = Mat::identity(2);
  net.biases[0].fill(0.0);
  net.weights[1] = Mat::identity(2);
  net.biases[1].fill(0.0);
  Mat in(1, 2);
  in(0, 0) = 1.0;
  in(0, 1) = -1.0;
  const Mat y = mlp_forward(net, in);
  CHECK(y(0, 0) == doctest::Approx(1.0));
  CHECK(y(0, 1) == doctest::Approx(std::exp(-1.0) - 1.0));
}

TEST_CASE("softmax of zero logits is uniform") {
  Mat logits(1, 4);
  const Mat p = apply_transform(logits, OutputTransform::kSoftmax);
  for (std::size_t j = 0; j < 4; ++j) CHECK(p(0, j) == doctest::Approx(0.25));
}

TEST_CASE("output transforms satisfy their range invariants") {
  Rng rng(3, "ranges");
  const Mat raw = random_input(200, 6, rng);
  const Mat sm = apply_transform(raw, OutputTransform::kSoftmax);
  for (std::size_t i = 0; i < sm.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < sm.cols(); ++j) s += sm(i, j);
    CHECK(std::abs(s - 1.0) < 1e-9);
  }
  const Mat sg = apply_transform(raw, OutputTransform::kSigmoid);
  for (std::size_t i = 0; i < sg.size(); ++i) {
    CHECK(sg.data()[i] > 0.0);
    CHECK(sg.data()[i] < 1.0);
  }
  const Mat th = apply_transform(raw, OutputTransform::kTanhHalfPi);
  for (std::size_t i = 0; i < th.size(); ++i) {
    CHECK(th.data()[i] > -0.5 * std::numbers::pi);
    CHECK(th.data()[i] < 0.5 * std::numbers::pi);
  }
  Mat pairs = random_input(8, 2, rng);
  const Mat mp = apply_transform(pairs, OutputTransform::kMeanPowerNorm);
  double power = 0.0;
  for (std::size_t i = 0; i < mp.size(); ++i) power += mp.data()[i] * mp.data()[i];
  CHECK(power / 8.0 == doctest::Approx(1.0).epsilon(1e-9));
  Mat vec = random_input(1, 10, rng);
  const Mat pn = apply_transform(vec, OutputTransform::kPowerNorm);
  double energy = 0.0;
  for (std::size_t i = 0; i < pn.size(); ++i) energy += pn.data()[i] * pn.data()[i];
  CHECK(energy == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("zero input kills weight gradients but not bias gradients") {
  Rng rng(4, "zero-input");
  MlpNet net = make_mlp({3, 2}, OutputTransform::kLinear, rng);
  Tape tape;
  Var in = tape.constant(Mat(4, 3));
  TapedMlp taped = mlp_forward(tape, net, in);
  Mat target(4, 2, 1.0);
  tape.backward(tape.mse(taped.out, target));
  const Mat gw = tape.grad(taped.weights[0]);
  for (std::size_t i = 0; i < gw.size(); ++i) CHECK(gw.data()[i] == 0.0);
  const Mat gb = tape.grad(taped.biases[0]);
  bool any = false;
  for (std::size_t i = 0; i < gb.size(); ++i) any = any || gb.data()[i] != 0.0;
  CHECK(any);
}

TEST_CASE("gradient matches the closed-form linear regression gradient") {
  Rng rng(5, "linreg");
  MlpNet net = make_mlp({3, 2}, OutputTransform::kLinear, rng);
  net.biases[0].fill(0.0);
  const Mat x = random_input(6, 3, rng);
  Mat y(6, 2);
  for (std::size_t i = 0; i < y.size(); ++i) y.data()[i] = rng.normal(1.0);

  Tape tape;
  TapedMlp taped = mlp_forward(tape, net, tape.constant(x));
  tape.backward(tape.mse(taped.out, y));
  const Mat g = tape.grad(taped.weights[0]);

  // d/dW mean((XW - Y)^2) = 2 X^T (XW - Y) / (batch * out)
  Mat resid = matmul(x, net.weights[0]);
  for (std::size_t i = 0; i < resid.size(); ++i) resid.data()[i] -= y.data()[i];
  Mat expected(3, 2);
  gemm_tn(x, resid, expected, false);
  const double scale = 2.0 / static_cast<double>(y.size());
  for (std::size_t i = 0; i < expected.size(); ++i) expected.data()[i] *= scale;
  CHECK(l2_rel_err(g, expected) < 1e-12);
}

TEST_CASE("finite differences validate every output transform") {
  Rng rng(6, "fd-nets");
  struct Case {
    std::vector<std::size_t> widths;
    OutputTransform transform;
  };
  const Case cases[] = {
      {{4, 8, 8, 8, 2}, OutputTransform::kMeanPowerNorm},
      {{5, 6, 6, 12, 12}, OutputTransform::kPowerNorm},
      {{2, 8, 8, 8, 4}, OutputTransform::kSoftmax},
      {{6, 6, 6, 3, 3}, OutputTransform::kSigmoid},
      {{6, 6, 6, 3, 3}, OutputTransform::kTanhHalfPi},
  };
  for (const auto& c : cases) {
    MlpNet net = make_mlp(c.widths, c.transform, rng);
    const std::size_t rows = c.transform == OutputTransform::kMeanPowerNorm ||
                                     c.transform == OutputTransform::kPowerNorm
                                 ? (c.transform == OutputTransform::kPowerNorm ? 1 : 4)
                                 : 3;
    const Mat input = random_input(rows, c.widths.front(), rng);
    check_net_gradients(net, input, rng, 1e-4);
  }
}

TEST_CASE("adam leaves parameters alone under zero gradients") {
  Rng rng(7, "adam0");
  MlpNet net = make_mlp({2, 3, 1}, OutputTransform::kLinear, rng);
  const MlpNet before = net;
  AdamState st = make_adam(net, 1e-3);
  NetGrads zero;
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    zero.weights.emplace_back(net.weights[l].rows(), net.weights[l].cols());
    zero.biases.emplace_back(1, net.biases[l].cols());
  }
  adam_step(net, zero, st);
  adam_step(net, zero, st);
  for (std::size_t l = 0; l < net.layer_count(); ++l)
    for (std::size_t i = 0; i < net.weights[l].size(); ++i)
      CHECK(net.weights[l].data()[i] == before.weights[l].data()[i]);
  CHECK(st.step == 2);
}

TEST_CASE("first adam step moves a parameter by about the learning rate") {
  Mat p(1, 1, 1.0), g(1, 1, 0.5), m(1, 1), v(1, 1);
  AdamState hyper;
  hyper.learning_rate = 1e-3;
  adam_step(p, g, m, v, 1, hyper);
  CHECK(p(0, 0) == doctest::Approx(1.0 - 1e-3 * 0.5 / (0.5 + 1e-8)).epsilon(1e-9));
}

TEST_CASE("adam descends a convex quadratic") {
  Mat p(1, 1, 3.0), m(1, 1), v(1, 1);
  AdamState hyper;
  hyper.learning_rate = 1e-2;
  double prev = p(0, 0) * p(0, 0);
  for (uint64_t s = 1; s <= 2; ++s) {
    Mat g(1, 1, 2.0 * p(0, 0));
    adam_step(p, g, m, v, s, hyper);
  }
  CHECK(p(0, 0) * p(0, 0) < prev);
}

TEST_CASE("adam trains a small regression net by >= 90% in 2000 steps") {
  Rng rng(8, "toyreg");
  MlpNet net = make_mlp({2, 16, 1}, OutputTransform::kLinear, rng);
  AdamState st = make_adam(net, 1e-3);
  Mat x(64, 2), y(64, 1);
  Rng data(9, "toydata");
  for (std::size_t i = 0; i < x.rows(); ++i) {
    x(i, 0) = data.normal(1.0);
    x(i, 1) = data.normal(1.0);
    y(i, 0) = std::sin(x(i, 0)) + 0.5 * x(i, 1);
  }
  double first_loss = 0.0, last_loss = 0.0;
  for (int step = 0; step < 2000; ++step) {
    Tape tape;
    TapedMlp taped = mlp_forward(tape, net, tape.constant(x));
    Var loss = tape.mse(taped.out, y);
    last_loss = tape.value(loss)(0, 0);
    if (step == 0) first_loss = last_loss;
    tape.backward(loss);
    adam_step(net, grads_of(tape, taped), st);
  }
  CHECK(last_loss < 0.1 * first_loss);
}

TEST_CASE("losses: hand fixtures") {
  Mat p(1, 1, 0.9), t(1, 1, 0.0);
  CHECK(bce_value(p, t) == doctest::Approx(-std::log(0.1)).epsilon(1e-9));
  Mat half(2, 3, 0.5), zeros(2, 3, 0.0);
  CHECK(bce_value(half, zeros) == doctest::Approx(std::log(2.0)));
  Mat same(2, 3, 1.0);
  CHECK(bce_value(same, same) == doctest::Approx(0.0).epsilon(1e-10));

  Mat ce_row(1, 3);
  ce_row(0, 0) = 0.7;
  ce_row(0, 1) = 0.2;
  ce_row(0, 2) = 0.1;
  CHECK(ce_value(ce_row, {1}) == doctest::Approx(-std::log(0.2)).epsilon(1e-9));
  Mat onehot_correct(1, 4);
  onehot_correct(0, 2) = 1.0;
  CHECK(ce_value(onehot_correct, {2}) == doctest::Approx(0.0).epsilon(1e-9));
  Mat uniform(1, 4, 0.25);
  CHECK(ce_value(uniform, {3}) == doctest::Approx(std::log(4.0)));

  Mat mp(1, 2);
  mp(0, 0) = 1.0;
  mp(0, 1) = 2.0;
  CHECK(mse_value(mp, Mat(1, 2)) == doctest::Approx(2.5));
  Mat shifted(3, 2, 2.0), base(3, 2, 0.5);
  CHECK(mse_value(shifted, base) == doctest::Approx(1.5 * 1.5));
  CHECK(mse_value(base, base) == doctest::Approx(0.0));
}

TEST_CASE("losses are invariant to batch order") {
  Rng rng(10, "perm-loss");
  Mat p(5, 3), t(5, 3);
  for (std::size_t i = 0; i < p.size(); ++i) {
    p.data()[i] = rng.uniform(0.05, 0.95);
    t.data()[i] = rng.uniform() < 0.5 ? 0.0 : 1.0;
  }
  Mat p2(5, 3), t2(5, 3);
  const std::size_t perm[5] = {3, 0, 4, 1, 2};
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      p2(i, j) = p(perm[i], j);
      t2(i, j) = t(perm[i], j);
    }
  CHECK(bce_value(p, t) == doctest::Approx(bce_value(p2, t2)).epsilon(1e-12));
  CHECK(mse_value(p, t) == doctest::Approx(mse_value(p2, t2)).epsilon(1e-12));
}

TEST_CASE("mlp rejects shape mismatches") {
  Rng rng(11, "shape");
  MlpNet net = make_mlp({3, 4, 2}, OutputTransform::kLinear, rng);
  CHECK_THROWS_AS(mlp_forward(net, Mat(2, 5)), std::invalid_argument);
}
