#include <doctest.h>

#include <cmath>
#include <numbers>

#include "jcas/rng.hpp"
#include "jcas/tape.hpp"
#include "test_util.hpp"

using namespace jcas;
using jcas::testutil::fd_grad;
using jcas::testutil::l2_rel_err;

namespace {

Mat random_mat(std::size_t r, std::size_t c, Rng& rng, double scale = 1.0) {
  Mat m(r, c);
  for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = rng.normal(1.0) * scale;
  return m;
}

}  // namespace

TEST_CASE("gradients of the matrix ops match finite differences") {
  Rng rng(101, "tape-fd");
  Mat a = random_mat(3, 4, rng);
  Mat b = random_mat(4, 2, rng);

  auto loss_value = [&](void) {
    Tape t;
    Var y = t.sigmoid(t.matmul(t.elu(t.param(a)), t.param(b)));
    return t.value(t.mse(y, Mat(3, 2)))(0, 0);
  };
  Tape t;
  Var va = t.param(a);
  Var vb = t.param(b);
  Var y = t.sigmoid(t.matmul(t.elu(va), vb));
  Var loss = t.mse(y, Mat(3, 2));
  t.backward(loss);
  CHECK(l2_rel_err(t.grad(va), fd_grad(a, loss_value)) < 1e-6);
  CHECK(l2_rel_err(t.grad(vb), fd_grad(b, loss_value)) < 1e-6);
}

TEST_CASE("complex channel ops match finite differences") {
  Rng rng(102, "tape-cfd");
  const std::size_t batch = 5, k = 4;
  Mat nu = random_mat(1, 2 * k, rng);
  Mat x = random_mat(batch, 2, rng);
  CMat steer(batch, k);
  CVec fade(batch), noise(batch);
  for (std::size_t n = 0; n < batch; ++n) {
    fade[n] = rng.cnormal(1.0);
    noise[n] = rng.cnormal(1.0);
    for (std::size_t i = 0; i < k; ++i) steer(n, i) = rng.cnormal(1.0);
  }
  CMat radar_noise(batch, k);
  for (std::size_t i = 0; i < radar_noise.size(); ++i)
    radar_noise.data()[i] = rng.cnormal(0.1);

  const Mat target = random_mat(batch, 2 * k, rng, 0.3);
  auto loss_value = [&](void) {
    Tape t;
    Var vx = t.param(x);
    Var vnu = t.param(nu);
    Var g = t.cdot_const(steer, vnu);
    Var kappa = t.cscale_rows(g, fade);
    Var inv = t.cinv(kappa);
    Var zc = t.add(vx, t.cscale_rows(inv, noise));
    Var s = t.cmul(zc, t.cscale_rows(g, fade));
    Var zr = t.add_cmat_const(t.crank1_const(s, steer), radar_noise);
    return t.value(t.mse(zr, target))(0, 0);
  };

  Tape t;
  Var vx = t.param(x);
  Var vnu = t.param(nu);
  Var g = t.cdot_const(steer, vnu);
  Var kappa = t.cscale_rows(g, fade);
  Var inv = t.cinv(kappa);
  Var zc = t.add(vx, t.cscale_rows(inv, noise));
  Var s = t.cmul(zc, t.cscale_rows(g, fade));
  Var zr = t.add_cmat_const(t.crank1_const(s, steer), radar_noise);
  Var loss = t.mse(zr, target);
  t.backward(loss);

  CHECK(l2_rel_err(t.grad(vx), fd_grad(x, loss_value)) < 1e-6);
  CHECK(l2_rel_err(t.grad(vnu), fd_grad(nu, loss_value)) < 1e-6);
}

TEST_CASE("norms, softmax, gather, and pair loss match finite differences") {
  Rng rng(103, "tape-fd2");
  Mat c = random_mat(4, 2, rng);
  Mat v = random_mat(1, 6, rng);
  const std::vector<uint32_t> idx{2, 0, 3, 3, 1};
  Mat targets(5, 2);
  for (std::size_t i = 0; i < targets.size(); ++i) targets.data()[i] = rng.normal(0.25);
  std::vector<uint32_t> est_idx{1, 0, 0, 1, 1, 0, 0, 1, 0, 1};  // 5 rows x 2
  std::vector<uint32_t> counts{2, 1, 0, 2, 1};

  auto loss_value = [&](void) {
    Tape t;
    Var vc = t.param(c);
    Var vv = t.param(v);
    Var cn = t.mean_power_norm(vc);
    Var gathered = t.gather_rows(cn, idx);
    Var pn = t.power_norm(vv);
    Var sm = t.softmax_rows(gathered);
    Var th = t.tanh_scaled(sm, 0.5 * std::numbers::pi);
    Var pl = t.pair_sq_loss(th, targets, est_idx, counts);
    // Fold in the normalized vector so both params contribute.
    Var pn_loss = t.mse(pn, Mat(1, 6));
    return t.value(t.weighted_sum({{1.0, pl}, {0.7, pn_loss}}))(0, 0);
  };

  Tape t;
  Var vc = t.param(c);
  Var vv = t.param(v);
  Var cn = t.mean_power_norm(vc);
  Var gathered = t.gather_rows(cn, idx);
  Var pn = t.power_norm(vv);
  Var sm = t.softmax_rows(gathered);
  Var th = t.tanh_scaled(sm, 0.5 * std::numbers::pi);
  Var pl = t.pair_sq_loss(th, targets, est_idx, counts);
  Var pn_loss = t.mse(pn, Mat(1, 6));
  Var loss = t.weighted_sum({{1.0, pl}, {0.7, pn_loss}});
  t.backward(loss);

  CHECK(l2_rel_err(t.grad(vc), fd_grad(c, loss_value)) < 1e-4);
  CHECK(l2_rel_err(t.grad(vv), fd_grad(v, loss_value)) < 1e-4);
}

TEST_CASE("bce and ce gradients match finite differences") {
  Rng rng(104, "tape-loss");
  Mat logits = random_mat(6, 4, rng);
  Mat bce_target(6, 4);
  for (std::size_t i = 0; i < bce_target.size(); ++i)
    bce_target.data()[i] = rng.uniform() < 0.5 ? 0.0 : 1.0;
  std::vector<uint32_t> classes{0, 3, 1, 2, 0, 1};

  auto single_leaf_value = [&](void) {
    Tape t2;
    Var v = t2.param(logits);
    Var l1 = t2.bce(t2.sigmoid(v), bce_target);
    Var l2 = t2.ce(t2.softmax_rows(v), classes);
    return t2.value(t2.weighted_sum({{1.0, l1}, {0.5, l2}}))(0, 0);
  };
  Tape t3;
  Var v3 = t3.param(logits);
  Var loss3 = t3.weighted_sum(
      {{1.0, t3.bce(t3.sigmoid(v3), bce_target)}, {0.5, t3.ce(t3.softmax_rows(v3), classes)}});
  t3.backward(loss3);
  CHECK(l2_rel_err(t3.grad(v3), fd_grad(logits, single_leaf_value)) < 1e-6);
}

TEST_CASE("backward validates its input") {
  Tape t;
  CHECK_THROWS_AS(t.backward(Var{}), std::logic_error);
  Var a = t.param(Mat(2, 2));
  CHECK_THROWS_AS(t.backward(a), std::logic_error);  // not a scalar
  CHECK_THROWS_AS(t.grad(a), std::logic_error);      // before backward
}

TEST_CASE("constants receive no gradient work") {
  Tape t;
  Mat cval(2, 2, 1.0);
  Var c = t.constant(cval);
  Var p = t.param(Mat(2, 2, 2.0));
  Var y = t.add(c, p);
  Var loss = t.mse(y, Mat(2, 2));
  t.backward(loss);
  const Mat gp = t.grad(p);
  CHECK(gp(0, 0) == doctest::Approx(2.0 * 3.0 / 4.0));
  const Mat gc = t.grad(c);  // zero-shaped, untouched
  CHECK(gc(0, 0) == 0.0);
}
