// Reverse-mode differentiation over matrix-valued operations.
//
// A Tape records the forward pass of one batch; backward() replays the
// recorded nodes exactly once in reverse order. Complex-valued batch signals
// are stored as real matrices with the first half of the columns holding real
// parts and the second half imaginary parts (a batch x 2 matrix is one complex
// column).
#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "jcas/mat.hpp"

namespace jcas {

struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

class Tape {
 public:
  // Leaf that never receives a gradient (inputs, channel constants).
  Var constant(Mat value);
  // Leaf with a gradient slot (network parameters).
  Var param(Mat value);

  const Mat& value(Var x) const { return node(x).value; }
  // Gradient accumulated by backward(); zero matrix if the node was never
  // reached. Calling before backward() is a logic error.
  Mat grad(Var x) const;

  std::size_t size() const { return nodes_.size(); }

  // --- dense network ops ---
  Var matmul(Var a, Var b);
  Var add(Var a, Var b);
  Var add_rowvec(Var x, Var bias);
  Var add_const_rowvec(Var x, const Mat& row);
  Var add_scalar(Var x, double s);
  Var scale(Var x, double s);
  Var elu(Var x);
  Var sigmoid(Var x);
  Var softmax_rows(Var x);
  Var tanh_scaled(Var x, double s);
  Var clip01(Var x);
  // Divide by the root mean power of the rows taken as complex pairs.
  Var mean_power_norm(Var x);
  // Divide by the Euclidean norm of the whole (row) vector.
  Var power_norm(Var x);
  Var gather_rows(Var src, std::vector<uint32_t> idx);

  // --- complex batch ops (re|im column split layout) ---
  // Row-wise complex product of two batch x 2 columns.
  Var cmul(Var a, Var b);
  // Row-wise scaling by per-row complex constants.
  Var cscale_rows(Var a, CVec s);
  // y[n] = sum_i A[n,i] * v[i] with A constant, v a 1 x 2K variable.
  Var cdot_const(const CMat& a, Var v);
  // y[n,:] = s[n] * B[n,:] with B constant, s a batch x 2 variable.
  Var crank1_const(Var s, const CMat& b);
  // Row-wise complex reciprocal of a batch x 2 column.
  Var cinv(Var a);
  Var add_cmat_const(Var a, const CMat& c);

  // --- losses (1x1 results) ---
  Var bce(Var pred, const Mat& target);
  Var ce(Var pred, std::vector<uint32_t> classes);
  Var mse(Var pred, const Mat& target);
  // Masked, re-paired squared error used by the angle loss: for row n the
  // first counts[n] target entries are compared against estimate entries
  // est_idx[n*t_max + j]; normalized by the total number of pairs.
  Var pair_sq_loss(Var estimates, const Mat& targets, std::vector<uint32_t> est_idx,
                   std::vector<uint32_t> counts);
  Var weighted_sum(const std::vector<std::pair<double, Var>>& terms);

  // Seeds d(loss)/d(loss) = 1 and propagates through every recorded node in
  // reverse order. loss must be a 1x1 node recorded on this tape.
  void backward(Var loss);
  bool backward_done() const { return backward_done_; }

 private:
  struct Node {
    Mat value;
    Mat grad;  // allocated lazily
    bool needs_grad = false;
    bool touched = false;
    std::function<void(Tape&)> back;
  };

  Node& node(Var x) {
    if (!x.valid() || static_cast<std::size_t>(x.id) >= nodes_.size())
      throw std::logic_error("Tape: variable does not belong to this tape");
    return nodes_[static_cast<std::size_t>(x.id)];
  }
  const Node& node(Var x) const {
    if (!x.valid() || static_cast<std::size_t>(x.id) >= nodes_.size())
      throw std::logic_error("Tape: variable does not belong to this tape");
    return nodes_[static_cast<std::size_t>(x.id)];
  }

  Var push(Mat value, bool needs_grad, std::function<void(Tape&)> back);
  // Gradient buffer of a node, allocating and marking it on first touch.
  Mat& gbuf(Var x);

  std::vector<Node> nodes_;
  bool backward_done_ = false;
};

}  // namespace jcas
