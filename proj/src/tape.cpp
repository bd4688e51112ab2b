#include "jcas/tape.hpp"

#include <algorithm>
#include <cmath>

namespace jcas {

namespace {
constexpr double kProbClamp = 1e-12;

double clamp_prob(double p) { return std::clamp(p, kProbClamp, 1.0 - kProbClamp); }

double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}
}  // namespace

Var Tape::push(Mat value, bool needs_grad, std::function<void(Tape&)> back) {
  Node n;
  n.value = std::move(value);
  n.needs_grad = needs_grad;
  n.back = needs_grad ? std::move(back) : nullptr;
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

Var Tape::constant(Mat value) { return push(std::move(value), false, nullptr); }

Var Tape::param(Mat value) { return push(std::move(value), true, nullptr); }

Mat& Tape::gbuf(Var x) {
  Node& n = node(x);
  if (!n.touched) {
    n.grad = Mat(n.value.rows(), n.value.cols());
    n.touched = true;
  }
  return n.grad;
}

Mat Tape::grad(Var x) const {
  if (!backward_done_) throw std::logic_error("Tape::grad called before backward");
  const Node& n = node(x);
  if (n.touched) return n.grad;
  return Mat(n.value.rows(), n.value.cols());
}

void Tape::backward(Var loss) {
  if (nodes_.empty()) throw std::logic_error("Tape::backward on empty tape");
  Node& l = node(loss);
  if (l.value.rows() != 1 || l.value.cols() != 1)
    throw std::logic_error("Tape::backward: loss must be a 1x1 node");
  gbuf(loss)(0, 0) = 1.0;
  for (int i = loss.id; i >= 0; --i) {
    Node& n = nodes_[static_cast<std::size_t>(i)];
    if (n.touched && n.back) n.back(*this);
  }
  backward_done_ = true;
}

Var Tape::matmul(Var a, Var b) {
  const Mat& av = value(a);
  const Mat& bv = value(b);
  Mat y(av.rows(), bv.cols());
  gemm(av, bv, y, false);
  const bool ng = node(a).needs_grad || node(b).needs_grad;
  Var out = push(std::move(y), ng, nullptr);
  if (ng) {
    node(out).back = [a, b, out](Tape& t) {
      const Mat& g = t.node(out).grad;
      if (t.node(a).needs_grad) gemm_nt(g, t.value(b), t.gbuf(a), true);
      if (t.node(b).needs_grad) gemm_tn(t.value(a), g, t.gbuf(b), true);
    };
  }
  return out;
}

Var Tape::add(Var a, Var b) {
  const Mat& av = value(a);
  const Mat& bv = value(b);
  if (!av.same_shape(bv)) throw std::invalid_argument("Tape::add: shape mismatch");
  Mat y = av;
  for (std::size_t i = 0; i < y.size(); ++i) y.data()[i] += bv.data()[i];
  const bool ng = node(a).needs_grad || node(b).needs_grad;
  Var out = push(std::move(y), ng, nullptr);
  if (ng) {
    node(out).back = [a, b, out](Tape& t) {
      const Mat& g = t.node(out).grad;
      if (t.node(a).needs_grad) {
        Mat& ga = t.gbuf(a);
        for (std::size_t i = 0; i < g.size(); ++i) ga.data()[i] += g.data()[i];
      }
      if (t.node(b).needs_grad) {
        Mat& gb = t.gbuf(b);
        for (std::size_t i = 0; i < g.size(); ++i) gb.data()[i] += g.data()[i];
      }
    };
  }
  return out;
}

Var Tape::add_rowvec(Var x, Var bias) {
  const Mat& xv = value(x);
  const Mat& bv = value(bias);
  if (bv.rows() != 1 || bv.cols() != xv.cols())
    throw std::invalid_argument("Tape::add_rowvec: bias shape mismatch");
  Mat y = xv;
  for (std::size_t i = 0; i < y.rows(); ++i)
    for (std::size_t j = 0; j < y.cols(); ++j) y(i, j) += bv(0, j);
  const bool ng = node(x).needs_grad || node(bias).needs_grad;
  Var out = push(std::move(y), ng, nullptr);
  if (ng) {
    node(out).back = [x, bias, out](Tape& t) {
      const Mat& g = t.node(out).grad;
      if (t.node(x).needs_grad) {
        Mat& gx = t.gbuf(x);
        for (std::size_t i = 0; i < g.size(); ++i) gx.data()[i] += g.data()[i];
      }
      if (t.node(bias).needs_grad) {
        Mat& gb = t.gbuf(bias);
        for (std::size_t i = 0; i < g.rows(); ++i)
          for (std::size_t j = 0; j < g.cols(); ++j) gb(0, j) += g(i, j);
      }
    };
  }
  return out;
}

Var Tape::add_const_rowvec(Var x, const Mat& row) {
  const Mat& xv = value(x);
  if (row.rows() != 1 || row.cols() != xv.cols())
    throw std::invalid_argument("Tape::add_const_rowvec: shape mismatch");
  Mat y = xv;
  for (std::size_t i = 0; i < y.rows(); ++i)
    for (std::size_t j = 0; j < y.cols(); ++j) y(i, j) += row(0, j);
  const bool ng = node(x).needs_grad;
  Var out = push(std::move(y), ng, nullptr);
  if (ng) {
    node(out).back = [x, out](Tape& t) {
      const Mat& g = t.node(out).grad;
      Mat& gx = t.gbuf(x);
      for (std::size_t i = 0; i < g.size(); ++i) gx.data()[i] += g.data()[i];
    };
  }
  return out;
}

Var Tape::add_scalar(Var x, double s) {
  Mat y = value(x);
  for (std::size_t i = 0; i < y.size(); ++i) y.data()[i] += s;
  const bool ng = node(x).needs_grad;
  Var out = push(std::move(y), ng, nullptr);
  if (ng) {
    node(out).back = [x, out](Tape& t) {
      const Mat& g = t.node(out).grad;
      Mat& gx = t.gbuf(x);
      for (std::size_t i = 0; i < g.size(); ++i) gx.data()[i] += g.data()[i];
    };
  }
  return out;
}

Var Tape::scale(Var x, double s) {
  Mat y = value(x);
  for (std::size_t i = 0; i < y.size(); ++i) y.data()[i] *= s;
  const bool ng = node(x).needs_grad;
  Var out = push(std::move(y), ng, nullptr);
  if (ng) {
    node(out).back = [x, out, s](Tape& t) {
      const Mat& g = t.node(out).grad;
      Mat& gx = t.gbuf(x);
      for (std::size_t i = 0; i < g.size(); ++i) gx.data()[i] += s * g.data()[i];
    };
  }
  return out;
}

Var Tape::elu(Var x) {
  const Mat& xv = value(x);
  Mat y = xv;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double v = y.data()[i];
    if (v < 0.0) y.data()[i] = std::expm1(v);
  }
  const bool ng = node(x).needs_grad;
  Var out = push(std::move(y), ng, nullptr);
  if (ng) {
    node(out).back = [x, out](Tape& t) {
      const Mat& g = t.node(out).grad;
      const Mat& yv = t.value(out);
      const Mat& xv2 = t.value(x);
      Mat& gx = t.gbuf(x);
      for (std::size_t i = 0; i < g.size(); ++i) {
        const double d = xv2.data()[i] >= 0.0 ? 1.0 : yv.data()[i] + 1.0;
        gx.data()[i] += d * g.data()[i];
      }
    };
  }
  return out;
}

Var Tape::sigmoid(Var x) {
  Mat y = value(x);
  for (std::size_t i = 0; i < y.size(); ++i) y.data()[i] = stable_sigmoid(y.data()[i]);
  const bool ng = node(x).needs_grad;
  Var out = push(std::move(y), ng, nullptr);
  if (ng) {
    node(out).back = [x, out](Tape& t) {
      const Mat& g = t.node(out).grad;
      const Mat& yv = t.value(out);
      Mat& gx = t.gbuf(x);
      for (std::size_t i = 0; i < g.size(); ++i) {
        const double s = yv.data()[i];
        gx.data()[i] += s * (1.0 - s) * g.data()[i];
      }
    };
  }
  return out;
}

Var Tape::softmax_rows(Var x) {
  Mat y = value(x);
  for (std::size_t i = 0; i < y.rows(); ++i) {
    auto r = y.row(i);
    const double m = *std::max_element(r.begin(), r.end());
    double sum = 0.0;
    for (double& v : r) {
      v = std::exp(v - m);
      sum += v;
    }
    for (double& v : r) v /= sum;
  }
  const bool ng = node(x).needs_grad;
  Var out = push(std::move(y), ng, nullptr);
  if (ng) {
    node(out).back = [x, out](Tape& t) {
      const Mat& g = t.node(out).grad;
      const Mat& yv = t.value(out);
      Mat& gx = t.gbuf(x);
      for (std::size_t i = 0; i < g.rows(); ++i) {
        double dot = 0.0;
        for (std::size_t j = 0; j < g.cols(); ++j) dot += g(i, j) * yv(i, j);
        for (std::size_t j = 0; j < g.cols(); ++j)
          gx(i, j) += (g(i, j) - dot) * yv(i, j);
      }
    };
  }
  return out;
}

Var Tape::tanh_scaled(Var x, double s) {
  Mat y = value(x);
  for (std::size_t i = 0; i < y.size(); ++i) y.data()[i] = s * std::tanh(y.data()[i]);
  const bool ng = node(x).needs_grad;
  Var out = push(std::move(y), ng, nullptr);
  if (ng) {
    node(out).back = [x, out, s](Tape& t) {
      const Mat& g = t.node(out).grad;
      const Mat& yv = t.value(out);
      Mat& gx = t.gbuf(x);
      for (std::size_t i = 0; i < g.size(); ++i) {
        const double th = yv.data()[i] / s;
        gx.data()[i] += s * (1.0 - th * th) * g.data()[i];
      }
    };
  }
  return out;
}

Var Tape::clip01(Var x) {
  Mat y = value(x);
  for (std::size_t i = 0; i < y.size(); ++i) y.data()[i] = std::clamp(y.data()[i], 0.0, 1.0);
  const bool ng = node(x).needs_grad;
  Var out = push(std::move(y), ng, nullptr);
  if (ng) {
    node(out).back = [x, out](Tape& t) {
      const Mat& g = t.node(out).grad;
      const Mat& xv = t.value(x);
      Mat& gx = t.gbuf(x);
      for (std::size_t i = 0; i < g.size(); ++i)
        if (xv.data()[i] > 0.0 && xv.data()[i] < 1.0) gx.data()[i] += g.data()[i];
    };
  }
  return out;
}

Var Tape::mean_power_norm(Var x) {
  const Mat& xv = value(x);
  if (xv.cols() != 2) throw std::invalid_argument("mean_power_norm: expects (re, im) columns");
  double p = 0.0;
  for (std::size_t i = 0; i < xv.size(); ++i) p += xv.data()[i] * xv.data()[i];
  p /= static_cast<double>(xv.rows());
  const double inv = 1.0 / std::sqrt(std::max(p, 1e-300));
  Mat y = xv;
  for (std::size_t i = 0; i < y.size(); ++i) y.data()[i] *= inv;
  const bool ng = node(x).needs_grad;
  Var out = push(std::move(y), ng, nullptr);
  if (ng) {
    node(out).back = [x, out, p, inv](Tape& t) {
      const Mat& g = t.node(out).grad;
      const Mat& xv2 = t.value(x);
      Mat& gx = t.gbuf(x);
      double dot = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) dot += g.data()[i] * xv2.data()[i];
      const double coef = dot * inv / (p * static_cast<double>(xv2.rows()));
      for (std::size_t i = 0; i < g.size(); ++i)
        gx.data()[i] += g.data()[i] * inv - xv2.data()[i] * coef;
    };
  }
  return out;
}

Var Tape::power_norm(Var x) {
  const Mat& xv = value(x);
  double s = 0.0;
  for (std::size_t i = 0; i < xv.size(); ++i) s += xv.data()[i] * xv.data()[i];
  const double inv = 1.0 / std::sqrt(std::max(s, 1e-300));
  Mat y = xv;
  for (std::size_t i = 0; i < y.size(); ++i) y.data()[i] *= inv;
  const bool ng = node(x).needs_grad;
  Var out = push(std::move(y), ng, nullptr);
  if (ng) {
    node(out).back = [x, out, s, inv](Tape& t) {
      const Mat& g = t.node(out).grad;
      const Mat& xv2 = t.value(x);
      Mat& gx = t.gbuf(x);
      double dot = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) dot += g.data()[i] * xv2.data()[i];
      const double coef = dot * inv / s;
      for (std::size_t i = 0; i < g.size(); ++i)
        gx.data()[i] += g.data()[i] * inv - xv2.data()[i] * coef;
    };
  }
  return out;
}

Var Tape::gather_rows(Var src, std::vector<uint32_t> idx) {
  const Mat& sv = value(src);
  Mat y(idx.size(), sv.cols());
  for (std::size_t r = 0; r < idx.size(); ++r) {
    if (idx[r] >= sv.rows()) throw std::invalid_argument("gather_rows: index out of range");
    std::copy_n(sv.data() + idx[r] * sv.cols(), sv.cols(), y.data() + r * sv.cols());
  }
  const bool ng = node(src).needs_grad;
  Var out = push(std::move(y), ng, nullptr);
  if (ng) {
    node(out).back = [src, out, idx = std::move(idx)](Tape& t) {
      const Mat& g = t.node(out).grad;
      Mat& gs = t.gbuf(src);
      for (std::size_t r = 0; r < idx.size(); ++r)
        for (std::size_t j = 0; j < g.cols(); ++j) gs(idx[r], j) += g(r, j);
    };
  }
  return out;
}

Var Tape::cmul(Var a, Var b) {
  const Mat& av = value(a);
  const Mat& bv = value(b);
  if (!av.same_shape(bv) || av.cols() != 2)
    throw std::invalid_argument("cmul: expects matching batch x 2 operands");
  Mat y(av.rows(), 2);
  for (std::size_t n = 0; n < av.rows(); ++n) {
    y(n, 0) = av(n, 0) * bv(n, 0) - av(n, 1) * bv(n, 1);
    y(n, 1) = av(n, 0) * bv(n, 1) + av(n, 1) * bv(n, 0);
  }
  const bool ng = node(a).needs_grad || node(b).needs_grad;
  Var out = push(std::move(y), ng, nullptr);
  if (ng) {
    node(out).back = [a, b, out](Tape& t) {
      const Mat& g = t.node(out).grad;
      const Mat& av2 = t.value(a);
      const Mat& bv2 = t.value(b);
      if (t.node(a).needs_grad) {
        Mat& ga = t.gbuf(a);
        for (std::size_t n = 0; n < g.rows(); ++n) {
          ga(n, 0) += g(n, 0) * bv2(n, 0) + g(n, 1) * bv2(n, 1);
          ga(n, 1) += -g(n, 0) * bv2(n, 1) + g(n, 1) * bv2(n, 0);
        }
      }
      if (t.node(b).needs_grad) {
        Mat& gb = t.gbuf(b);
        for (std::size_t n = 0; n < g.rows(); ++n) {
          gb(n, 0) += g(n, 0) * av2(n, 0) + g(n, 1) * av2(n, 1);
          gb(n, 1) += -g(n, 0) * av2(n, 1) + g(n, 1) * av2(n, 0);
        }
      }
    };
  }
  return out;
}

Var Tape::cscale_rows(Var a, CVec s) {
  const Mat& av = value(a);
  if (av.cols() % 2 != 0 || av.rows() != s.size())
    throw std::invalid_argument("cscale_rows: shape mismatch");
  const std::size_t c = av.cols() / 2;
  Mat y(av.rows(), av.cols());
  for (std::size_t n = 0; n < av.rows(); ++n) {
    const double sr = s[n].real(), si = s[n].imag();
    for (std::size_t j = 0; j < c; ++j) {
      const double ar = av(n, j), ai = av(n, c + j);
      y(n, j) = sr * ar - si * ai;
      y(n, c + j) = sr * ai + si * ar;
    }
  }
  const bool ng = node(a).needs_grad;
  Var out = push(std::move(y), ng, nullptr);
  if (ng) {
    node(out).back = [a, out, s = std::move(s), c](Tape& t) {
      const Mat& g = t.node(out).grad;
      Mat& ga = t.gbuf(a);
      for (std::size_t n = 0; n < g.rows(); ++n) {
        const double sr = s[n].real(), si = s[n].imag();
        for (std::size_t j = 0; j < c; ++j) {
          ga(n, j) += sr * g(n, j) + si * g(n, c + j);
          ga(n, c + j) += -si * g(n, j) + sr * g(n, c + j);
        }
      }
    };
  }
  return out;
}

Var Tape::cdot_const(const CMat& a, Var v) {
  const Mat& vv = value(v);
  if (vv.rows() != 1 || vv.cols() != 2 * a.cols())
    throw std::invalid_argument("cdot_const: v must be 1 x 2K");
  const std::size_t k = a.cols();
  Mat y(a.rows(), 2);
  for (std::size_t n = 0; n < a.rows(); ++n) {
    double yr = 0.0, yi = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      const double ar = a(n, i).real(), ai = a(n, i).imag();
      const double vr = vv(0, i), vi = vv(0, k + i);
      yr += ar * vr - ai * vi;
      yi += ar * vi + ai * vr;
    }
    y(n, 0) = yr;
    y(n, 1) = yi;
  }
  const bool ng = node(v).needs_grad;
  Var out = push(std::move(y), ng, nullptr);
  if (ng) {
    // Copy of A kept alive by the closure.
    node(out).back = [v, out, a, k](Tape& t) {
      const Mat& g = t.node(out).grad;
      Mat& gv = t.gbuf(v);
      for (std::size_t n = 0; n < g.rows(); ++n) {
        const double gr = g(n, 0), gi = g(n, 1);
        for (std::size_t i = 0; i < k; ++i) {
          const double ar = a(n, i).real(), ai = a(n, i).imag();
          gv(0, i) += gr * ar + gi * ai;
          gv(0, k + i) += -gr * ai + gi * ar;
        }
      }
    };
  }
  return out;
}

Var Tape::crank1_const(Var s, const CMat& b) {
  const Mat& sv = value(s);
  if (sv.cols() != 2 || sv.rows() != b.rows())
    throw std::invalid_argument("crank1_const: s must be batch x 2 matching B rows");
  const std::size_t k = b.cols();
  Mat y(b.rows(), 2 * k);
  for (std::size_t n = 0; n < b.rows(); ++n) {
    const double sr = sv(n, 0), si = sv(n, 1);
    for (std::size_t i = 0; i < k; ++i) {
      const double br = b(n, i).real(), bi = b(n, i).imag();
      y(n, i) = sr * br - si * bi;
      y(n, k + i) = sr * bi + si * br;
    }
  }
  const bool ng = node(s).needs_grad;
  Var out = push(std::move(y), ng, nullptr);
  if (ng) {
    node(out).back = [s, out, b, k](Tape& t) {
      const Mat& g = t.node(out).grad;
      Mat& gs = t.gbuf(s);
      for (std::size_t n = 0; n < g.rows(); ++n) {
        double dr = 0.0, di = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
          const double br = b(n, i).real(), bi = b(n, i).imag();
          dr += g(n, i) * br + g(n, k + i) * bi;
          di += -g(n, i) * bi + g(n, k + i) * br;
        }
        gs(n, 0) += dr;
        gs(n, 1) += di;
      }
    };
  }
  return out;
}

Var Tape::cinv(Var a) {
  const Mat& av = value(a);
  if (av.cols() != 2) throw std::invalid_argument("cinv: expects batch x 2");
  Mat y(av.rows(), 2);
  for (std::size_t n = 0; n < av.rows(); ++n) {
    const double ar = av(n, 0), ai = av(n, 1);
    const double d = std::max(ar * ar + ai * ai, 1e-300);
    y(n, 0) = ar / d;
    y(n, 1) = -ai / d;
  }
  const bool ng = node(a).needs_grad;
  Var out = push(std::move(y), ng, nullptr);
  if (ng) {
    node(out).back = [a, out](Tape& t) {
      const Mat& g = t.node(out).grad;
      const Mat& av2 = t.value(a);
      Mat& ga = t.gbuf(a);
      for (std::size_t n = 0; n < g.rows(); ++n) {
        const double ar = av2(n, 0), ai = av2(n, 1);
        const double d = std::max(ar * ar + ai * ai, 1e-300);
        const double d2 = d * d;
        const double ux = (ai * ai - ar * ar) / d2, uy = -2.0 * ar * ai / d2;
        const double vx = 2.0 * ar * ai / d2, vy = (ai * ai - ar * ar) / d2;
        ga(n, 0) += g(n, 0) * ux + g(n, 1) * vx;
        ga(n, 1) += g(n, 0) * uy + g(n, 1) * vy;
      }
    };
  }
  return out;
}

Var Tape::add_cmat_const(Var a, const CMat& c) {
  const Mat& av = value(a);
  if (av.cols() != 2 * c.cols() || av.rows() != c.rows())
    throw std::invalid_argument("add_cmat_const: shape mismatch");
  const std::size_t k = c.cols();
  Mat y = av;
  for (std::size_t n = 0; n < c.rows(); ++n)
    for (std::size_t i = 0; i < k; ++i) {
      y(n, i) += c(n, i).real();
      y(n, k + i) += c(n, i).imag();
    }
  const bool ng = node(a).needs_grad;
  Var out = push(std::move(y), ng, nullptr);
  if (ng) {
    node(out).back = [a, out](Tape& t) {
      const Mat& g = t.node(out).grad;
      Mat& ga = t.gbuf(a);
      for (std::size_t i = 0; i < g.size(); ++i) ga.data()[i] += g.data()[i];
    };
  }
  return out;
}

Var Tape::bce(Var pred, const Mat& target) {
  const Mat& pv = value(pred);
  if (!pv.same_shape(target)) throw std::invalid_argument("bce: shape mismatch");
  const double count = static_cast<double>(pv.size());
  double loss = 0.0;
  for (std::size_t i = 0; i < pv.size(); ++i) {
    const double p = clamp_prob(pv.data()[i]);
    const double t = target.data()[i];
    loss -= t * std::log(p) + (1.0 - t) * std::log(1.0 - p);
  }
  Mat y(1, 1);
  y(0, 0) = loss / count;
  const bool ng = node(pred).needs_grad;
  Var out = push(std::move(y), ng, nullptr);
  if (ng) {
    node(out).back = [pred, out, target, count](Tape& t) {
      const double g = t.node(out).grad(0, 0) / count;
      const Mat& pv2 = t.value(pred);
      Mat& gp = t.gbuf(pred);
      for (std::size_t i = 0; i < pv2.size(); ++i) {
        const double raw = pv2.data()[i];
        if (raw <= kProbClamp || raw >= 1.0 - kProbClamp) continue;
        const double tv = target.data()[i];
        gp.data()[i] += g * (-tv / raw + (1.0 - tv) / (1.0 - raw));
      }
    };
  }
  return out;
}

Var Tape::ce(Var pred, std::vector<uint32_t> classes) {
  const Mat& pv = value(pred);
  if (pv.rows() != classes.size()) throw std::invalid_argument("ce: class count mismatch");
  const double count = static_cast<double>(pv.rows());
  double loss = 0.0;
  for (std::size_t n = 0; n < pv.rows(); ++n) {
    if (classes[n] >= pv.cols()) throw std::invalid_argument("ce: class index out of range");
    loss -= std::log(clamp_prob(pv(n, classes[n])));
  }
  Mat y(1, 1);
  y(0, 0) = loss / count;
  const bool ng = node(pred).needs_grad;
  Var out = push(std::move(y), ng, nullptr);
  if (ng) {
    node(out).back = [pred, out, classes = std::move(classes), count](Tape& t) {
      const double g = t.node(out).grad(0, 0) / count;
      const Mat& pv2 = t.value(pred);
      Mat& gp = t.gbuf(pred);
      for (std::size_t n = 0; n < pv2.rows(); ++n) {
        const double raw = pv2(n, classes[n]);
        if (raw <= kProbClamp) continue;
        gp(n, classes[n]) += -g / raw;
      }
    };
  }
  return out;
}

Var Tape::mse(Var pred, const Mat& target) {
  const Mat& pv = value(pred);
  if (!pv.same_shape(target)) throw std::invalid_argument("mse: shape mismatch");
  const double count = static_cast<double>(pv.size());
  double loss = 0.0;
  for (std::size_t i = 0; i < pv.size(); ++i) {
    const double d = pv.data()[i] - target.data()[i];
    loss += d * d;
  }
  Mat y(1, 1);
  y(0, 0) = loss / count;
  const bool ng = node(pred).needs_grad;
  Var out = push(std::move(y), ng, nullptr);
  if (ng) {
    node(out).back = [pred, out, target, count](Tape& t) {
      const double g = t.node(out).grad(0, 0) / count;
      const Mat& pv2 = t.value(pred);
      Mat& gp = t.gbuf(pred);
      for (std::size_t i = 0; i < pv2.size(); ++i)
        gp.data()[i] += 2.0 * (pv2.data()[i] - target.data()[i]) * g;
    };
  }
  return out;
}

Var Tape::pair_sq_loss(Var estimates, const Mat& targets, std::vector<uint32_t> est_idx,
                       std::vector<uint32_t> counts) {
  const Mat& ev = value(estimates);
  if (!ev.same_shape(targets) || ev.rows() != counts.size() ||
      est_idx.size() != ev.rows() * ev.cols())
    throw std::invalid_argument("pair_sq_loss: shape mismatch");
  const std::size_t t_max = ev.cols();
  std::size_t total = 0;
  for (uint32_t c : counts) total += c;
  double loss = 0.0;
  if (total > 0) {
    for (std::size_t n = 0; n < ev.rows(); ++n)
      for (std::size_t j = 0; j < counts[n]; ++j) {
        const double d = ev(n, est_idx[n * t_max + j]) - targets(n, j);
        loss += d * d;
      }
    loss /= static_cast<double>(total);
  }
  Mat y(1, 1);
  y(0, 0) = loss;
  const bool ng = node(estimates).needs_grad && total > 0;
  Var out = push(std::move(y), ng, nullptr);
  if (ng) {
    node(out).back = [estimates, out, targets, est_idx = std::move(est_idx),
                      counts = std::move(counts), total, t_max](Tape& t) {
      const double g = t.node(out).grad(0, 0) / static_cast<double>(total);
      const Mat& ev2 = t.value(estimates);
      Mat& ge = t.gbuf(estimates);
      for (std::size_t n = 0; n < ev2.rows(); ++n)
        for (std::size_t j = 0; j < counts[n]; ++j) {
          const uint32_t col = est_idx[n * t_max + j];
          ge(n, col) += 2.0 * (ev2(n, col) - targets(n, j)) * g;
        }
    };
  }
  return out;
}

Var Tape::weighted_sum(const std::vector<std::pair<double, Var>>& terms) {
  double acc = 0.0;
  bool ng = false;
  for (const auto& [w, v] : terms) {
    const Mat& mv = value(v);
    if (mv.rows() != 1 || mv.cols() != 1)
      throw std::invalid_argument("weighted_sum: terms must be scalars");
    acc += w * mv(0, 0);
    ng = ng || node(v).needs_grad;
  }
  Mat y(1, 1);
  y(0, 0) = acc;
  Var out = push(std::move(y), ng, nullptr);
  if (ng) {
    node(out).back = [terms, out](Tape& t) {
      const double g = t.node(out).grad(0, 0);
      for (const auto& [w, v] : terms)
        if (t.node(v).needs_grad) t.gbuf(v)(0, 0) += w * g;
    };
  }
  return out;
}

}  // namespace jcas
