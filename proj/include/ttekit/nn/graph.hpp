#pragma once

// Define-by-run reverse-mode autodiff over Mat<T>. A Graph owns the node
// values and a tape of backward closures; operations are free functions
// returning Expr handles. Templated so training runs in float and gradient
// verification in double.

#include <cmath>
#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

#include "ttekit/error.hpp"
#include "ttekit/kernels.hpp"
#include "ttekit/mat.hpp"
#include "ttekit/rng.hpp"

namespace ttekit::nn {

template <typename T>
struct Parameter {
  std::string name;
  Mat<T> value;
  Mat<T> grad;
  bool trainable = true;
  bool is_buffer = false;  // running statistics etc.; saved but never optimized
};

template <typename T>
class Graph;

template <typename T>
struct Expr {
  Graph<T>* g = nullptr;
  int id = -1;
  bool valid() const { return g != nullptr; }
};

template <typename T>
class Graph {
 public:
  explicit Graph(bool recording = true) : recording_(recording) {}
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  bool recording() const { return recording_; }

  Expr<T> constant(Mat<T> v) { return make(std::move(v), false); }

  Expr<T> parameter(Parameter<T>& p) {
    auto it = param_nodes_.find(&p);
    if (it != param_nodes_.end()) return {this, it->second};
    Expr<T> e = make(p.value, !p.is_buffer);
    if (recording_ && !p.is_buffer) {
      Parameter<T>* pp = &p;
      int id = e.id;
      tape_.push_back([this, pp, id] {
        if (!pp->trainable) return;
        kern::ops<T>().add(nodes_[id].grad.data(), pp->grad.data(), pp->grad.size());
      });
    }
    param_nodes_.emplace(&p, e.id);
    return e;
  }

  const Mat<T>& value(Expr<T> e) const { return nodes_[e.id].val; }
  Mat<T>& grad(Expr<T> e) { return nodes_[e.id].grad; }

  void backward(Expr<T> loss) {
    if (!recording_) throw InputError("graph: backward on a non-recording graph");
    const Mat<T>& lv = value(loss);
    if (lv.rows() != 1 || lv.cols() != 1) throw InputError("graph: backward requires a scalar output");
    for (auto& n : nodes_) {
      n.grad = Mat<T>(n.val.rows(), n.val.cols());
    }
    nodes_[loss.id].grad(0, 0) = T{1};
    for (auto it = tape_.rbegin(); it != tape_.rend(); ++it) (*it)();
  }

  void clear() {
    nodes_.clear();
    tape_.clear();
    param_nodes_.clear();
  }

  std::size_t node_count() const { return nodes_.size(); }

  // -- internal helpers used by the op implementations ---------------------
  Expr<T> make(Mat<T> v, bool needs_grad) {
    nodes_.push_back(Node{std::move(v), Mat<T>{}, needs_grad});
    return {this, static_cast<int>(nodes_.size()) - 1};
  }

  bool needs_grad(Expr<T> e) const { return nodes_[e.id].needs_grad; }

  template <typename F>
  void push(bool any_input_needs_grad, F&& f) {
    if (recording_ && any_input_needs_grad) tape_.push_back(std::forward<F>(f));
  }

 private:
  struct Node {
    Mat<T> val;
    Mat<T> grad;
    bool needs_grad;
  };
  std::vector<Node> nodes_;
  std::vector<std::function<void()>> tape_;
  std::unordered_map<Parameter<T>*, int> param_nodes_;
  bool recording_;
};

// ---------------------------------------------------------------------------
// helpers

namespace detail {

template <typename T>
void require(bool ok, const char* what) {
  if (!ok) throw InputError(std::string("graph: ") + what);
}

// out(k x n) += a(m x k)^T d(m x n)
template <typename T>
void gemm_tn_acc(const Mat<T>& a, const Mat<T>& d, Mat<T>& out) {
  const int m = a.rows(), k = a.cols(), n = d.cols();
  for (int i = 0; i < m; ++i) {
    const T* ai = a.row(i);
    const T* di = d.row(i);
    for (int p = 0; p < k; ++p) kern::ops<T>().axpy(ai[p], di, out.row(p), n);
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// elementwise and structural ops

template <typename T>
Expr<T> add(Expr<T> a, Expr<T> b) {
  Graph<T>& g = *a.g;
  const Mat<T>&va = g.value(a);
  const Mat<T>&vb = g.value(b);
  detail::require<T>(va.same_shape(vb), "add: shape mismatch");
  Mat<T> out = va;
  kern::ops<T>().add(vb.data(), out.data(), out.size());
  bool ng = g.needs_grad(a) || g.needs_grad(b);
  Expr<T> y = g.make(std::move(out), ng);
  g.push(ng, [&g, a, b, y] {
    const Mat<T>& dy = g.grad(y);
    kern::ops<T>().add(dy.data(), g.grad(a).data(), dy.size());
    kern::ops<T>().add(dy.data(), g.grad(b).data(), dy.size());
  });
  return y;
}

template <typename T>
Expr<T> sub(Expr<T> a, Expr<T> b) {
  Graph<T>& g = *a.g;
  const Mat<T>&va = g.value(a);
  const Mat<T>&vb = g.value(b);
  detail::require<T>(va.same_shape(vb), "sub: shape mismatch");
  Mat<T> out = va;
  kern::ops<T>().axpy(T{-1}, vb.data(), out.data(), out.size());
  bool ng = g.needs_grad(a) || g.needs_grad(b);
  Expr<T> y = g.make(std::move(out), ng);
  g.push(ng, [&g, a, b, y] {
    const Mat<T>& dy = g.grad(y);
    kern::ops<T>().add(dy.data(), g.grad(a).data(), dy.size());
    kern::ops<T>().axpy(T{-1}, dy.data(), g.grad(b).data(), dy.size());
  });
  return y;
}

template <typename T>
Expr<T> cmul(Expr<T> a, Expr<T> b) {
  Graph<T>& g = *a.g;
  const Mat<T>&va = g.value(a);
  const Mat<T>&vb = g.value(b);
  detail::require<T>(va.same_shape(vb), "cmul: shape mismatch");
  Mat<T> out(va.rows(), va.cols());
  kern::ops<T>().mul_acc(va.data(), vb.data(), out.data(), out.size());
  bool ng = g.needs_grad(a) || g.needs_grad(b);
  Expr<T> y = g.make(std::move(out), ng);
  g.push(ng, [&g, a, b, y] {
    const Mat<T>& dy = g.grad(y);
    kern::ops<T>().mul_acc(dy.data(), g.value(b).data(), g.grad(a).data(), dy.size());
    kern::ops<T>().mul_acc(dy.data(), g.value(a).data(), g.grad(b).data(), dy.size());
  });
  return y;
}

template <typename T>
Expr<T> scale(Expr<T> a, double c) {
  Graph<T>& g = *a.g;
  Mat<T> out = g.value(a);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<T>(out[i] * c);
  bool ng = g.needs_grad(a);
  Expr<T> y = g.make(std::move(out), ng);
  g.push(ng, [&g, a, y, c] {
    kern::ops<T>().axpy(static_cast<T>(c), g.grad(y).data(), g.grad(a).data(), g.grad(y).size());
  });
  return y;
}

template <typename T, typename Fn, typename Dn>
Expr<T> unary_elementwise(Expr<T> a, Fn fn, Dn dfn_from_y) {
  Graph<T>& g = *a.g;
  const Mat<T>& va = g.value(a);
  Mat<T> out(va.rows(), va.cols());
  for (std::size_t i = 0; i < va.size(); ++i) out[i] = fn(va[i]);
  bool ng = g.needs_grad(a);
  Expr<T> y = g.make(std::move(out), ng);
  g.push(ng, [&g, a, y, dfn_from_y] {
    const Mat<T>& yv = g.value(y);
    const Mat<T>& dy = g.grad(y);
    Mat<T>& da = g.grad(a);
    const Mat<T>& xv = g.value(a);
    for (std::size_t i = 0; i < dy.size(); ++i) da[i] += dy[i] * dfn_from_y(yv[i], xv[i]);
  });
  return y;
}

template <typename T>
Expr<T> tanh(Expr<T> a) {
  return unary_elementwise(
      a, [](T x) { return std::tanh(x); }, [](T y, T) { return T{1} - y * y; });
}

template <typename T>
Expr<T> sigmoid(Expr<T> a) {
  return unary_elementwise(
      a, [](T x) { return T{1} / (T{1} + std::exp(-x)); }, [](T y, T) { return y * (T{1} - y); });
}

template <typename T>
Expr<T> relu(Expr<T> a) {
  return unary_elementwise(
      a, [](T x) { return x > T{0} ? x : T{0}; }, [](T, T x) { return x > T{0} ? T{1} : T{0}; });
}

template <typename T>
Expr<T> abs(Expr<T> a) {
  return unary_elementwise(
      a, [](T x) { return std::abs(x); }, [](T, T x) { return x > T{0} ? T{1} : (x < T{0} ? T{-1} : T{0}); });
}

template <typename T>
Expr<T> sum_all(Expr<T> a) {
  Graph<T>& g = *a.g;
  Mat<T> out(1, 1);
  out(0, 0) = kern::ops<T>().sum(g.value(a).data(), g.value(a).size());
  bool ng = g.needs_grad(a);
  Expr<T> y = g.make(std::move(out), ng);
  g.push(ng, [&g, a, y] {
    T dy = g.grad(y)(0, 0);
    Mat<T>& da = g.grad(a);
    for (std::size_t i = 0; i < da.size(); ++i) da[i] += dy;
  });
  return y;
}

template <typename T>
Expr<T> mean_all(Expr<T> a) {
  return scale(sum_all(a), 1.0 / static_cast<double>(a.g->value(a).size()));
}

// ---------------------------------------------------------------------------
// shape ops

template <typename T>
Expr<T> reshape(Expr<T> a, int rows, int cols) {
  Graph<T>& g = *a.g;
  Mat<T> out = g.value(a).reshaped(rows, cols);
  bool ng = g.needs_grad(a);
  Expr<T> y = g.make(std::move(out), ng);
  g.push(ng, [&g, a, y] {
    kern::ops<T>().add(g.grad(y).data(), g.grad(a).data(), g.grad(a).size());
  });
  return y;
}

template <typename T>
Expr<T> as_col(Expr<T> a) {
  return reshape(a, static_cast<int>(a.g->value(a).size()), 1);
}

template <typename T>
Expr<T> as_row(Expr<T> a) {
  return reshape(a, 1, static_cast<int>(a.g->value(a).size()));
}

template <typename T>
Expr<T> slice_rows(Expr<T> a, int begin, int len) {
  Graph<T>& g = *a.g;
  const Mat<T>& va = g.value(a);
  detail::require<T>(begin >= 0 && begin + len <= va.rows(), "slice_rows: out of range");
  const int c = va.cols();
  Mat<T> out(len, c);
  std::copy(va.row(begin), va.row(begin) + static_cast<std::size_t>(len) * c, out.data());
  bool ng = g.needs_grad(a);
  Expr<T> y = g.make(std::move(out), ng);
  g.push(ng, [&g, a, y, begin, len, c] {
    kern::ops<T>().add(g.grad(y).data(), g.grad(a).row(begin), static_cast<std::size_t>(len) * c);
  });
  return y;
}

template <typename T>
Expr<T> select_row(Expr<T> a, int r) {
  return slice_rows(a, r, 1);
}

template <typename T>
Expr<T> concat_rows(Expr<T> a, Expr<T> b) {
  Graph<T>& g = *a.g;
  const Mat<T>& va = g.value(a);
  const Mat<T>& vb = g.value(b);
  detail::require<T>(va.cols() == vb.cols(), "concat_rows: column mismatch");
  Mat<T> out(va.rows() + vb.rows(), va.cols());
  std::copy(va.data(), va.data() + va.size(), out.data());
  std::copy(vb.data(), vb.data() + vb.size(), out.data() + va.size());
  bool ng = g.needs_grad(a) || g.needs_grad(b);
  Expr<T> y = g.make(std::move(out), ng);
  g.push(ng, [&g, a, b, y] {
    const Mat<T>& dy = g.grad(y);
    std::size_t na = g.grad(a).size();
    kern::ops<T>().add(dy.data(), g.grad(a).data(), na);
    kern::ops<T>().add(dy.data() + na, g.grad(b).data(), g.grad(b).size());
  });
  return y;
}

template <typename T>
Expr<T> concat_cols(Expr<T> a, Expr<T> b) {
  Graph<T>& g = *a.g;
  const Mat<T>& va = g.value(a);
  const Mat<T>& vb = g.value(b);
  detail::require<T>(va.rows() == vb.rows(), "concat_cols: row mismatch");
  Mat<T> out(va.rows(), va.cols() + vb.cols());
  for (int r = 0; r < va.rows(); ++r) {
    std::copy(va.row(r), va.row(r) + va.cols(), out.row(r));
    std::copy(vb.row(r), vb.row(r) + vb.cols(), out.row(r) + va.cols());
  }
  bool ng = g.needs_grad(a) || g.needs_grad(b);
  Expr<T> y = g.make(std::move(out), ng);
  g.push(ng, [&g, a, b, y] {
    const Mat<T>& dy = g.grad(y);
    Mat<T>& da = g.grad(a);
    Mat<T>& db = g.grad(b);
    for (int r = 0; r < da.rows(); ++r) {
      kern::ops<T>().add(dy.row(r), da.row(r), da.cols());
      kern::ops<T>().add(dy.row(r) + da.cols(), db.row(r), db.cols());
    }
  });
  return y;
}

template <typename T>
Expr<T> stack_rows(const std::vector<Expr<T>>& rows) {
  detail::require<T>(!rows.empty(), "stack_rows: empty");
  Graph<T>& g = *rows[0].g;
  const int c = g.value(rows[0]).cols();
  Mat<T> out(static_cast<int>(rows.size()), c);
  bool ng = false;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Mat<T>& v = g.value(rows[i]);
    detail::require<T>(v.rows() == 1 && v.cols() == c, "stack_rows: need 1 x C rows");
    std::copy(v.data(), v.data() + c, out.row(static_cast<int>(i)));
    ng = ng || g.needs_grad(rows[i]);
  }
  Expr<T> y = g.make(std::move(out), ng);
  g.push(ng, [&g, rows, y] {
    const Mat<T>& dy = g.grad(y);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      kern::ops<T>().add(dy.row(static_cast<int>(i)), g.grad(rows[i]).data(), dy.cols());
    }
  });
  return y;
}

// Keep frames with even index (0-based): length ceil(T/2).
template <typename T>
Expr<T> take_even_rows(Expr<T> a) {
  Graph<T>& g = *a.g;
  const Mat<T>& va = g.value(a);
  const int out_rows = (va.rows() + 1) / 2;
  Mat<T> out(out_rows, va.cols());
  for (int r = 0; r < out_rows; ++r) {
    std::copy(va.row(2 * r), va.row(2 * r) + va.cols(), out.row(r));
  }
  bool ng = g.needs_grad(a);
  Expr<T> y = g.make(std::move(out), ng);
  g.push(ng, [&g, a, y, out_rows] {
    const Mat<T>& dy = g.grad(y);
    Mat<T>& da = g.grad(a);
    for (int r = 0; r < out_rows; ++r) kern::ops<T>().add(dy.row(r), da.row(2 * r), dy.cols());
  });
  return y;
}

// y[t,:] = m[t,:] + v^T  (v is a column vector)
template <typename T>
Expr<T> add_rowvec(Expr<T> m, Expr<T> v) {
  Graph<T>& g = *m.g;
  const Mat<T>& vm = g.value(m);
  const Mat<T>& vv = g.value(v);
  detail::require<T>(vv.cols() == 1 && vv.rows() == vm.cols(), "add_rowvec: shape mismatch");
  Mat<T> out = vm;
  for (int r = 0; r < out.rows(); ++r) kern::ops<T>().add(vv.data(), out.row(r), out.cols());
  bool ng = g.needs_grad(m) || g.needs_grad(v);
  Expr<T> y = g.make(std::move(out), ng);
  g.push(ng, [&g, m, v, y] {
    const Mat<T>& dy = g.grad(y);
    kern::ops<T>().add(dy.data(), g.grad(m).data(), dy.size());
    Mat<T>& dv = g.grad(v);
    for (int r = 0; r < dy.rows(); ++r) kern::ops<T>().add(dy.row(r), dv.data(), dy.cols());
  });
  return y;
}

// ---------------------------------------------------------------------------
// matrix products

// C = A(m x k) B(k x n)
template <typename T>
Expr<T> matmul(Expr<T> a, Expr<T> b) {
  Graph<T>& g = *a.g;
  const Mat<T>& va = g.value(a);
  const Mat<T>& vb = g.value(b);
  detail::require<T>(va.cols() == vb.rows(), "matmul: inner dimension mismatch");
  const int m = va.rows(), k = va.cols(), n = vb.cols();
  Mat<T> out(m, n);
  if (n == 1) {
    kern::ops<T>().matvec(va.data(), vb.data(), out.data(), m, k);
  } else {
    kern::ops<T>().gemm_nn(va.data(), vb.data(), out.data(), m, k, n);
  }
  bool ng = g.needs_grad(a) || g.needs_grad(b);
  Expr<T> y = g.make(std::move(out), ng);
  g.push(ng, [&g, a, b, y, m, k, n] {
    const Mat<T>& dy = g.grad(y);
    const Mat<T>& va2 = g.value(a);
    const Mat<T>& vb2 = g.value(b);
    Mat<T>& da = g.grad(a);
    Mat<T>& db = g.grad(b);
    if (n == 1) {
      // dA += dy (m x 1) . b^T ; dB += A^T dy
      for (int i = 0; i < m; ++i) kern::ops<T>().axpy(dy[i], vb2.data(), da.row(i), k);
      kern::ops<T>().matvec_t(va2.data(), dy.data(), db.data(), m, k);
    } else {
      kern::ops<T>().gemm_nt(dy.data(), vb2.data(), da.data(), m, n, k);  // dy (m x n) (B^T)(n x k)
      detail::gemm_tn_acc(va2, dy, db);
    }
  });
  return y;
}

// C = A(m x k) B(n x k)^T
template <typename T>
Expr<T> matmul_nt(Expr<T> a, Expr<T> b) {
  Graph<T>& g = *a.g;
  const Mat<T>& va = g.value(a);
  const Mat<T>& vb = g.value(b);
  detail::require<T>(va.cols() == vb.cols(), "matmul_nt: inner dimension mismatch");
  const int m = va.rows(), k = va.cols(), n = vb.rows();
  Mat<T> out(m, n);
  kern::ops<T>().gemm_nt(va.data(), vb.data(), out.data(), m, k, n);
  bool ng = g.needs_grad(a) || g.needs_grad(b);
  Expr<T> y = g.make(std::move(out), ng);
  g.push(ng, [&g, a, b, y, m, k, n] {
    const Mat<T>& dy = g.grad(y);
    // dA += dY B ; dB += dY^T A
    kern::ops<T>().gemm_nn(dy.data(), g.value(b).data(), g.grad(a).data(), m, n, k);
    detail::gemm_tn_acc(dy, g.value(a), g.grad(b));
  });
  return y;
}

// C = A(m x k)^T B(m x n)
template <typename T>
Expr<T> matmul_tn(Expr<T> a, Expr<T> b) {
  Graph<T>& g = *a.g;
  const Mat<T>& va = g.value(a);
  const Mat<T>& vb = g.value(b);
  detail::require<T>(va.rows() == vb.rows(), "matmul_tn: inner dimension mismatch");
  const int k = va.cols(), n = vb.cols();
  Mat<T> out(k, n);
  detail::gemm_tn_acc(va, vb, out);
  bool ng = g.needs_grad(a) || g.needs_grad(b);
  Expr<T> y = g.make(std::move(out), ng);
  g.push(ng, [&g, a, b, y, k, n] {
    const Mat<T>& dy = g.grad(y);
    const int m = g.value(a).rows();
    // dA += B dY^T ; dB += A dY
    kern::ops<T>().gemm_nt(g.value(b).data(), dy.data(), g.grad(a).data(), m, n, k);
    if (n == 1) {
      kern::ops<T>().matvec(g.value(a).data(), dy.data(), g.grad(b).data(), m, k);
    } else {
      kern::ops<T>().gemm_nn(g.value(a).data(), dy.data(), g.grad(b).data(), m, k, n);
    }
  });
  return y;
}

// ---------------------------------------------------------------------------
// attention / classification primitives

// Softmax over a column vector with a 0/1 keep-mask; masked entries are
// exactly zero and the rest sum to 1.
template <typename T>
Expr<T> masked_softmax(Expr<T> e, const Mat<T>& mask) {
  Graph<T>& g = *e.g;
  const Mat<T>& ve = g.value(e);
  detail::require<T>(ve.cols() == 1 && mask.rows() == ve.rows() && mask.cols() == 1,
                     "masked_softmax: need column vectors of equal length");
  T max_e = T{0};
  bool any = false;
  for (int i = 0; i < ve.rows(); ++i) {
    if (mask(i, 0) != T{0} && (!any || ve(i, 0) > max_e)) {
      max_e = ve(i, 0);
      any = true;
    }
  }
  if (!any) throw InputError("masked_softmax: all positions masked");
  Mat<T> out(ve.rows(), 1);
  T z = T{0};
  for (int i = 0; i < ve.rows(); ++i) {
    if (mask(i, 0) != T{0}) {
      out(i, 0) = std::exp(ve(i, 0) - max_e);
      z += out(i, 0);
    }
  }
  for (int i = 0; i < ve.rows(); ++i) out(i, 0) /= z;
  bool ng = g.needs_grad(e);
  Expr<T> y = g.make(std::move(out), ng);
  g.push(ng, [&g, e, y] {
    const Mat<T>& yv = g.value(y);
    const Mat<T>& dy = g.grad(y);
    T s = kern::ops<T>().dot(dy.data(), yv.data(), yv.size());
    Mat<T>& de = g.grad(e);
    for (std::size_t i = 0; i < de.size(); ++i) de[i] += yv[i] * (dy[i] - s);
  });
  return y;
}

template <typename T>
Expr<T> softmax(Expr<T> e) {
  Mat<T> mask(e.g->value(e).rows(), 1);
  mask.fill(T{1});
  return masked_softmax(e, mask);
}

// Negative log-likelihood of `target` under Softmax(logits); numerically
// stable fused form.
template <typename T>
Expr<T> cross_entropy(Expr<T> logits, int target) {
  Graph<T>& g = *logits.g;
  const Mat<T>& lv = g.value(logits);
  detail::require<T>(lv.cols() == 1, "cross_entropy: logits must be a column vector");
  detail::require<T>(target >= 0 && target < lv.rows(), "cross_entropy: target out of range");
  T m = lv(0, 0);
  for (int i = 1; i < lv.rows(); ++i) m = std::max(m, lv(i, 0));
  T z = T{0};
  for (int i = 0; i < lv.rows(); ++i) z += std::exp(lv(i, 0) - m);
  Mat<T> out(1, 1);
  out(0, 0) = m + std::log(z) - lv(target, 0);
  bool ng = g.needs_grad(logits);
  Expr<T> y = g.make(std::move(out), ng);
  g.push(ng, [&g, logits, y, target, m, z] {
    const Mat<T>& lv2 = g.value(logits);
    Mat<T>& dl = g.grad(logits);
    T dy = g.grad(y)(0, 0);
    for (int i = 0; i < lv2.rows(); ++i) {
      T p = std::exp(lv2(i, 0) - m) / z;
      dl(i, 0) += dy * (p - (i == target ? T{1} : T{0}));
    }
  });
  return y;
}

// Binary cross entropy on a logit, stable form.
template <typename T>
Expr<T> bce_with_logits(Expr<T> logit, double label) {
  Graph<T>& g = *logit.g;
  const Mat<T>& lv = g.value(logit);
  detail::require<T>(lv.rows() == 1 && lv.cols() == 1, "bce_with_logits: scalar logit expected");
  T z = lv(0, 0);
  Mat<T> out(1, 1);
  out(0, 0) = std::max(z, T{0}) - z * static_cast<T>(label) + std::log1p(std::exp(-std::abs(z)));
  bool ng = g.needs_grad(logit);
  Expr<T> y = g.make(std::move(out), ng);
  g.push(ng, [&g, logit, y, label] {
    T z2 = g.value(logit)(0, 0);
    T s = T{1} / (T{1} + std::exp(-z2));
    g.grad(logit)(0, 0) += g.grad(y)(0, 0) * (s - static_cast<T>(label));
  });
  return y;
}

// ---------------------------------------------------------------------------
// stochastic regularizers

// Inverted dropout; identity when not active.
template <typename T>
Expr<T> dropout(Expr<T> x, double rate, bool active, Rng* rng) {
  if (!active || rate <= 0.0) return x;
  detail::require<T>(rate < 1.0, "dropout: rate must be in [0,1)");
  detail::require<T>(rng != nullptr, "dropout: active dropout needs an rng");
  Graph<T>& g = *x.g;
  const Mat<T>& xv = g.value(x);
  Mat<T> mask(xv.rows(), xv.cols());
  const T keep_scale = static_cast<T>(1.0 / (1.0 - rate));
  for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = rng->uniform() < rate ? T{0} : keep_scale;
  Mat<T> out(xv.rows(), xv.cols());
  kern::ops<T>().mul_acc(xv.data(), mask.data(), out.data(), out.size());
  bool ng = g.needs_grad(x);
  Expr<T> y = g.make(std::move(out), ng);
  g.push(ng, [&g, x, y, mask = std::move(mask)] {
    kern::ops<T>().mul_acc(g.grad(y).data(), mask.data(), g.grad(x).data(), mask.size());
  });
  return y;
}

// ---------------------------------------------------------------------------
// 1D convolution over time (same-length zero padding)
//
// x: T x IC, weight: OC x (K*IC) laid out [oc][k*IC+ic], bias: OC x 1.

template <typename T>
Expr<T> conv1d(Expr<T> x, Expr<T> weight, Expr<T> bias, int width) {
  Graph<T>& g = *x.g;
  const Mat<T>& xv = g.value(x);
  const Mat<T>& wv = g.value(weight);
  detail::require<T>(width % 2 == 1, "conv1d: width must be odd");
  const int time = xv.rows(), ic = xv.cols(), oc = wv.rows();
  detail::require<T>(wv.cols() == width * ic, "conv1d: weight shape mismatch");
  const int pad = width / 2;

  Mat<T> patches(time, width * ic);
  for (int t = 0; t < time; ++t) {
    for (int k = 0; k < width; ++k) {
      int src = t + k - pad;
      if (src < 0 || src >= time) continue;
      std::copy(xv.row(src), xv.row(src) + ic, patches.row(t) + k * ic);
    }
  }
  Mat<T> out(time, oc);
  kern::ops<T>().gemm_nt(patches.data(), wv.data(), out.data(), time, width * ic, oc);
  const Mat<T>& bv = g.value(bias);
  detail::require<T>(bv.rows() == oc && bv.cols() == 1, "conv1d: bias shape mismatch");
  for (int t = 0; t < time; ++t) kern::ops<T>().add(bv.data(), out.row(t), oc);

  bool ng = g.needs_grad(x) || g.needs_grad(weight) || g.needs_grad(bias);
  Expr<T> y = g.make(std::move(out), ng);
  g.push(ng, [&g, x, weight, bias, y, patches = std::move(patches), time, ic, oc, width, pad] {
    const Mat<T>& dy = g.grad(y);
    // dW += dY^T patches ; dB += column sums of dY
    detail::gemm_tn_acc(dy, patches, g.grad(weight));
    Mat<T>& db = g.grad(bias);
    for (int t = 0; t < time; ++t) {
      kern::ops<T>().add(dy.row(t), db.data(), oc);
    }
    // dPatches = dY W, scattered back into dX
    Mat<T> dpatches(time, width * ic);
    kern::ops<T>().gemm_nn(dy.data(), g.value(weight).data(), dpatches.data(), time, oc, width * ic);
    Mat<T>& dx = g.grad(x);
    for (int t = 0; t < time; ++t) {
      for (int k = 0; k < width; ++k) {
        int src = t + k - pad;
        if (src < 0 || src >= time) continue;
        kern::ops<T>().add(dpatches.row(t) + k * ic, dx.row(src), ic);
      }
    }
  });
  return y;
}

// ---------------------------------------------------------------------------
// batch normalization over the time axis (per channel)
//
// Training mode normalizes with batch statistics and updates the running
// buffers in place; eval mode normalizes with the running buffers.

template <typename T>
Expr<T> batchnorm(Expr<T> x, Expr<T> gamma, Expr<T> beta, Parameter<T>& running_mean,
                  Parameter<T>& running_var, bool train, double momentum = 0.1, double eps = 1e-5) {
  Graph<T>& g = *x.g;
  const Mat<T>& xv = g.value(x);
  const int time = xv.rows(), ch = xv.cols();
  detail::require<T>(g.value(gamma).rows() == ch && g.value(beta).rows() == ch, "batchnorm: affine shape");
  detail::require<T>(running_mean.value.rows() == ch && running_var.value.rows() == ch,
                     "batchnorm: buffer shape");

  Mat<T> mu(ch, 1), var(ch, 1);
  if (train) {
    for (int c = 0; c < ch; ++c) {
      T m = T{0};
      for (int t = 0; t < time; ++t) m += xv(t, c);
      m /= static_cast<T>(time);
      T v = T{0};
      for (int t = 0; t < time; ++t) {
        T d = xv(t, c) - m;
        v += d * d;
      }
      v /= static_cast<T>(time);
      mu(c, 0) = m;
      var(c, 0) = v;
      running_mean.value(c, 0) =
          static_cast<T>((1.0 - momentum) * running_mean.value(c, 0) + momentum * m);
      running_var.value(c, 0) = static_cast<T>((1.0 - momentum) * running_var.value(c, 0) + momentum * v);
    }
  } else {
    mu = running_mean.value;
    var = running_var.value;
  }

  Mat<T> xhat(time, ch), out(time, ch);
  const Mat<T>& gv = g.value(gamma);
  const Mat<T>& bv = g.value(beta);
  Mat<T> inv_std(ch, 1);
  for (int c = 0; c < ch; ++c) inv_std(c, 0) = T{1} / std::sqrt(var(c, 0) + static_cast<T>(eps));
  for (int t = 0; t < time; ++t) {
    for (int c = 0; c < ch; ++c) {
      xhat(t, c) = (xv(t, c) - mu(c, 0)) * inv_std(c, 0);
      out(t, c) = gv(c, 0) * xhat(t, c) + bv(c, 0);
    }
  }
  bool ng = g.needs_grad(x) || g.needs_grad(gamma) || g.needs_grad(beta);
  Expr<T> y = g.make(std::move(out), ng);
  g.push(ng, [&g, x, gamma, beta, y, xhat = std::move(xhat), inv_std = std::move(inv_std), time, ch,
              train] {
    const Mat<T>& dy = g.grad(y);
    const Mat<T>& gv2 = g.value(gamma);
    Mat<T>& dgamma = g.grad(gamma);
    Mat<T>& dbeta = g.grad(beta);
    Mat<T>& dx = g.grad(x);
    for (int c = 0; c < ch; ++c) {
      T sum_dy = T{0}, sum_dy_xhat = T{0};
      for (int t = 0; t < time; ++t) {
        sum_dy += dy(t, c);
        sum_dy_xhat += dy(t, c) * xhat(t, c);
      }
      dgamma(c, 0) += sum_dy_xhat;
      dbeta(c, 0) += sum_dy;
      const T gc = gv2(c, 0) * inv_std(c, 0);
      if (train) {
        const T inv_n = T{1} / static_cast<T>(time);
        for (int t = 0; t < time; ++t) {
          dx(t, c) += gc * (dy(t, c) - inv_n * sum_dy - xhat(t, c) * inv_n * sum_dy_xhat);
        }
      } else {
        for (int t = 0; t < time; ++t) dx(t, c) += gc * dy(t, c);
      }
    }
  });
  return y;
}

}  // namespace ttekit::nn
