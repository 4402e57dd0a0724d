#pragma once

// Model building blocks on top of the graph ops. Modules own Parameters
// through a ParameterSet registry so optimizers, checkpoints and freeze
// specs can address tensors by name.

#include <memory>
#include <string>
#include <vector>

#include "ttekit/nn/graph.hpp"

namespace ttekit::nn {

template <typename T>
class ParameterSet {
 public:
  Parameter<T>& add(const std::string& name, int rows, int cols) {
    return emplace(name, rows, cols, false);
  }
  Parameter<T>& add_buffer(const std::string& name, int rows, int cols) {
    return emplace(name, rows, cols, true);
  }

  Parameter<T>* find(const std::string& name) {
    for (auto& p : params_) {
      if (p->name == name) return p.get();
    }
    return nullptr;
  }

  const std::vector<std::unique_ptr<Parameter<T>>>& all() const { return params_; }
  std::vector<std::unique_ptr<Parameter<T>>>& all() { return params_; }

  void zero_grads() {
    for (auto& p : params_) p->grad.set_zero();
  }

  // Marks every parameter whose name starts with `prefix`; returns the count.
  int set_trainable_prefix(const std::string& prefix, bool trainable) {
    int n = 0;
    for (auto& p : params_) {
      if (p->name.rfind(prefix, 0) == 0 && !p->is_buffer) {
        p->trainable = trainable;
        ++n;
      }
    }
    return n;
  }

 private:
  Parameter<T>& emplace(const std::string& name, int rows, int cols, bool buffer) {
    if (find(name)) throw InputError("parameters: duplicate name " + name);
    auto p = std::make_unique<Parameter<T>>();
    p->name = name;
    p->value = Mat<T>(rows, cols);
    p->grad = Mat<T>(rows, cols);
    p->is_buffer = buffer;
    p->trainable = !buffer;
    params_.push_back(std::move(p));
    return *params_.back();
  }

  std::vector<std::unique_ptr<Parameter<T>>> params_;
};

template <typename T>
void glorot_init(Mat<T>& w, int fan_out, int fan_in, Rng& rng) {
  const double a = std::sqrt(6.0 / (fan_in + fan_out));
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = static_cast<T>(rng.uniform(-a, a));
}

// y = W x + b
template <typename T>
struct Linear {
  Parameter<T>* W = nullptr;
  Parameter<T>* b = nullptr;

  Linear() = default;
  Linear(ParameterSet<T>& ps, const std::string& name, int out, int in, Rng& rng, bool bias = true) {
    W = &ps.add(name + ".W", out, in);
    glorot_init(W->value, out, in, rng);
    if (bias) b = &ps.add(name + ".b", out, 1);
  }

  Expr<T> apply(Graph<T>& g, Expr<T> x) const {
    Expr<T> y = matmul(g.parameter(*W), x);
    if (b) y = add(y, g.parameter(*b));
    return y;
  }

  // Row-wise application to a T x in sequence: returns T x out.
  Expr<T> apply_rows(Graph<T>& g, Expr<T> xs) const {
    Expr<T> y = matmul_nt(xs, g.parameter(*W));
    if (b) y = add_rowvec(y, g.parameter(*b));
    return y;
  }
};

template <typename T>
struct Embedding {
  Parameter<T>* table = nullptr;  // V x dim

  Embedding() = default;
  Embedding(ParameterSet<T>& ps, const std::string& name, int vocab, int dim, Rng& rng) {
    table = &ps.add(name + ".E", vocab, dim);
    glorot_init(table->value, vocab, dim, rng);
  }

  Expr<T> lookup(Graph<T>& g, int id) const { return as_col(select_row(g.parameter(*table), id)); }
};

template <typename T>
struct LstmState {
  Expr<T> h, c;
};

// Single LSTM cell with fused gate matrix [i f g o] and optional zoneout.
template <typename T>
struct LstmCell {
  Linear<T> gates;
  int units = 0;
  int input_dim = 0;

  LstmCell() = default;
  LstmCell(ParameterSet<T>& ps, const std::string& name, int units_, int input_dim_, Rng& rng)
      : gates(ps, name + ".gates", 4 * units_, input_dim_ + units_, rng), units(units_), input_dim(input_dim_) {
    // forget gate bias starts at 1
    for (int i = units; i < 2 * units; ++i) gates.b->value(i, 0) = T{1};
  }

  LstmState<T> initial_state(Graph<T>& g) const {
    return {g.constant(Mat<T>(units, 1)), g.constant(Mat<T>(units, 1))};
  }

  LstmState<T> step(Graph<T>& g, Expr<T> x, const LstmState<T>& prev, double zoneout_rate, bool train,
                    Rng* rng) const {
    Expr<T> zin = gates.apply(g, concat_rows(x, prev.h));
    Expr<T> i = sigmoid(slice_rows(zin, 0, units));
    Expr<T> f = sigmoid(slice_rows(zin, units, units));
    Expr<T> gg = tanh(slice_rows(zin, 2 * units, units));
    Expr<T> o = sigmoid(slice_rows(zin, 3 * units, units));
    Expr<T> c_new = add(cmul(f, prev.c), cmul(i, gg));
    Expr<T> h_new = cmul(o, tanh(c_new));
    if (zoneout_rate > 0.0) {
      c_new = zoneout(g, prev.c, c_new, zoneout_rate, train, rng);
      h_new = zoneout(g, prev.h, h_new, zoneout_rate, train, rng);
    }
    return {h_new, c_new};
  }

  // Each unit keeps its previous value with probability `rate` during
  // training; eval interpolates by expectation.
  static Expr<T> zoneout(Graph<T>& g, Expr<T> prev, Expr<T> next, double rate, bool train, Rng* rng) {
    if (train) {
      detail::require<T>(rng != nullptr, "zoneout: train mode needs an rng");
      const Mat<T>& pv = g.value(prev);
      Mat<T> keep(pv.rows(), pv.cols());
      for (std::size_t i = 0; i < keep.size(); ++i) keep[i] = rng->uniform() < rate ? T{1} : T{0};
      Mat<T> inv(pv.rows(), pv.cols());
      for (std::size_t i = 0; i < inv.size(); ++i) inv[i] = T{1} - keep[i];
      return add(cmul(prev, g.constant(std::move(keep))), cmul(next, g.constant(std::move(inv))));
    }
    return add(scale(prev, rate), scale(next, 1.0 - rate));
  }
};

// Bidirectional LSTM over a T x D sequence; returns T x (2*units).
template <typename T>
struct Blstm {
  LstmCell<T> fwd, bwd;

  Blstm() = default;
  Blstm(ParameterSet<T>& ps, const std::string& name, int units, int input_dim, Rng& rng)
      : fwd(ps, name + ".fwd", units, input_dim, rng), bwd(ps, name + ".bwd", units, input_dim, rng) {}

  Expr<T> apply(Graph<T>& g, Expr<T> xs, double zoneout_rate = 0.0, bool train = false,
                Rng* rng = nullptr) const {
    const int time = g.value(xs).rows();
    std::vector<Expr<T>> x_t(time);
    for (int t = 0; t < time; ++t) x_t[t] = as_col(select_row(xs, t));
    std::vector<Expr<T>> hf(time), hb(time);
    LstmState<T> sf = fwd.initial_state(g);
    for (int t = 0; t < time; ++t) {
      sf = fwd.step(g, x_t[t], sf, zoneout_rate, train, rng);
      hf[t] = sf.h;
    }
    LstmState<T> sb = bwd.initial_state(g);
    for (int t = time - 1; t >= 0; --t) {
      sb = bwd.step(g, x_t[t], sb, zoneout_rate, train, rng);
      hb[t] = sb.h;
    }
    std::vector<Expr<T>> rows(time);
    for (int t = 0; t < time; ++t) rows[t] = as_row(concat_rows(hf[t], hb[t]));
    return stack_rows(rows);
  }
};

// BLSTM stack with per-layer linear projection + tanh and even-index
// subsampling at the configured layers.
template <typename T>
struct Blstmp {
  std::vector<Blstm<T>> layers;
  std::vector<Linear<T>> projections;
  std::vector<bool> subsample_here;

  Blstmp() = default;
  Blstmp(ParameterSet<T>& ps, const std::string& name, int num_layers, int units, int projection_dim,
         int input_dim, const std::vector<int>& subsample_layers, Rng& rng) {
    subsample_here.assign(num_layers, false);
    for (int s : subsample_layers) {
      if (s < 0 || s >= num_layers) throw InputError("blstmp: subsample layer out of range");
      subsample_here[s] = true;
    }
    int in = input_dim;
    for (int l = 0; l < num_layers; ++l) {
      std::string base = name + ".l" + std::to_string(l);
      layers.emplace_back(ps, base, units, in, rng);
      projections.emplace_back(ps, base + ".proj", projection_dim, 2 * units, rng);
      in = projection_dim;
    }
  }

  Expr<T> apply(Graph<T>& g, Expr<T> xs) const {
    detail::require<T>(g.value(xs).rows() >= 1, "blstmp: empty input");
    Expr<T> h = xs;
    for (std::size_t l = 0; l < layers.size(); ++l) {
      h = tanh(projections[l].apply_rows(g, layers[l].apply(g, h)));
      if (subsample_here[l]) h = take_even_rows(h);
    }
    return h;
  }

  static int output_length(int input_length, int num_subsample_layers) {
    int t = input_length;
    for (int i = 0; i < num_subsample_layers; ++i) t = (t + 1) / 2;
    return t;
  }
};

// Conv1d + batchnorm + activation block.
enum class Activation { none, relu, tanh_fn };

template <typename T>
struct ConvBn {
  Parameter<T>* weight = nullptr;  // OC x (K*IC)
  Parameter<T>* bias = nullptr;    // OC x 1
  Parameter<T>* gamma = nullptr;
  Parameter<T>* beta = nullptr;
  Parameter<T>* running_mean = nullptr;
  Parameter<T>* running_var = nullptr;
  int width = 0;
  Activation act = Activation::none;
  bool use_bn = true;

  ConvBn() = default;
  ConvBn(ParameterSet<T>& ps, const std::string& name, int out_ch, int in_ch, int width_, Activation act_,
         Rng& rng, bool use_bn_ = true)
      : width(width_), act(act_), use_bn(use_bn_) {
    if (width % 2 == 0) throw InputError("conv: width must be odd");
    weight = &ps.add(name + ".W", out_ch, width * in_ch);
    glorot_init(weight->value, out_ch, width * in_ch, rng);
    bias = &ps.add(name + ".b", out_ch, 1);
    if (use_bn) {
      gamma = &ps.add(name + ".bn.gamma", out_ch, 1);
      gamma->value.fill(T{1});
      beta = &ps.add(name + ".bn.beta", out_ch, 1);
      running_mean = &ps.add_buffer(name + ".bn.running_mean", out_ch, 1);
      running_var = &ps.add_buffer(name + ".bn.running_var", out_ch, 1);
      running_var->value.fill(T{1});
    }
  }

  Expr<T> apply(Graph<T>& g, Expr<T> xs, bool train) const {
    Expr<T> y = conv1d(xs, g.parameter(*weight), g.parameter(*bias), width);
    if (use_bn) {
      y = batchnorm(y, g.parameter(*gamma), g.parameter(*beta), *running_mean, *running_var, train);
    }
    switch (act) {
      case Activation::relu: return relu(y);
      case Activation::tanh_fn: return tanh(y);
      case Activation::none: return y;
    }
    return y;
  }
};

// ---------------------------------------------------------------------------
// Location-aware attention. Energies condition on a convolution over the
// feedback vector: the previous step's weights, or their running sum in
// cumulative mode.

enum class AttentionMode { previous, cumulative };

template <typename T>
struct AttentionContext {
  Expr<T> weights;      // last computed weights (simplex over positions)
  Expr<T> accumulated;  // running sum of past weights
};

template <typename T>
struct LocationAttention {
  Parameter<T>* w_query = nullptr;   // A x Q
  Parameter<T>* w_state = nullptr;   // A x H
  Parameter<T>* w_feat = nullptr;    // A x F
  Parameter<T>* bias = nullptr;      // A x 1
  Parameter<T>* score_v = nullptr;   // A x 1
  Parameter<T>* conv_w = nullptr;    // F x K (single input channel)
  Parameter<T>* conv_b = nullptr;    // F x 1
  int attn_dim = 0, num_filters = 0, filter_width = 0;
  AttentionMode mode = AttentionMode::previous;

  LocationAttention() = default;
  LocationAttention(ParameterSet<T>& ps, const std::string& name, int attn_dim_, int query_dim,
                    int state_dim, int num_filters_, int filter_width_, AttentionMode mode_, Rng& rng)
      : attn_dim(attn_dim_), num_filters(num_filters_), filter_width(filter_width_), mode(mode_) {
    w_query = &ps.add(name + ".Wq", attn_dim, query_dim);
    glorot_init(w_query->value, attn_dim, query_dim, rng);
    w_state = &ps.add(name + ".Wh", attn_dim, state_dim);
    glorot_init(w_state->value, attn_dim, state_dim, rng);
    w_feat = &ps.add(name + ".Wf", attn_dim, num_filters);
    glorot_init(w_feat->value, attn_dim, num_filters, rng);
    bias = &ps.add(name + ".b", attn_dim, 1);
    score_v = &ps.add(name + ".v", attn_dim, 1);
    glorot_init(score_v->value, attn_dim, 1, rng);
    conv_w = &ps.add(name + ".conv.W", num_filters, filter_width);
    glorot_init(conv_w->value, num_filters, filter_width, rng);
    conv_b = &ps.add(name + ".conv.b", num_filters, 1);
  }

  // Precomputed per-utterance projection of the attended states.
  Expr<T> prepare(Graph<T>& g, Expr<T> states) const {
    return matmul_nt(states, g.parameter(*w_state));  // T x A
  }

  AttentionContext<T> initial_context(Graph<T>& g, int positions) const {
    Mat<T> uniform(positions, 1);
    uniform.fill(T{1} / static_cast<T>(positions));
    return {g.constant(std::move(uniform)), g.constant(Mat<T>(positions, 1))};
  }

  struct Result {
    Expr<T> weights;  // T x 1
    Expr<T> context;  // H x 1
    AttentionContext<T> ctx;
  };

  Result apply(Graph<T>& g, Expr<T> query, Expr<T> states, Expr<T> states_proj,
               const AttentionContext<T>& ctx, const Mat<T>& mask) const {
    detail::require<T>(g.value(states).rows() >= 1, "attention: empty states");
    Expr<T> feedback = mode == AttentionMode::previous ? ctx.weights : ctx.accumulated;
    Expr<T> f = conv1d(feedback, g.parameter(*conv_w), g.parameter(*conv_b), filter_width);  // T x F
    Expr<T> lin = add(states_proj, matmul_nt(f, g.parameter(*w_feat)));                      // T x A
    Expr<T> qv = add(matmul(g.parameter(*w_query), query), g.parameter(*bias));              // A x 1
    Expr<T> energies = matmul(tanh(add_rowvec(lin, qv)), g.parameter(*score_v));             // T x 1
    Expr<T> weights = masked_softmax(energies, mask);
    Expr<T> context = matmul_tn(states, weights);  // H x 1
    return {weights, context, {weights, add(ctx.accumulated, weights)}};
  }
};

}  // namespace ttekit::nn
