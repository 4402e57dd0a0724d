#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ttekit/nn/grad_check.hpp"
#include "ttekit/nn/modules.hpp"
#include "ttekit/nn/optim.hpp"

using namespace ttekit;
using namespace ttekit::nn;

namespace {

Mat<double> random_mat(Rng& rng, int r, int c, double scale = 1.0) {
  Mat<double> m(r, c);
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = rng.uniform(-scale, scale);
  return m;
}

}  // namespace

TEST_CASE("linear: identity weights pass input through, zero weights give bias") {
  ParameterSet<double> ps;
  Rng rng(1);
  Linear<double> lin(ps, "lin", 3, 3, rng);
  lin.W->value.set_zero();
  for (int i = 0; i < 3; ++i) lin.W->value(i, i) = 1.0;
  lin.b->value.set_zero();

  Graph<double> g;
  Mat<double> x(3, 1, {0.3, -0.7, 2.0});
  auto y = lin.apply(g, g.constant(x));
  for (int i = 0; i < 3; ++i) CHECK(g.value(y)(i, 0) == x(i, 0));

  lin.W->value.set_zero();
  lin.b->value = Mat<double>(3, 1, {1.0, 2.0, 3.0});
  Graph<double> g2;
  auto y2 = lin.apply(g2, g2.constant(x));
  for (int i = 0; i < 3; ++i) CHECK(g2.value(y2)(i, 0) == lin.b->value(i, 0));
}

TEST_CASE("linear: random case matches brute-force matrix multiply") {
  Rng rng(7);
  ParameterSet<double> ps;
  Linear<double> lin(ps, "lin", 3, 4, rng);
  Mat<double> x = random_mat(rng, 4, 1);
  Graph<double> g;
  auto y = lin.apply(g, g.constant(x));
  for (int i = 0; i < 3; ++i) {
    double want = lin.b->value(i, 0);
    for (int j = 0; j < 4; ++j) want += lin.W->value(i, j) * x(j, 0);
    CHECK(g.value(y)(i, 0) == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("embedding is row selection") {
  Rng rng(3);
  ParameterSet<double> ps;
  Embedding<double> emb(ps, "emb", 5, 4, rng);
  Graph<double> g;
  auto e = emb.lookup(g, 2);
  REQUIRE(g.value(e).rows() == 4);
  for (int i = 0; i < 4; ++i) CHECK(g.value(e)(i, 0) == emb.table->value(2, i));
}

TEST_CASE("matmul variants match hand-rolled loops") {
  Rng rng(11);
  Mat<double> a = random_mat(rng, 3, 5);
  Mat<double> b = random_mat(rng, 5, 2);
  Mat<double> c = random_mat(rng, 2, 5);
  Mat<double> d = random_mat(rng, 3, 4);
  Graph<double> g;
  auto ea = g.constant(a), eb = g.constant(b), ec = g.constant(c), ed = g.constant(d);

  auto nn_ = matmul(ea, eb);  // 3x2
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 2; ++j) {
      double want = 0;
      for (int k = 0; k < 5; ++k) want += a(i, k) * b(k, j);
      CHECK(g.value(nn_)(i, j) == doctest::Approx(want).epsilon(1e-12));
    }
  }
  auto nt = matmul_nt(ea, ec);  // 3x2
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 2; ++j) {
      double want = 0;
      for (int k = 0; k < 5; ++k) want += a(i, k) * c(j, k);
      CHECK(g.value(nt)(i, j) == doctest::Approx(want).epsilon(1e-12));
    }
  }
  auto tn = matmul_tn(ed, ea);  // 4x5
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 5; ++j) {
      double want = 0;
      for (int k = 0; k < 3; ++k) want += d(k, i) * a(k, j);
      CHECK(g.value(tn)(i, j) == doctest::Approx(want).epsilon(1e-12));
    }
  }
}

TEST_CASE("gradients: linear layer under 1e-7") {
  Rng rng(5);
  ParameterSet<double> ps;
  Linear<double> lin(ps, "lin", 4, 3, rng);
  Parameter<double>& x = ps.add("x", 3, 1);
  x.value = random_mat(rng, 3, 1);
  auto build = [&](Graph<double>& g) { return sum_all(tanh(lin.apply(g, g.parameter(x)))); };
  CHECK(grad_check(build, ps) < 1e-7);
}

TEST_CASE("gradients: softmax + NLL under 1e-6") {
  Rng rng(6);
  ParameterSet<double> ps;
  Parameter<double>& logits = ps.add("logits", 7, 1);
  logits.value = random_mat(rng, 7, 1, 2.0);
  auto build = [&](Graph<double>& g) { return cross_entropy(g.parameter(logits), 3); };
  CHECK(grad_check(build, ps) < 1e-6);
}

TEST_CASE("gradients: every remaining primitive under 1e-4") {
  Rng rng(8);
  ParameterSet<double> ps;
  Parameter<double>& a = ps.add("a", 4, 3);
  a.value = random_mat(rng, 4, 3);
  Parameter<double>& b = ps.add("b", 4, 3);
  b.value = random_mat(rng, 4, 3);

  auto sub_build = [&](Graph<double>& g) {
    return sum_all(cmul(sub(g.parameter(a), g.parameter(b)), sigmoid(g.parameter(a))));
  };
  CHECK(grad_check(sub_build, ps) < 1e-4);

  auto abs_build = [&](Graph<double>& g) { return sum_all(nn::abs(sub(g.parameter(a), g.parameter(b)))); };
  CHECK(grad_check(abs_build, ps) < 1e-4);

  auto soft_build = [&](Graph<double>& g) {
    Mat<double> mask(12, 1);
    mask.fill(1.0);
    mask(5, 0) = 0.0;
    auto sm = masked_softmax(as_col(g.parameter(a)), mask);
    return sum_all(cmul(sm, as_col(g.parameter(b))));
  };
  CHECK(grad_check(soft_build, ps) < 1e-4);

  auto bce_build = [&](Graph<double>& g) {
    return bce_with_logits(slice_rows(as_col(g.parameter(a)), 2, 1), 1.0);
  };
  CHECK(grad_check(bce_build, ps) < 1e-4);

  auto structural = [&](Graph<double>& g) {
    auto ea = g.parameter(a);
    auto stacked = concat_cols(ea, ea);   // 4x6
    auto even = take_even_rows(stacked);  // 2x6
    auto rv = as_col(concat_cols(select_row(g.parameter(b), 1), select_row(g.parameter(b), 2)));
    auto v = add_rowvec(even, rv);
    return mean_all(nn::tanh(v));
  };
  CHECK(grad_check(structural, ps) < 1e-4);
}

TEST_CASE("lstm cell: zero parameters give zero output") {
  Rng rng(2);
  ParameterSet<double> ps;
  LstmCell<double> cell(ps, "lstm", 5, 3, rng);
  cell.gates.W->value.set_zero();
  cell.gates.b->value.set_zero();
  Graph<double> g;
  auto s0 = cell.initial_state(g);
  auto s1 = cell.step(g, g.constant(random_mat(rng, 3, 1)), s0, 0.0, false, nullptr);
  for (int i = 0; i < 5; ++i) CHECK(g.value(s1.h)(i, 0) == 0.0);
}

TEST_CASE("lstm cell: zoneout rate near 1 keeps the previous state (eval expectation)") {
  Rng rng(4);
  ParameterSet<double> ps;
  LstmCell<double> cell(ps, "lstm", 4, 3, rng);
  const double delta = 1e-3;
  Graph<double> g;
  Mat<double> h_prev = random_mat(rng, 4, 1, 0.5);
  Mat<double> c_prev = random_mat(rng, 4, 1, 0.5);
  LstmState<double> prev{g.constant(h_prev), g.constant(c_prev)};
  auto next = cell.step(g, g.constant(random_mat(rng, 3, 1)), prev, 1.0 - delta, false, nullptr);
  for (int i = 0; i < 4; ++i) {
    CHECK(std::abs(g.value(next.h)(i, 0) - h_prev(i, 0)) < 2.5 * delta);
  }
}

TEST_CASE("gradients: lstm cell under 1e-4") {
  Rng rng(9);
  ParameterSet<double> ps;
  LstmCell<double> cell(ps, "lstm", 4, 3, rng);
  Parameter<double>& x = ps.add("x", 3, 1);
  x.value = random_mat(rng, 3, 1);
  auto build = [&](Graph<double>& g) {
    auto s0 = cell.initial_state(g);
    auto s1 = cell.step(g, g.parameter(x), s0, 0.0, false, nullptr);
    auto s2 = cell.step(g, g.parameter(x), s1, 0.0, false, nullptr);
    return sum_all(s2.h);
  };
  CHECK(grad_check(build, ps) < 1e-4);
}

TEST_CASE("blstmp: length algebra and output range") {
  Rng rng(10);
  ParameterSet<double> ps;
  Blstmp<double> enc(ps, "enc", 2, 6, 5, 4, {0, 1}, rng);
  for (int t : {1, 2, 7, 8, 16}) {
    Graph<double> g;
    auto out = enc.apply(g, g.constant(random_mat(rng, t, 4)));
    int want = (t + 1) / 2;
    want = (want + 1) / 2;
    CHECK(g.value(out).rows() == want);
    CHECK(g.value(out).cols() == 5);
    for (std::size_t i = 0; i < g.value(out).size(); ++i) {
      CHECK(g.value(out)[i] > -1.0);
      CHECK(g.value(out)[i] < 1.0);
    }
  }
  CHECK(Blstmp<double>::output_length(7, 2) == 2);
  CHECK(Blstmp<double>::output_length(8, 2) == 2);
}

TEST_CASE("blstmp: eval forward is a pure function") {
  Rng rng(12);
  ParameterSet<double> ps;
  Blstmp<double> enc(ps, "enc", 2, 4, 4, 3, {0, 1}, rng);
  Mat<double> x = random_mat(rng, 9, 3);
  Graph<double> g1(false), g2(false);
  auto o1 = enc.apply(g1, g1.constant(x));
  auto o2 = enc.apply(g2, g2.constant(x));
  CHECK(g1.value(o1).values() == g2.value(o2).values());
}

TEST_CASE("gradients: blstmp with subsampling under 1e-4") {
  Rng rng(13);
  ParameterSet<double> ps;
  Blstmp<double> enc(ps, "enc", 2, 3, 3, 2, {0, 1}, rng);
  Parameter<double>& x = ps.add("x", 5, 2);
  x.value = random_mat(rng, 5, 2);
  auto build = [&](Graph<double>& g) { return mean_all(enc.apply(g, g.parameter(x))); };
  CHECK(grad_check(build, ps) < 1e-4);
}

TEST_CASE("conv block: identity kernel without BN is the identity") {
  Rng rng(14);
  ParameterSet<double> ps;
  ConvBn<double> block(ps, "conv", 3, 3, 3, Activation::none, rng, /*use_bn=*/false);
  block.weight->value.set_zero();
  // center tap (k=1) identity: W[oc, 1*IC+oc] = 1
  for (int o = 0; o < 3; ++o) block.weight->value(o, 3 + o) = 1.0;
  block.bias->value.set_zero();
  Mat<double> x = random_mat(rng, 6, 3);
  Graph<double> g;
  auto y = block.apply(g, g.constant(x), false);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(g.value(y)[i] == doctest::Approx(x[i]).epsilon(1e-12));
}

TEST_CASE("conv block: zero input with ReLU stays zero") {
  Rng rng(15);
  ParameterSet<double> ps;
  ConvBn<double> block(ps, "conv", 4, 2, 5, Activation::relu, rng);
  block.bias->value.set_zero();
  Graph<double> g;
  auto y = block.apply(g, g.constant(Mat<double>(7, 2)), true);
  for (std::size_t i = 0; i < g.value(y).size(); ++i) CHECK(g.value(y)[i] == 0.0);
}

TEST_CASE("conv block: even width rejected") {
  Rng rng(16);
  ParameterSet<double> ps;
  CHECK_THROWS_AS(ConvBn<double>(ps, "conv", 2, 2, 4, Activation::none, rng), InputError);
}

TEST_CASE("gradients: conv + batchnorm block under 1e-4") {
  Rng rng(17);
  ParameterSet<double> ps;
  ConvBn<double> block(ps, "conv", 3, 2, 3, Activation::tanh_fn, rng);
  Parameter<double>& x = ps.add("x", 6, 2);
  x.value = random_mat(rng, 6, 2);
  auto build = [&](Graph<double>& g) { return mean_all(block.apply(g, g.parameter(x), true)); };
  CHECK(grad_check(build, ps) < 1e-4);
}

TEST_CASE("batchnorm: eval uses running statistics") {
  Rng rng(18);
  ParameterSet<double> ps;
  ConvBn<double> block(ps, "conv", 2, 2, 1, Activation::none, rng);
  block.weight->value.set_zero();
  block.weight->value(0, 0) = 1.0;
  block.weight->value(1, 1) = 1.0;
  block.bias->value.set_zero();
  Mat<double> x = random_mat(rng, 50, 2, 2.0);
  for (int i = 0; i < 20; ++i) {
    Graph<double> g;
    block.apply(g, g.constant(x), true);
  }
  Graph<double> g;
  auto y = block.apply(g, g.constant(x), false);
  // running stats converge toward batch stats, so eval output is near-normalized
  double mean0 = 0;
  for (int t = 0; t < 50; ++t) mean0 += g.value(y)(t, 0);
  CHECK(std::abs(mean0 / 50.0) < 0.05);
}

TEST_CASE("masked softmax: masked positions exactly zero, rest sum to one") {
  Rng rng(19);
  Graph<double> g;
  Mat<double> e = random_mat(rng, 8, 1, 3.0);
  Mat<double> mask(8, 1);
  mask.fill(1.0);
  mask(2, 0) = 0.0;
  mask(6, 0) = 0.0;
  auto y = masked_softmax(g.constant(e), mask);
  double total = 0.0;
  for (int i = 0; i < 8; ++i) {
    if (i == 2 || i == 6) {
      CHECK(g.value(y)(i, 0) == 0.0);
    } else {
      CHECK(g.value(y)(i, 0) > 0.0);
    }
    total += g.value(y)(i, 0);
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-9));

  Mat<double> none(8, 1);
  CHECK_THROWS_AS(masked_softmax(g.constant(e), none), InputError);
}

TEST_CASE("softmax shift invariance: +5 on all energies leaves weights unchanged") {
  Rng rng(20);
  Graph<double> g;
  Mat<double> e = random_mat(rng, 10, 1, 2.0);
  Mat<double> e5 = e;
  for (std::size_t i = 0; i < e5.size(); ++i) e5[i] += 5.0;
  auto y1 = softmax(g.constant(e));
  auto y2 = softmax(g.constant(e5));
  for (int i = 0; i < 10; ++i) {
    CHECK(std::abs(g.value(y1)(i, 0) - g.value(y2)(i, 0)) < 1e-6);
  }
}

TEST_CASE("location attention: single state gets weight exactly 1") {
  Rng rng(21);
  ParameterSet<double> ps;
  LocationAttention<double> att(ps, "att", 4, 3, 2, 2, 3, AttentionMode::previous, rng);
  Graph<double> g;
  Mat<double> h = random_mat(rng, 1, 2);
  auto states = g.constant(h);
  auto proj = att.prepare(g, states);
  auto ctx = att.initial_context(g, 1);
  Mat<double> mask(1, 1);
  mask.fill(1.0);
  auto res = att.apply(g, g.constant(random_mat(rng, 3, 1)), states, proj, ctx, mask);
  CHECK(g.value(res.weights)(0, 0) == 1.0);
  for (int i = 0; i < 2; ++i) CHECK(g.value(res.context)(i, 0) == doctest::Approx(h(0, i)).epsilon(1e-12));
}

TEST_CASE("location attention: weights sum to 1 and accumulate across steps") {
  Rng rng(22);
  ParameterSet<double> ps;
  LocationAttention<double> att(ps, "att", 4, 3, 2, 2, 3, AttentionMode::cumulative, rng);
  Graph<double> g;
  auto states = g.constant(random_mat(rng, 6, 2));
  auto proj = att.prepare(g, states);
  auto ctx = att.initial_context(g, 6);
  Mat<double> mask(6, 1);
  mask.fill(1.0);
  for (int step = 1; step <= 4; ++step) {
    auto res = att.apply(g, g.constant(random_mat(rng, 3, 1)), states, proj, ctx, mask);
    ctx = res.ctx;
    double s = 0;
    for (int i = 0; i < 6; ++i) s += g.value(res.weights)(i, 0);
    CHECK(s == doctest::Approx(1.0).epsilon(1e-9));
    double acc = 0;
    for (int i = 0; i < 6; ++i) acc += g.value(ctx.accumulated)(i, 0);
    CHECK(acc == doctest::Approx(static_cast<double>(step)).epsilon(1e-6));
  }
}

TEST_CASE("gradients: location attention (both modes) under 1e-4") {
  for (auto mode : {AttentionMode::previous, AttentionMode::cumulative}) {
    Rng rng(23);
    ParameterSet<double> ps;
    LocationAttention<double> att(ps, "att", 3, 2, 2, 2, 3, mode, rng);
    Parameter<double>& h = ps.add("h", 5, 2);
    h.value = random_mat(rng, 5, 2);
    Parameter<double>& q = ps.add("q", 2, 1);
    q.value = random_mat(rng, 2, 1);
    Mat<double> mask(5, 1);
    mask.fill(1.0);
    auto build = [&](Graph<double>& g) {
      auto states = g.parameter(h);
      auto proj = att.prepare(g, states);
      auto ctx = att.initial_context(g, 5);
      auto r1 = att.apply(g, g.parameter(q), states, proj, ctx, mask);
      auto r2 = att.apply(g, g.parameter(q), states, proj, r1.ctx, mask);
      return mean_all(r2.context);
    };
    CHECK(grad_check(build, ps) < 1e-4);
  }
}

TEST_CASE("dropout: rate 0 and eval mode are identities") {
  Rng rng(24);
  Graph<double> g;
  auto x = g.constant(random_mat(rng, 4, 4));
  auto y0 = nn::dropout(x, 0.0, true, &rng);
  CHECK(y0.id == x.id);
  auto y1 = nn::dropout(x, 0.5, false, &rng);
  CHECK(y1.id == x.id);
}

TEST_CASE("dropout: kept fraction within 3 sigma over 1e5 units") {
  Rng rng(25);
  const double rate = 0.5;
  const int n = 100000;
  Graph<double> g;
  Mat<double> ones(n, 1);
  ones.fill(1.0);
  auto y = nn::dropout(g.constant(std::move(ones)), rate, true, &rng);
  int kept = 0;
  for (int i = 0; i < n; ++i) {
    if (g.value(y)(i, 0) != 0.0) ++kept;
  }
  const double sigma = std::sqrt(n * rate * (1 - rate));
  CHECK(std::abs(kept - n * (1 - rate)) < 3 * sigma);
  // inverted scaling preserves the expectation
  double mean = 0;
  for (int i = 0; i < n; ++i) mean += g.value(y)(i, 0);
  CHECK(mean / n == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("optimizers skip frozen parameters") {
  Rng rng(26);
  ParameterSet<double> ps;
  Parameter<double>& w1 = ps.add("w1", 2, 2);
  w1.value = random_mat(rng, 2, 2);
  Parameter<double>& w2 = ps.add("w2", 2, 2);
  w2.value = random_mat(rng, 2, 2);
  w2.trainable = false;
  Mat<double> before1 = w1.value, before2 = w2.value;
  w1.grad.fill(1.0);
  w2.grad.fill(1.0);
  Adam<double> opt(ps, 1e-2, 1e-8);
  opt.step();
  CHECK(w1.value.values() != before1.values());
  CHECK(w2.value.values() == before2.values());
}

TEST_CASE("gradient clipping bounds the global norm") {
  ParameterSet<double> ps;
  Parameter<double>& w = ps.add("w", 3, 3);
  w.grad.fill(10.0);
  clip_global_norm(ps, 5.0);
  CHECK(global_grad_norm(ps) == doctest::Approx(5.0).epsilon(1e-9));
  // under the limit: untouched
  Parameter<double>& v = ps.add("v", 1, 1);
  w.grad.set_zero();
  v.grad(0, 0) = 0.25;
  clip_global_norm(ps, 5.0);
  CHECK(v.grad(0, 0) == 0.25);
}

TEST_CASE("grad_check rejects non-scalar computations") {
  ParameterSet<double> ps;
  Parameter<double>& w = ps.add("w", 2, 2);
  w.value.fill(0.5);
  auto build = [&](Graph<double>& g) { return g.parameter(w); };
  CHECK_THROWS_AS(grad_check(build, ps), InputError);
}
