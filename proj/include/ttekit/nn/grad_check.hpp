#pragma once

// Central finite differences against the tape gradients, at 64-bit.

#include <functional>
#include <span>
#include <vector>

#include "ttekit/nn/modules.hpp"

namespace ttekit::nn {

// Builds the computation from scratch on every evaluation; the result must
// be scalar. Returns max_i |g_ad - g_fd| / max(|g_ad| + |g_fd|, 1e-8) over
// every element of every watched parameter.
inline double grad_check(const std::function<Expr<double>(Graph<double>&)>& build,
                         std::span<Parameter<double>* const> watched, double eps = 1e-5) {
  auto eval = [&]() {
    Graph<double> g;
    Expr<double> out = build(g);
    const Mat<double>& v = g.value(out);
    if (v.rows() != 1 || v.cols() != 1) throw InputError("grad_check: computation must be scalar");
    return v(0, 0);
  };

  // analytic gradients
  for (auto* p : watched) p->grad.set_zero();
  {
    Graph<double> g;
    Expr<double> out = build(g);
    const Mat<double>& v = g.value(out);
    if (v.rows() != 1 || v.cols() != 1) throw InputError("grad_check: computation must be scalar");
    g.backward(out);
  }

  double worst = 0.0;
  for (auto* p : watched) {
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      const double saved = p->value[i];
      p->value[i] = saved + eps;
      const double up = eval();
      p->value[i] = saved - eps;
      const double down = eval();
      p->value[i] = saved;
      const double fd = (up - down) / (2.0 * eps);
      const double ad = p->grad[i];
      const double denom = std::max(std::abs(ad) + std::abs(fd), 1e-8);
      worst = std::max(worst, std::abs(ad - fd) / denom);
    }
  }
  return worst;
}

inline double grad_check(const std::function<Expr<double>(Graph<double>&)>& build,
                         ParameterSet<double>& params, double eps = 1e-5) {
  std::vector<Parameter<double>*> watched;
  for (auto& p : params.all()) {
    if (!p->is_buffer) watched.push_back(p.get());
  }
  return grad_check(build, watched, eps);
}

}  // namespace ttekit::nn
