#pragma once

// Optimizers and gradient clipping. State is kept per parameter in
// registration order; frozen parameters and buffers are skipped.

#include <cmath>
#include <vector>

#include "ttekit/nn/modules.hpp"

namespace ttekit::nn {

template <typename T>
double global_grad_norm(const ParameterSet<T>& params) {
  double sq = 0.0;
  for (const auto& p : params.all()) {
    if (!p->trainable || p->is_buffer) continue;
    for (std::size_t i = 0; i < p->grad.size(); ++i) {
      sq += static_cast<double>(p->grad[i]) * static_cast<double>(p->grad[i]);
    }
  }
  return std::sqrt(sq);
}

template <typename T>
void clip_global_norm(ParameterSet<T>& params, double max_norm) {
  const double norm = global_grad_norm(params);
  if (norm <= max_norm || norm == 0.0) return;
  const T s = static_cast<T>(max_norm / norm);
  for (auto& p : params.all()) {
    if (!p->trainable || p->is_buffer) continue;
    for (std::size_t i = 0; i < p->grad.size(); ++i) p->grad[i] *= s;
  }
}

template <typename T>
class Adadelta {
 public:
  Adadelta(ParameterSet<T>& params, double rho, double eps) : params_(&params), rho_(rho), eps_(eps) {
    for (const auto& p : params.all()) {
      acc_grad_.emplace_back(p->value.rows(), p->value.cols());
      acc_delta_.emplace_back(p->value.rows(), p->value.cols());
    }
  }

  void step(double lr = 1.0) {
    const auto& ps = params_->all();
    for (std::size_t k = 0; k < ps.size(); ++k) {
      auto& p = *ps[k];
      if (!p.trainable || p.is_buffer) continue;
      for (std::size_t i = 0; i < p.value.size(); ++i) {
        const double gval = p.grad[i];
        double ag = rho_ * acc_grad_[k][i] + (1.0 - rho_) * gval * gval;
        acc_grad_[k][i] = ag;
        const double delta = -std::sqrt((acc_delta_[k][i] + eps_) / (ag + eps_)) * gval;
        acc_delta_[k][i] = rho_ * acc_delta_[k][i] + (1.0 - rho_) * delta * delta;
        p.value[i] += static_cast<T>(lr * delta);
      }
    }
  }

  double eps() const { return eps_; }
  void scale_eps(double factor) { eps_ *= factor; }

 private:
  ParameterSet<T>* params_;
  double rho_;
  double eps_;
  std::vector<Mat<double>> acc_grad_, acc_delta_;
};

template <typename T>
class Adam {
 public:
  Adam(ParameterSet<T>& params, double lr, double eps, double beta1 = 0.9, double beta2 = 0.999)
      : params_(&params), lr_(lr), eps_(eps), beta1_(beta1), beta2_(beta2) {
    for (const auto& p : params.all()) {
      m_.emplace_back(p->value.rows(), p->value.cols());
      v_.emplace_back(p->value.rows(), p->value.cols());
    }
  }

  void step() {
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, t_);
    const double bc2 = 1.0 - std::pow(beta2_, t_);
    const auto& ps = params_->all();
    for (std::size_t k = 0; k < ps.size(); ++k) {
      auto& p = *ps[k];
      if (!p.trainable || p.is_buffer) continue;
      for (std::size_t i = 0; i < p.value.size(); ++i) {
        const double gval = p.grad[i];
        m_[k][i] = beta1_ * m_[k][i] + (1.0 - beta1_) * gval;
        v_[k][i] = beta2_ * v_[k][i] + (1.0 - beta2_) * gval * gval;
        const double mhat = m_[k][i] / bc1;
        const double vhat = v_[k][i] / bc2;
        p.value[i] -= static_cast<T>(lr_ * mhat / (std::sqrt(vhat) + eps_));
      }
    }
  }

 private:
  ParameterSet<T>* params_;
  double lr_, eps_, beta1_, beta2_;
  int t_ = 0;
  std::vector<Mat<double>> m_, v_;
};

}  // namespace ttekit::nn
