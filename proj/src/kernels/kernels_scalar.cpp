// Reference kernels. Plain loops, no intrinsics; the AVX2 backend is checked
// against these.

#include "ttekit/kernels.hpp"

namespace ttekit::kern::detail {

namespace {

template <typename T>
T dot_scalar(const T* x, const T* y, std::size_t n) {
  T acc{0};
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

template <typename T>
void axpy_scalar(T a, const T* x, T* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

template <typename T>
void matvec_scalar(const T* a, const T* x, T* y, int m, int n) {
  for (int i = 0; i < m; ++i) y[i] += dot_scalar(a + static_cast<std::size_t>(i) * n, x, n);
}

template <typename T>
void matvec_t_scalar(const T* a, const T* x, T* y, int m, int n) {
  for (int i = 0; i < m; ++i) axpy_scalar(x[i], a + static_cast<std::size_t>(i) * n, y, n);
}

template <typename T>
void gemm_nn_scalar(const T* a, const T* b, T* c, int m, int k, int n) {
  for (int i = 0; i < m; ++i) {
    const T* ai = a + static_cast<std::size_t>(i) * k;
    T* ci = c + static_cast<std::size_t>(i) * n;
    for (int p = 0; p < k; ++p) axpy_scalar(ai[p], b + static_cast<std::size_t>(p) * n, ci, n);
  }
}

template <typename T>
void gemm_nt_scalar(const T* a, const T* b, T* c, int m, int k, int n) {
  for (int i = 0; i < m; ++i) {
    const T* ai = a + static_cast<std::size_t>(i) * k;
    T* ci = c + static_cast<std::size_t>(i) * n;
    for (int j = 0; j < n; ++j) ci[j] += dot_scalar(ai, b + static_cast<std::size_t>(j) * k, k);
  }
}

template <typename T>
void add_scalar(const T* x, T* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += x[i];
}

template <typename T>
void mul_acc_scalar(const T* a, const T* b, T* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a[i] * b[i];
}

template <typename T>
T sum_scalar(const T* x, std::size_t n) {
  T acc{0};
  for (std::size_t i = 0; i < n; ++i) acc += x[i];
  return acc;
}

}  // namespace

template <typename T>
Ops<T> scalar_ops() {
  Ops<T> o;
  o.dot = dot_scalar<T>;
  o.axpy = axpy_scalar<T>;
  o.matvec = matvec_scalar<T>;
  o.matvec_t = matvec_t_scalar<T>;
  o.gemm_nn = gemm_nn_scalar<T>;
  o.gemm_nt = gemm_nt_scalar<T>;
  o.add = add_scalar<T>;
  o.mul_acc = mul_acc_scalar<T>;
  o.sum = sum_scalar<T>;
  return o;
}

template Ops<float> scalar_ops<float>();
template Ops<double> scalar_ops<double>();

}  // namespace ttekit::kern::detail
