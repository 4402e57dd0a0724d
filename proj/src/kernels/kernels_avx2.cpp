// AVX2/FMA kernels. This translation unit is compiled with -mavx2 -mfma; the
// dispatcher only installs it after a runtime CPU check.

#include "ttekit/kernels.hpp"

#if defined(__AVX2__) && defined(__FMA__)

#include <immintrin.h>

namespace ttekit::kern::detail {

namespace {

inline float hsum(__m256 v) {
  __m128 lo = _mm256_castps256_ps128(v);
  __m128 hi = _mm256_extractf128_ps(v, 1);
  lo = _mm_add_ps(lo, hi);
  lo = _mm_add_ps(lo, _mm_movehl_ps(lo, lo));
  lo = _mm_add_ss(lo, _mm_shuffle_ps(lo, lo, 1));
  return _mm_cvtss_f32(lo);
}

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

float dot_avx2(const float* x, const float* y, std::size_t n) {
  __m256 acc0 = _mm256_setzero_ps();
  __m256 acc1 = _mm256_setzero_ps();
  std::size_t i = 0;
  for (; i + 16 <= n; i += 16) {
    acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i), acc0);
    acc1 = _mm256_fmadd_ps(_mm256_loadu_ps(x + i + 8), _mm256_loadu_ps(y + i + 8), acc1);
  }
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i), acc0);
  }
  float acc = hsum(_mm256_add_ps(acc0, acc1));
  for (; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

double dot_avx2(const double* x, const double* y, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

void axpy_avx2(float a, const float* x, float* y, std::size_t n) {
  __m256 va = _mm256_set1_ps(a);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    _mm256_storeu_ps(y + i, _mm256_fmadd_ps(va, _mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i)));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
  __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

template <typename T>
void matvec_avx2(const T* a, const T* x, T* y, int m, int n) {
  for (int i = 0; i < m; ++i) y[i] += dot_avx2(a + static_cast<std::size_t>(i) * n, x, n);
}

template <typename T>
void matvec_t_avx2(const T* a, const T* x, T* y, int m, int n) {
  for (int i = 0; i < m; ++i) axpy_avx2(x[i], a + static_cast<std::size_t>(i) * n, y, n);
}

template <typename T>
void gemm_nn_avx2(const T* a, const T* b, T* c, int m, int k, int n) {
  for (int i = 0; i < m; ++i) {
    const T* ai = a + static_cast<std::size_t>(i) * k;
    T* ci = c + static_cast<std::size_t>(i) * n;
    for (int p = 0; p < k; ++p) axpy_avx2(ai[p], b + static_cast<std::size_t>(p) * n, ci, n);
  }
}

template <typename T>
void gemm_nt_avx2(const T* a, const T* b, T* c, int m, int k, int n) {
  for (int i = 0; i < m; ++i) {
    const T* ai = a + static_cast<std::size_t>(i) * k;
    T* ci = c + static_cast<std::size_t>(i) * n;
    for (int j = 0; j < n; ++j) ci[j] += dot_avx2(ai, b + static_cast<std::size_t>(j) * k, k);
  }
}

void add_avx2(const float* x, float* y, std::size_t n) {
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    _mm256_storeu_ps(y + i, _mm256_add_ps(_mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i)));
  }
  for (; i < n; ++i) y[i] += x[i];
}

void add_avx2(const double* x, double* y, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += x[i];
}

void mul_acc_avx2(const float* a, const float* b, float* y, std::size_t n) {
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    _mm256_storeu_ps(y + i, _mm256_fmadd_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i), _mm256_loadu_ps(y + i)));
  }
  for (; i < n; ++i) y[i] += a[i] * b[i];
}

void mul_acc_avx2(const double* a, const double* b, double* y, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += a[i] * b[i];
}

float sum_avx2(const float* x, std::size_t n) {
  __m256 acc = _mm256_setzero_ps();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) acc = _mm256_add_ps(acc, _mm256_loadu_ps(x + i));
  float s = hsum(acc);
  for (; i < n; ++i) s += x[i];
  return s;
}

double sum_avx2(const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
  double s = hsum(acc);
  for (; i < n; ++i) s += x[i];
  return s;
}

}  // namespace

template <typename T>
Ops<T> avx2_ops() {
  Ops<T> o;
  o.dot = [](const T* x, const T* y, std::size_t n) { return dot_avx2(x, y, n); };
  o.axpy = [](T a, const T* x, T* y, std::size_t n) { axpy_avx2(a, x, y, n); };
  o.matvec = matvec_avx2<T>;
  o.matvec_t = matvec_t_avx2<T>;
  o.gemm_nn = gemm_nn_avx2<T>;
  o.gemm_nt = gemm_nt_avx2<T>;
  o.add = [](const T* x, T* y, std::size_t n) { add_avx2(x, y, n); };
  o.mul_acc = [](const T* a, const T* b, T* y, std::size_t n) { mul_acc_avx2(a, b, y, n); };
  o.sum = [](const T* x, std::size_t n) { return sum_avx2(x, n); };
  return o;
}

template Ops<float> avx2_ops<float>();
template Ops<double> avx2_ops<double>();

}  // namespace ttekit::kern::detail

#endif  // __AVX2__ && __FMA__
