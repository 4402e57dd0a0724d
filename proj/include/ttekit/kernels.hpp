#pragma once

// Arithmetic inner loops behind the nn graph. Scalar reference kernels plus
// AVX2 variants selected at runtime; the two backends are equivalence-tested
// against each other. Transcendentals stay scalar (std::tanh etc.) so both
// backends agree to rounding order only.

#include <cstddef>

namespace ttekit::kern {

enum class Backend { scalar, avx2 };

// Best backend the running CPU supports.
Backend preferred_backend();
Backend active_backend();
// Throws InputError if the requested backend is not supported here.
void set_backend(Backend b);
const char* backend_name(Backend b);

template <typename T>
struct Ops {
  T (*dot)(const T* x, const T* y, std::size_t n);
  void (*axpy)(T a, const T* x, T* y, std::size_t n);               // y += a*x
  void (*matvec)(const T* a, const T* x, T* y, int m, int n);       // y(m) += A(mxn) x
  void (*matvec_t)(const T* a, const T* x, T* y, int m, int n);     // y(n) += A(mxn)^T x
  void (*gemm_nn)(const T* a, const T* b, T* c, int m, int k, int n);  // C += A(mxk) B(kxn)
  void (*gemm_nt)(const T* a, const T* b, T* c, int m, int k, int n);  // C += A(mxk) B(nxk)^T
  void (*add)(const T* x, T* y, std::size_t n);                     // y += x
  void (*mul_acc)(const T* a, const T* b, T* y, std::size_t n);     // y += a.*b
  T (*sum)(const T* x, std::size_t n);
};

const Ops<float>& ops_f();
const Ops<double>& ops_d();

template <typename T>
const Ops<T>& ops();
template <>
inline const Ops<float>& ops<float>() {
  return ops_f();
}
template <>
inline const Ops<double>& ops<double>() {
  return ops_d();
}

namespace detail {
// Backend tables, defined per translation unit.
template <typename T>
Ops<T> scalar_ops();
template <typename T>
Ops<T> avx2_ops();  // defined only when compiled in; see kernels.cpp
}  // namespace detail

}  // namespace ttekit::kern
