// Runtime backend selection. The AVX2 table is linked in only when the
// compiler could build it; it is installed only when the CPU reports support.

#include "ttekit/kernels.hpp"

#include "ttekit/error.hpp"

#if defined(TTEKIT_HAVE_AVX2_KERNELS)
#define TTEKIT_AVX2_LINKED 1
#else
#define TTEKIT_AVX2_LINKED 0
#endif

namespace ttekit::kern {

namespace {

bool cpu_has_avx2() {
#if TTEKIT_AVX2_LINKED && defined(__GNUC__) && (defined(__x86_64__) || defined(__i386__))
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

struct State {
  Backend backend;
  Ops<float> f;
  Ops<double> d;
};

void install(State& s, Backend b) {
  s.backend = b;
#if TTEKIT_AVX2_LINKED
  if (b == Backend::avx2) {
    s.f = detail::avx2_ops<float>();
    s.d = detail::avx2_ops<double>();
    return;
  }
#endif
  s.f = detail::scalar_ops<float>();
  s.d = detail::scalar_ops<double>();
}

State& state() {
  static State s = [] {
    State init;
    install(init, cpu_has_avx2() ? Backend::avx2 : Backend::scalar);
    return init;
  }();
  return s;
}

}  // namespace

Backend preferred_backend() { return cpu_has_avx2() ? Backend::avx2 : Backend::scalar; }

Backend active_backend() { return state().backend; }

void set_backend(Backend b) {
  if (b == Backend::avx2 && !cpu_has_avx2()) {
    throw InputError("kernels: avx2 backend not supported on this CPU/build");
  }
  install(state(), b);
}

const char* backend_name(Backend b) { return b == Backend::avx2 ? "avx2" : "scalar"; }

const Ops<float>& ops_f() { return state().f; }
const Ops<double>& ops_d() { return state().d; }

}  // namespace ttekit::kern
