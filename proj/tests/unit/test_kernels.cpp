#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "ttekit/kernels.hpp"
#include "ttekit/rng.hpp"

using namespace ttekit;

namespace {

template <typename T>
std::vector<T> random_vec(Rng& rng, std::size_t n) {
  std::vector<T> v(n);
  for (auto& x : v) x = static_cast<T>(rng.uniform(-1.0, 1.0));
  return v;
}

template <typename T>
void check_close(const std::vector<T>& a, const std::vector<T>& b, double tol) {
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(std::abs(static_cast<double>(a[i]) - static_cast<double>(b[i])) <=
          tol * (1.0 + std::abs(static_cast<double>(a[i]))));
  }
}

// Sizes chosen to hit the unrolled bodies and every remainder path.
const std::size_t kSizes[] = {0, 1, 3, 4, 7, 8, 9, 15, 16, 17, 31, 64, 257, 1000};

template <typename T>
void equivalence_suite(double tol) {
  if (kern::preferred_backend() != kern::Backend::avx2) {
    MESSAGE("avx2 not available; skipping backend equivalence");
    return;
  }
  Rng rng(42);
  for (std::size_t n : kSizes) {
    auto x = random_vec<T>(rng, n);
    auto y = random_vec<T>(rng, n);

    kern::set_backend(kern::Backend::scalar);
    T dot_s = kern::ops<T>().dot(x.data(), y.data(), n);
    T sum_s = kern::ops<T>().sum(x.data(), n);
    auto axpy_s = y;
    kern::ops<T>().axpy(T(0.37), x.data(), axpy_s.data(), n);
    auto mul_s = y;
    kern::ops<T>().mul_acc(x.data(), y.data(), mul_s.data(), n);

    kern::set_backend(kern::Backend::avx2);
    T dot_v = kern::ops<T>().dot(x.data(), y.data(), n);
    T sum_v = kern::ops<T>().sum(x.data(), n);
    auto axpy_v = y;
    kern::ops<T>().axpy(T(0.37), x.data(), axpy_v.data(), n);
    auto mul_v = y;
    kern::ops<T>().mul_acc(x.data(), y.data(), mul_v.data(), n);

    CHECK(std::abs(double(dot_s) - double(dot_v)) <= tol * (1.0 + std::abs(double(dot_s))));
    CHECK(std::abs(double(sum_s) - double(sum_v)) <= tol * (1.0 + std::abs(double(sum_s))));
    check_close(axpy_s, axpy_v, tol);
    check_close(mul_s, mul_v, tol);
  }

  // matvec / gemm shapes with ragged dims
  const int shapes[][3] = {{1, 1, 1}, {3, 5, 2}, {8, 8, 8}, {13, 17, 9}, {64, 33, 20}};
  for (auto& s : shapes) {
    int m = s[0], k = s[1], n = s[2];
    auto a = random_vec<T>(rng, std::size_t(m) * k);
    auto b = random_vec<T>(rng, std::size_t(k) * n);
    auto bt = random_vec<T>(rng, std::size_t(n) * k);
    auto x = random_vec<T>(rng, k);
    auto xm = random_vec<T>(rng, m);

    std::vector<T> mv_s(m, T(0.5)), mvt_s(k, T(0.5)), nn_s(std::size_t(m) * n, T(0.5)),
        nt_s(std::size_t(m) * n, T(0.5));
    kern::set_backend(kern::Backend::scalar);
    kern::ops<T>().matvec(a.data(), x.data(), mv_s.data(), m, k);
    kern::ops<T>().matvec_t(a.data(), xm.data(), mvt_s.data(), m, k);
    kern::ops<T>().gemm_nn(a.data(), b.data(), nn_s.data(), m, k, n);
    kern::ops<T>().gemm_nt(a.data(), bt.data(), nt_s.data(), m, k, n);

    std::vector<T> mv_v(m, T(0.5)), mvt_v(k, T(0.5)), nn_v(std::size_t(m) * n, T(0.5)),
        nt_v(std::size_t(m) * n, T(0.5));
    kern::set_backend(kern::Backend::avx2);
    kern::ops<T>().matvec(a.data(), x.data(), mv_v.data(), m, k);
    kern::ops<T>().matvec_t(a.data(), xm.data(), mvt_v.data(), m, k);
    kern::ops<T>().gemm_nn(a.data(), b.data(), nn_v.data(), m, k, n);
    kern::ops<T>().gemm_nt(a.data(), bt.data(), nt_v.data(), m, k, n);

    check_close(mv_s, mv_v, tol);
    check_close(mvt_s, mvt_v, tol);
    check_close(nn_s, nn_v, tol);
    check_close(nt_s, nt_v, tol);
  }
  kern::set_backend(kern::preferred_backend());
}

}  // namespace

TEST_CASE("active backend is reported and switchable") {
  auto original = kern::active_backend();
  kern::set_backend(kern::Backend::scalar);
  CHECK(kern::active_backend() == kern::Backend::scalar);
  kern::set_backend(original);
  CHECK(kern::active_backend() == original);
  CHECK(std::string(kern::backend_name(kern::Backend::scalar)) == "scalar");
}

TEST_CASE("scalar kernels match brute-force loops") {
  kern::set_backend(kern::Backend::scalar);
  Rng rng(7);
  int m = 5, n = 9;
  auto a = random_vec<double>(rng, std::size_t(m) * n);
  auto x = random_vec<double>(rng, n);
  std::vector<double> y(m, 0.0);
  kern::ops<double>().matvec(a.data(), x.data(), y.data(), m, n);
  for (int i = 0; i < m; ++i) {
    double want = 0;
    for (int j = 0; j < n; ++j) want += a[std::size_t(i) * n + j] * x[j];
    CHECK(y[i] == doctest::Approx(want).epsilon(1e-12));
  }
  kern::set_backend(kern::preferred_backend());
}

TEST_CASE("avx2 backend matches scalar reference (float)") { equivalence_suite<float>(2e-5); }

TEST_CASE("avx2 backend matches scalar reference (double)") { equivalence_suite<double>(1e-12); }
