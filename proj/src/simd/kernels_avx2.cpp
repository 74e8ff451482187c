#include "salt/simd/kernels.hpp"

#if defined(SALT_HAVE_AVX2_BUILD) && defined(__AVX2__)

#include <immintrin.h>

#include <cmath>

namespace salt::simd {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

// [w0, w0, w1, w1] for the two complex entries in one register.
inline __m256d widen_weights(const double* w) {
  return _mm256_permute4x64_pd(_mm256_castpd128_pd256(_mm_loadu_pd(w)), 0x50);
}

double weighted_norm_sq(const double* w, const cplx* a, std::size_t n) {
  const auto* p = reinterpret_cast<const double*>(a);
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m256d x0 = _mm256_loadu_pd(p + 2 * k);
    const __m256d x1 = _mm256_loadu_pd(p + 2 * k + 4);
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(widen_weights(w + k), _mm256_mul_pd(x0, x0)));
    acc1 = _mm256_add_pd(acc1, _mm256_mul_pd(widen_weights(w + k + 2), _mm256_mul_pd(x1, x1)));
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; k < n; ++k) {
    s += w[k] * (a[k].real() * a[k].real() + a[k].imag() * a[k].imag());
  }
  return s;
}

double weighted_dot(const double* w, const cplx* a, const cplx* b, std::size_t n) {
  const auto* pa = reinterpret_cast<const double*>(a);
  const auto* pb = reinterpret_cast<const double*>(b);
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m256d x0 = _mm256_mul_pd(_mm256_loadu_pd(pa + 2 * k), _mm256_loadu_pd(pb + 2 * k));
    const __m256d x1 =
        _mm256_mul_pd(_mm256_loadu_pd(pa + 2 * k + 4), _mm256_loadu_pd(pb + 2 * k + 4));
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(widen_weights(w + k), x0));
    acc1 = _mm256_add_pd(acc1, _mm256_mul_pd(widen_weights(w + k + 2), x1));
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; k < n; ++k) {
    s += w[k] * (a[k].real() * b[k].real() + a[k].imag() * b[k].imag());
  }
  return s;
}

void mul_add(double* out, const double* a, const double* b, std::size_t n) {
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m256d prod = _mm256_mul_pd(_mm256_loadu_pd(a + k), _mm256_loadu_pd(b + k));
    _mm256_storeu_pd(out + k, _mm256_add_pd(_mm256_loadu_pd(out + k), prod));
  }
  for (; k < n; ++k) out[k] += a[k] * b[k];
}

void scale_by(cplx* a, const double* w, std::size_t n) {
  auto* p = reinterpret_cast<double*>(a);
  std::size_t k = 0;
  for (; k + 2 <= n; k += 2) {
    _mm256_storeu_pd(p + 2 * k, _mm256_mul_pd(_mm256_loadu_pd(p + 2 * k), widen_weights(w + k)));
  }
  for (; k < n; ++k) a[k] = cplx(a[k].real() * w[k], a[k].imag() * w[k]);
}

void axpy(cplx* y, double alpha, const cplx* x, std::size_t n) {
  auto* py = reinterpret_cast<double*>(y);
  const auto* px = reinterpret_cast<const double*>(x);
  const __m256d va = _mm256_set1_pd(alpha);
  const std::size_t m = 2 * n;
  std::size_t k = 0;
  for (; k + 4 <= m; k += 4) {
    const __m256d prod = _mm256_mul_pd(va, _mm256_loadu_pd(px + k));
    _mm256_storeu_pd(py + k, _mm256_add_pd(_mm256_loadu_pd(py + k), prod));
  }
  for (; k < m; ++k) py[k] += alpha * px[k];
}

double max_abs(const double* a, std::size_t n) {
  const __m256d sign = _mm256_set1_pd(-0.0);
  __m256d m = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) m = _mm256_max_pd(m, _mm256_andnot_pd(sign, _mm256_loadu_pd(a + k)));
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, m);
  double r = std::fmax(std::fmax(lanes[0], lanes[1]), std::fmax(lanes[2], lanes[3]));
  for (; k < n; ++k) r = std::fmax(r, std::fabs(a[k]));
  return r;
}

const KernelTable kTable{Isa::avx2, weighted_norm_sq, weighted_dot, mul_add,
                         scale_by,  axpy,             max_abs};

}  // namespace

const KernelTable* avx2_kernels() {
  static const bool supported = __builtin_cpu_supports("avx2");
  return supported ? &kTable : nullptr;
}

}  // namespace salt::simd

#else

namespace salt::simd {
const KernelTable* avx2_kernels() { return nullptr; }
}  // namespace salt::simd

#endif
