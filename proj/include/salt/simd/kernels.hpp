#pragma once

// Data-parallel inner loops shared by the spectral code. Every kernel has a
// scalar reference version and, on x86-64, an AVX2 version; the active table
// is chosen once at startup from CPUID and can be forced to the scalar path
// with SALT_SIMD=scalar in the environment.
//
// Elementwise kernels produce bit-identical results in both variants. The
// reductions differ only in summation order.

#include <complex>
#include <span>
#include <string_view>

namespace salt::simd {

using cplx = std::complex<double>;

enum class Isa { scalar, avx2 };

struct KernelTable {
  Isa isa;
  // sum_k w[k] * |a[k]|^2
  double (*weighted_norm_sq)(const double* w, const cplx* a, std::size_t n);
  // sum_k w[k] * Re(conj(a[k]) * b[k])
  double (*weighted_dot)(const double* w, const cplx* a, const cplx* b, std::size_t n);
  // out[k] += a[k] * b[k]
  void (*mul_add)(double* out, const double* a, const double* b, std::size_t n);
  // a[k] *= w[k]
  void (*scale_by)(cplx* a, const double* w, std::size_t n);
  // y[k] += alpha * x[k]
  void (*axpy)(cplx* y, double alpha, const cplx* x, std::size_t n);
  // max_k |a[k]|
  double (*max_abs)(const double* a, std::size_t n);
};

const KernelTable& scalar_kernels();
// Null when the binary was built without AVX2 support or the CPU lacks it.
const KernelTable* avx2_kernels();

const KernelTable& active();
std::string_view isa_name(Isa isa);

inline double weighted_norm_sq(std::span<const double> w, std::span<const cplx> a) {
  return active().weighted_norm_sq(w.data(), a.data(), a.size());
}
inline double weighted_dot(std::span<const double> w, std::span<const cplx> a,
                           std::span<const cplx> b) {
  return active().weighted_dot(w.data(), a.data(), b.data(), a.size());
}
inline void mul_add(std::span<double> out, std::span<const double> a, std::span<const double> b) {
  active().mul_add(out.data(), a.data(), b.data(), out.size());
}
inline void scale_by(std::span<cplx> a, std::span<const double> w) {
  active().scale_by(a.data(), w.data(), a.size());
}
inline void axpy(std::span<cplx> y, double alpha, std::span<const cplx> x) {
  active().axpy(y.data(), alpha, x.data(), y.size());
}
inline double max_abs(std::span<const double> a) { return active().max_abs(a.data(), a.size()); }

}  // namespace salt::simd
