#include "salt/simd/kernels.hpp"

#include <cmath>

namespace salt::simd {
namespace {

double weighted_norm_sq(const double* w, const cplx* a, std::size_t n) {
  double s = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double re = a[k].real();
    const double im = a[k].imag();
    s += w[k] * (re * re + im * im);
  }
  return s;
}

double weighted_dot(const double* w, const cplx* a, const cplx* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    s += w[k] * (a[k].real() * b[k].real() + a[k].imag() * b[k].imag());
  }
  return s;
}

void mul_add(double* out, const double* a, const double* b, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) out[k] += a[k] * b[k];
}

void scale_by(cplx* a, const double* w, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) a[k] = cplx(a[k].real() * w[k], a[k].imag() * w[k]);
}

void axpy(cplx* y, double alpha, const cplx* x, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) {
    y[k] = cplx(y[k].real() + alpha * x[k].real(), y[k].imag() + alpha * x[k].imag());
  }
}

double max_abs(const double* a, std::size_t n) {
  double m = 0.0;
  for (std::size_t k = 0; k < n; ++k) m = std::fmax(m, std::fabs(a[k]));
  return m;
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{Isa::scalar, weighted_norm_sq, weighted_dot, mul_add,
                                 scale_by,    axpy,             max_abs};
  return table;
}

}  // namespace salt::simd
