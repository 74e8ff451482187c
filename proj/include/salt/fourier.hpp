#pragma once

#include <complex>
#include <memory>
#include <span>

#include "salt/grid.hpp"

namespace salt {

/// Real-to-complex transforms between one spectral component (full FFT
/// layout on the grid) and physical samples on a possibly oversampled grid.
///
/// Not thread-safe: one instance per worker. Plans use FFTW_ESTIMATE so the
/// arithmetic, and hence every output bit, is fixed for a given build.
class FourierTransform {
 public:
  explicit FourierTransform(GridPtr grid, int oversample = 1);
  ~FourierTransform();
  FourierTransform(FourierTransform&&) noexcept;
  FourierTransform& operator=(FourierTransform&&) noexcept;
  FourierTransform(const FourierTransform&) = delete;
  FourierTransform& operator=(const FourierTransform&) = delete;

  const TorusGrid& grid() const;
  int physical_resolution() const;
  std::size_t physical_size() const;

  /// f(x_p) = sum_k spectrum[k] e^{i k.x_p}. Nyquist modes of the source
  /// grid are dropped when oversampling.
  void to_physical(std::span<const std::complex<double>> spectrum, std::span<double> out);

  /// Inverse of to_physical on the unoversampled grid. The output is exactly
  /// conjugate symmetric.
  void to_spectral(std::span<const double> samples, std::span<std::complex<double>> spectrum);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace salt
