#include "salt/fourier.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cstring>
#include <mutex>
#include <stdexcept>
#include <utility>
#include <vector>

namespace salt {

namespace {

// FFTW's planner is not re-entrant; execution with per-instance buffers is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

struct FourierTransform::Impl {
  GridPtr grid;
  int oversample = 1;
  int m = 0;
  std::size_t real_size = 0;
  std::size_t half_size = 0;
  double* real = nullptr;
  fftw_complex* half = nullptr;
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
  // (source full index, destination half index) for to_physical
  std::vector<std::pair<std::size_t, std::size_t>> embed;
  // (full index, half index) for entries read straight from the r2c output
  std::vector<std::pair<std::size_t, std::size_t>> direct;
  // full indices rebuilt as conj(mirror) after the r2c output is copied
  std::vector<std::size_t> mirrored;
  std::vector<std::size_t> self_mirror;

  ~Impl() {
    std::lock_guard lock(planner_mutex());
    if (forward) fftw_destroy_plan(forward);
    if (backward) fftw_destroy_plan(backward);
    fftw_free(real);
    fftw_free(half);
  }
};

FourierTransform::FourierTransform(GridPtr grid, int oversample) : impl_(std::make_unique<Impl>()) {
  if (oversample < 1) throw std::invalid_argument("oversample factor must be >= 1");
  Impl& s = *impl_;
  s.grid = std::move(grid);
  s.oversample = oversample;
  const TorusGrid& g = *s.grid;
  const int d = g.dim();
  const int n = g.resolution();
  s.m = n * oversample;
  const std::size_t m = static_cast<std::size_t>(s.m);
  const std::size_t mh = m / 2 + 1;
  s.real_size = 1;
  for (int a = 0; a < d; ++a) s.real_size *= m;
  s.half_size = s.real_size / m * mh;

  {
    std::lock_guard lock(planner_mutex());
    s.real = fftw_alloc_real(s.real_size);
    s.half = fftw_alloc_complex(s.half_size);
    std::vector<int> dims(static_cast<std::size_t>(d), s.m);
    s.forward = fftw_plan_dft_r2c(d, dims.data(), s.real, s.half, FFTW_ESTIMATE);
    s.backward = fftw_plan_dft_c2r(d, dims.data(), s.half, s.real, FFTW_ESTIMATE);
  }
  if (!s.forward || !s.backward) throw std::runtime_error("FFTW planning failed");

  for (std::size_t idx = 0; idx < g.size(); ++idx) {
    if (oversample > 1 && g.is_nyquist(idx)) continue;
    const int klast = g.wavenumber(idx, d - 1);
    const bool last_nyquist = 2 * klast == -n;
    if (klast < 0 && !(oversample == 1 && last_nyquist)) continue;
    std::size_t dst = 0;
    for (int a = 0; a < d - 1; ++a) {
      dst = dst * m + static_cast<std::size_t>((g.wavenumber(idx, a) + s.m) % s.m);
    }
    const std::size_t last = last_nyquist ? static_cast<std::size_t>(n / 2) : static_cast<std::size_t>(klast);
    s.embed.emplace_back(idx, dst * mh + last);
  }

  if (oversample == 1) {
    const std::size_t nn = static_cast<std::size_t>(n);
    for (std::size_t idx = 0; idx < g.size(); ++idx) {
      const std::size_t ilast = idx % nn;
      if (ilast <= nn / 2) {
        s.direct.emplace_back(idx, (idx / nn) * mh + ilast);
        if (ilast == 0 || ilast == nn / 2) {
          const std::size_t mir = g.mirror(idx);
          if (mir < idx) s.mirrored.push_back(idx);
          if (mir == idx) s.self_mirror.push_back(idx);
        }
      } else {
        s.mirrored.push_back(idx);
      }
    }
  }
}

FourierTransform::~FourierTransform() = default;
FourierTransform::FourierTransform(FourierTransform&&) noexcept = default;
FourierTransform& FourierTransform::operator=(FourierTransform&&) noexcept = default;

const TorusGrid& FourierTransform::grid() const { return *impl_->grid; }
int FourierTransform::physical_resolution() const { return impl_->m; }
std::size_t FourierTransform::physical_size() const { return impl_->real_size; }

void FourierTransform::to_physical(std::span<const std::complex<double>> spectrum, std::span<double> out) {
  Impl& s = *impl_;
  if (spectrum.size() != s.grid->size() || out.size() != s.real_size) {
    throw std::invalid_argument("to_physical: buffer size mismatch");
  }
  std::memset(s.half, 0, sizeof(fftw_complex) * s.half_size);
  for (const auto& [src, dst] : s.embed) {
    s.half[dst][0] = spectrum[src].real();
    s.half[dst][1] = spectrum[src].imag();
  }
  fftw_execute(s.backward);
  std::copy(s.real, s.real + s.real_size, out.begin());
}

void FourierTransform::to_spectral(std::span<const double> samples, std::span<std::complex<double>> spectrum) {
  Impl& s = *impl_;
  if (s.oversample != 1) throw std::logic_error("to_spectral requires an unoversampled transform");
  if (spectrum.size() != s.grid->size() || samples.size() != s.real_size) {
    throw std::invalid_argument("to_spectral: buffer size mismatch");
  }
  std::copy(samples.begin(), samples.end(), s.real);
  fftw_execute(s.forward);
  const double scale = 1.0 / static_cast<double>(s.real_size);
  for (const auto& [full, h] : s.direct) {
    spectrum[full] = std::complex<double>(s.half[h][0] * scale, s.half[h][1] * scale);
  }
  const TorusGrid& g = *s.grid;
  for (std::size_t idx : s.mirrored) spectrum[idx] = std::conj(spectrum[g.mirror(idx)]);
  for (std::size_t idx : s.self_mirror) spectrum[idx] = std::complex<double>(spectrum[idx].real(), 0.0);
}

}  // namespace salt
