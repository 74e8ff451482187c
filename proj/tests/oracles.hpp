#pragma once

// Test-only reference computations that avoid the FFT path entirely.

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "salt/field.hpp"

namespace oracle {

/// f^c at grid point p by direct summation of sum_k f_k e^{i k.x}.
inline std::vector<double> synthesize_component(const salt::SpectralVector& f, int c) {
  const auto& g = f.grid();
  const int d = g.dim();
  const int n = g.resolution();
  std::vector<double> out(g.size(), 0.0);
  std::vector<std::size_t> active;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (f.at(c, i) != std::complex<double>{}) active.push_back(i);
  }
  for (std::size_t p = 0; p < g.size(); ++p) {
    std::size_t rest = p;
    double x[3] = {0, 0, 0};
    for (int a = d - 1; a >= 0; --a) {
      x[a] = 2.0 * std::numbers::pi * static_cast<double>(rest % n) / n;
      rest /= n;
    }
    double s = 0.0;
    for (std::size_t i : active) {
      double phase = 0.0;
      for (int a = 0; a < d; ++a) phase += g.wavenumber(i, a) * x[a];
      s += (f.at(c, i) * std::complex<double>(std::cos(phase), std::sin(phase))).real();
    }
    out[p] = s;
  }
  return out;
}

inline double mean_square(const salt::SpectralVector& f) {
  double s = 0.0;
  for (int c = 0; c < f.components(); ++c) {
    for (double v : synthesize_component(f, c)) s += v * v;
  }
  return s / static_cast<double>(f.grid().size());
}

/// Grid point coordinates of linear index p.
inline std::array<double, 3> point(const salt::TorusGrid& g, std::size_t p) {
  std::array<double, 3> x{0, 0, 0};
  const int n = g.resolution();
  for (int a = g.dim() - 1; a >= 0; --a) {
    x[a] = 2.0 * std::numbers::pi * static_cast<double>(p % n) / n;
    p /= n;
  }
  return x;
}

}  // namespace oracle

namespace oracle {

/// d_axis f^c at grid points by direct summation of i k_axis f_k e^{ik.x}.
inline std::vector<double> synthesize_derivative(const salt::SpectralVector& f, int c, int axis) {
  salt::SpectralVector df(f.grid_ptr());
  const auto& g = f.grid();
  for (std::size_t i = 0; i < g.size(); ++i) {
    df.at(c, i) = std::complex<double>(0, g.wavenumber(i, axis)) * f.at(c, i);
  }
  return synthesize_component(df, c);
}

/// Copy coefficients of f onto another grid by wavevector; modes that do not
/// exist on the target are dropped.
inline salt::SpectralVector embed(const salt::SpectralVector& f, const salt::GridPtr& target) {
  salt::SpectralVector out(target);
  const auto& g = f.grid();
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto k = g.wavevector(i);
    bool fits = true;
    for (int a = 0; a < g.dim(); ++a) fits = fits && 2 * std::abs(k[a]) < target->resolution();
    if (!fits) continue;
    const std::size_t j = target->index_of(k);
    for (int c = 0; c < f.components(); ++c) out.at(c, j) = f.at(c, i);
  }
  return out;
}

}  // namespace oracle
