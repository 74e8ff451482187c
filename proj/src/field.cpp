#include "salt/field.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "salt/simd/kernels.hpp"

namespace salt {

SpectralVector::SpectralVector(GridPtr grid) : grid_(std::move(grid)) {
  if (!grid_) throw std::invalid_argument("null grid");
  coeffs_.assign(static_cast<std::size_t>(grid_->dim()) * grid_->size(), cplx{});
}

std::span<cplx> SpectralVector::component(int c) {
  return std::span<cplx>(coeffs_).subspan(static_cast<std::size_t>(c) * grid_->size(), grid_->size());
}

std::span<const cplx> SpectralVector::component(int c) const {
  return std::span<const cplx>(coeffs_).subspan(static_cast<std::size_t>(c) * grid_->size(),
                                                grid_->size());
}

void SpectralVector::require_same_grid(const SpectralVector& other) const {
  if (!grid_->same_shape(other.grid())) {
    throw std::invalid_argument("spectral fields live on different grids");
  }
}

SpectralVector& SpectralVector::operator+=(const SpectralVector& other) {
  return axpy(1.0, other);
}

SpectralVector& SpectralVector::operator-=(const SpectralVector& other) {
  return axpy(-1.0, other);
}

SpectralVector& SpectralVector::operator*=(double s) {
  for (auto& c : coeffs_) c *= s;
  return *this;
}

SpectralVector& SpectralVector::axpy(double alpha, const SpectralVector& x) {
  require_same_grid(x);
  simd::axpy(coeffs_, alpha, x.coeffs_);
  return *this;
}

void SpectralVector::set_zero() { std::fill(coeffs_.begin(), coeffs_.end(), cplx{}); }

bool SpectralVector::all_finite() const {
  return std::all_of(coeffs_.begin(), coeffs_.end(),
                     [](const cplx& c) { return std::isfinite(c.real()) && std::isfinite(c.imag()); });
}

SpectralVector operator+(SpectralVector a, const SpectralVector& b) { return a += b; }
SpectralVector operator-(SpectralVector a, const SpectralVector& b) { return a -= b; }
SpectralVector operator*(double s, SpectralVector a) { return a *= s; }

RadialMultiplier::RadialMultiplier(const TorusGrid& grid,
                                   const std::function<double(double)>& of_lambda) {
  values_.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) values_[i] = of_lambda(grid.lambda(i));
}

SpectralField& SpectralField::apply(const RadialMultiplier& m) {
  for (int c = 0; c < v_.components(); ++c) simd::scale_by(v_.component(c), m.values());
  return *this;
}

SpectralField SpectralField::checked(SpectralVector v, double rel_tol) {
  const TorusGrid& g = v.grid();
  for (int c = 0; c < v.components(); ++c) {
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (!g.retained(i) && v.at(c, i) != cplx{}) {
        throw std::invalid_argument(i == 0 ? "field has a nonzero mean"
                                           : "field has content outside the dealiased band");
      }
    }
  }
  if (divergence_residual(v) > rel_tol) throw std::invalid_argument("field is not divergence-free");
  if (symmetry_residual(v) > rel_tol) throw std::invalid_argument("field is not real (conjugate symmetry)");
  SpectralField out(v.grid_ptr());
  out.v_ = std::move(v);
  return out;
}

SpectralField leray_project(const SpectralVector& f) {
  const TorusGrid& g = f.grid();
  const int d = g.dim();
  SpectralField out(f.grid_ptr());
  SpectralVector& o = out.v_;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!g.retained(i)) continue;
    cplx kv{};
    for (int j = 0; j < d; ++j) kv += static_cast<double>(g.wavenumber(i, j)) * f.at(j, i);
    const cplx s = kv / g.lambda(i);
    for (int j = 0; j < d; ++j) o.at(j, i) = f.at(j, i) - static_cast<double>(g.wavenumber(i, j)) * s;
  }
  return out;
}

double divergence_residual(const SpectralVector& f) {
  const double norm = sobolev_norm(f, 0);
  if (norm == 0.0) return 0.0;
  const TorusGrid& g = f.grid();
  double worst = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    cplx kv{};
    for (int j = 0; j < g.dim(); ++j) kv += static_cast<double>(g.wavenumber(i, j)) * f.at(j, i);
    worst = std::max(worst, std::abs(kv));
  }
  return worst / norm;
}

double symmetry_residual(const SpectralVector& f) {
  const double norm = sobolev_norm(f, 0);
  if (norm == 0.0) return 0.0;
  const TorusGrid& g = f.grid();
  double worst = 0.0;
  for (int c = 0; c < f.components(); ++c) {
    for (std::size_t i = 0; i < g.size(); ++i) {
      worst = std::max(worst, std::abs(f.at(c, g.mirror(i)) - std::conj(f.at(c, i))));
    }
  }
  return worst / norm;
}

double sobolev_inner(const SpectralVector& f, const SpectralVector& g, int m) {
  f.require_same_grid(g);
  if (m < 0 || m > 3) throw std::invalid_argument("Sobolev index must be in 0..3");
  const auto w = f.grid().sobolev_weights(m);
  double s = 0.0;
  for (int c = 0; c < f.components(); ++c) s += simd::weighted_dot(w, f.component(c), g.component(c));
  return s;
}

double sobolev_norm(const SpectralVector& f, int m) {
  if (m < 0 || m > 3) throw std::invalid_argument("Sobolev index must be in 0..3");
  const auto w = f.grid().sobolev_weights(m);
  double s = 0.0;
  for (int c = 0; c < f.components(); ++c) s += simd::weighted_norm_sq(w, f.component(c));
  return std::sqrt(s);
}

SpectralField stokes_apply(const SpectralField& f) {
  SpectralField out = f;
  out.apply(RadialMultiplier(f.grid(), [](double lam) { return lam; }));
  return out;
}

StokesSpectrum::StokesSpectrum(const TorusGrid& grid) {
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid.retained(i)) order_.push_back(i);
  }
  std::sort(order_.begin(), order_.end(), [&grid](std::size_t a, std::size_t b) {
    if (grid.lambda(a) != grid.lambda(b)) return grid.lambda(a) < grid.lambda(b);
    return grid.wavevector(a) < grid.wavevector(b);
  });
  sorted_lambda_.reserve(order_.size());
  for (std::size_t i : order_) sorted_lambda_.push_back(grid.lambda(i));
  for (std::size_t n = 0; n < sorted_lambda_.size(); ++n) {
    if (n + 1 == sorted_lambda_.size() || sorted_lambda_[n + 1] != sorted_lambda_[n]) {
      shell_lambda_.push_back(sorted_lambda_[n]);
      shell_end_.push_back(n + 1);
    }
  }
}

std::size_t StokesSpectrum::modes_through_lambda(double max_lambda) const {
  return static_cast<std::size_t>(
      std::upper_bound(sorted_lambda_.begin(), sorted_lambda_.end(), max_lambda) - sorted_lambda_.begin());
}

bool StokesSpectrum::is_shell_boundary(std::size_t n) const {
  return n == 0 || std::binary_search(shell_end_.begin(), shell_end_.end(), n);
}

double StokesSpectrum::lambda_of(std::size_t n) const {
  if (n == 0 || n > sorted_lambda_.size()) throw std::out_of_range("mode index out of range");
  return sorted_lambda_[n - 1];
}

double StokesSpectrum::next_lambda(std::size_t n) const {
  if (n > sorted_lambda_.size()) throw std::out_of_range("mode index out of range");
  if (n == sorted_lambda_.size()) return std::numeric_limits<double>::infinity();
  return sorted_lambda_[n];
}

RadialMultiplier galerkin_mask(const TorusGrid& grid, double max_lambda) {
  return RadialMultiplier(grid, [max_lambda](double lam) { return lam <= max_lambda ? 1.0 : 0.0; });
}

SpectralField truncate_to_lambda(const SpectralField& f, double max_lambda) {
  SpectralField out = f;
  out.apply(galerkin_mask(f.grid(), max_lambda));
  return out;
}

SpectralField galerkin_project(const SpectralField& f, const StokesSpectrum& spectrum, std::size_t n) {
  if (n > spectrum.mode_count()) {
    throw std::invalid_argument("Galerkin level " + std::to_string(n) + " exceeds the " +
                                std::to_string(spectrum.mode_count()) + " retained modes");
  }
  if (!spectrum.is_shell_boundary(n)) {
    throw std::invalid_argument("Galerkin level " + std::to_string(n) + " splits an eigenvalue shell");
  }
  if (n == 0) return SpectralField(f.grid_ptr());
  return truncate_to_lambda(f, spectrum.lambda_of(n));
}

double tail_bound_mu(const StokesSpectrum& spectrum, std::size_t n) {
  return std::sqrt(spectrum.next_lambda(n));
}

SpectralVector random_vector(const GridPtr& grid, std::mt19937_64& rng, const RandomFieldSpec& spec) {
  SpectralVector v(grid);
  std::normal_distribution<double> normal(0.0, 1.0);
  const TorusGrid& g = *grid;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const std::size_t m = g.mirror(i);
    if (!g.retained(i) || m <= i) continue;
    const double lam = g.lambda(i);
    if (lam < spec.min_lambda || lam > spec.max_lambda) continue;
    const double sd = std::pow(lam, -0.5 * spec.decay_exponent);
    for (int c = 0; c < g.dim(); ++c) {
      const double re = normal(rng);
      const double im = normal(rng);
      v.at(c, i) = sd * cplx(re, im);
      v.at(c, m) = std::conj(v.at(c, i));
    }
  }
  if (spec.l2_norm > 0.0) {
    const double norm = sobolev_norm(v, 0);
    if (norm > 0.0) v *= spec.l2_norm / norm;
  }
  return v;
}

SpectralField random_field(const GridPtr& grid, std::mt19937_64& rng, const RandomFieldSpec& spec) {
  RandomFieldSpec raw = spec;
  raw.l2_norm = 0.0;
  SpectralField f = leray_project(random_vector(grid, rng, raw));
  if (spec.l2_norm > 0.0) {
    const double norm = sobolev_norm(f, 0);
    if (norm > 0.0) f *= spec.l2_norm / norm;
  }
  return f;
}

SpectralField eigenmode(const GridPtr& grid, const Wavevector& k, const std::array<cplx, 3>& amplitude) {
  const std::size_t i = grid->index_of(k);
  if (!grid->retained(i)) throw std::invalid_argument("eigenmode wavevector is zero or outside the band");
  SpectralVector v(grid);
  for (int c = 0; c < grid->dim(); ++c) {
    v.at(c, i) = amplitude[c];
    v.at(c, grid->mirror(i)) = std::conj(amplitude[c]);
  }
  return leray_project(v);
}

SpectralField taylor_green(const GridPtr& grid, double amplitude) {
  SpectralVector v(grid);
  const cplx I(0.0, 1.0);
  for (int kx : {-1, 1}) {
    for (int ky : {-1, 1}) {
      const std::size_t i = grid->index_of({kx, ky, 0});
      v.at(0, i) = amplitude * I * static_cast<double>(ky) / 4.0;
      v.at(1, i) = -amplitude * I * static_cast<double>(kx) / 4.0;
    }
  }
  return SpectralField::checked(std::move(v));
}

}  // namespace salt
