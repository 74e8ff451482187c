#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <random>
#include <span>
#include <vector>

#include "salt/grid.hpp"

namespace salt {

using cplx = std::complex<double>;

/// Unconstrained vector field on the torus as Fourier coefficients.
///
/// Coefficients use the normalisation f(x) = sum_k f_k e^{i k.x}, so the
/// L2 inner product below is the mean over the box. Storage is
/// component-major: component c occupies [c * size, (c + 1) * size).
class SpectralVector {
 public:
  explicit SpectralVector(GridPtr grid);

  const TorusGrid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  int components() const { return grid_->dim(); }

  std::span<cplx> data() { return coeffs_; }
  std::span<const cplx> data() const { return coeffs_; }
  std::span<cplx> component(int c);
  std::span<const cplx> component(int c) const;
  cplx& at(int c, std::size_t idx) { return coeffs_[static_cast<std::size_t>(c) * grid_->size() + idx]; }
  const cplx& at(int c, std::size_t idx) const {
    return coeffs_[static_cast<std::size_t>(c) * grid_->size() + idx];
  }

  SpectralVector& operator+=(const SpectralVector& other);
  SpectralVector& operator-=(const SpectralVector& other);
  SpectralVector& operator*=(double s);
  SpectralVector& axpy(double alpha, const SpectralVector& x);
  void set_zero();

  /// Throws std::invalid_argument when the grids differ in shape.
  void require_same_grid(const SpectralVector& other) const;

  bool all_finite() const;

 private:
  GridPtr grid_;
  std::vector<cplx> coeffs_;
};

SpectralVector operator+(SpectralVector a, const SpectralVector& b);
SpectralVector operator-(SpectralVector a, const SpectralVector& b);
SpectralVector operator*(double s, SpectralVector a);

/// Per-mode real multiplier that depends on k only through lambda = |k|^2,
/// hence preserves divergence, zero average and conjugate symmetry.
class RadialMultiplier {
 public:
  RadialMultiplier(const TorusGrid& grid, const std::function<double(double)>& of_lambda);
  std::span<const double> values() const { return values_; }

 private:
  std::vector<double> values_;
};

/// Divergence-free, zero-average, conjugate-symmetric field with all content
/// in the dealiased band. Only invariant-preserving operations are exposed;
/// construction goes through leray_project or the checked factory.
class SpectralField {
 public:
  explicit SpectralField(GridPtr grid) : v_(std::move(grid)) {}

  /// Accepts v if it satisfies the invariants to within rel_tol, otherwise
  /// throws std::invalid_argument naming the violated invariant.
  static SpectralField checked(SpectralVector v, double rel_tol = 1e-12);

  const TorusGrid& grid() const { return v_.grid(); }
  const GridPtr& grid_ptr() const { return v_.grid_ptr(); }
  const SpectralVector& vec() const { return v_; }
  operator const SpectralVector&() const { return v_; }  // NOLINT(google-explicit-constructor)
  std::span<const cplx> component(int c) const { return v_.component(c); }

  SpectralField& operator+=(const SpectralField& o) {
    v_ += o.v_;
    return *this;
  }
  SpectralField& operator-=(const SpectralField& o) {
    v_ -= o.v_;
    return *this;
  }
  SpectralField& operator*=(double s) {
    v_ *= s;
    return *this;
  }
  SpectralField& axpy(double alpha, const SpectralField& x) {
    v_.axpy(alpha, x.v_);
    return *this;
  }
  SpectralField& apply(const RadialMultiplier& m);

 private:
  friend SpectralField leray_project(const SpectralVector& f);
  SpectralVector v_;
};

inline SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
inline SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
inline SpectralField operator*(double s, SpectralField a) { return a *= s; }

/// Per-mode (I - k k^T / |k|^2) on retained modes; everything else, the mean
/// included, is zeroed. Idempotent and self-adjoint in the L2 product.
SpectralField leray_project(const SpectralVector& f);

/// max_k |sum_j k_j f_j(k)| / ||f||_0, or 0 for the zero field.
double divergence_residual(const SpectralVector& f);
/// max_k |f(-k) - conj f(k)| / ||f||_0, or 0 for the zero field.
double symmetry_residual(const SpectralVector& f);

/// <A^{m/2} f, A^{m/2} g> = sum_k lambda_k^m Re <f_k, g_k>, m in 0..3.
double sobolev_inner(const SpectralVector& f, const SpectralVector& g, int m);
double sobolev_norm(const SpectralVector& f, int m);

/// Stokes operator A = -P Laplacian: multiplies each mode by lambda_k.
SpectralField stokes_apply(const SpectralField& f);

/// Retained modes ordered by (lambda, lexicographic k), grouped into shells
/// of equal lambda. Galerkin levels always consist of whole shells.
class StokesSpectrum {
 public:
  explicit StokesSpectrum(const TorusGrid& grid);

  std::size_t mode_count() const { return order_.size(); }
  std::span<const std::size_t> ordering() const { return order_; }
  std::span<const double> shell_lambdas() const { return shell_lambda_; }
  /// Number of modes in shells 0..s inclusive.
  std::size_t modes_through_shell(std::size_t s) const { return shell_end_.at(s); }
  /// Number of modes with lambda <= max_lambda.
  std::size_t modes_through_lambda(double max_lambda) const;
  bool is_shell_boundary(std::size_t n) const;
  /// lambda of the n-th mode in the ordering (1-based).
  double lambda_of(std::size_t n) const;
  /// lambda_{n+1}: the smallest eigenvalue excluded from V_n; +inf when n is the mode count.
  double next_lambda(std::size_t n) const;

 private:
  std::vector<std::size_t> order_;
  std::vector<double> sorted_lambda_;
  std::vector<double> shell_lambda_;
  std::vector<std::size_t> shell_end_;
};

/// Orthogonal projection onto V_n (the n lowest modes). n must be a shell
/// boundary and at most the mode count; std::invalid_argument otherwise.
SpectralField galerkin_project(const SpectralField& f, const StokesSpectrum& spectrum, std::size_t n);

/// Keep the modes with lambda <= max_lambda (an infinite cutoff keeps all).
SpectralField truncate_to_lambda(const SpectralField& f, double max_lambda);
RadialMultiplier galerkin_mask(const TorusGrid& grid, double max_lambda);

/// mu_n = sqrt(lambda_{n+1}); +infinity when V_n is the whole space.
double tail_bound_mu(const StokesSpectrum& spectrum, std::size_t n);

/// Shape of a synthetic random field: independent complex Gaussian
/// coefficients on lambda in [min_lambda, max_lambda] with standard
/// deviation proportional to lambda^(-decay_exponent / 2), then projected.
struct RandomFieldSpec {
  double min_lambda = 1.0;
  double max_lambda = std::numeric_limits<double>::infinity();
  double decay_exponent = 0.0;
  /// Rescale to this L2 norm when positive.
  double l2_norm = 1.0;
};

SpectralField random_field(const GridPtr& grid, std::mt19937_64& rng, const RandomFieldSpec& spec = {});
/// Random coefficients without Leray projection (not divergence-free).
SpectralVector random_vector(const GridPtr& grid, std::mt19937_64& rng, const RandomFieldSpec& spec = {});

/// Real field a e^{ik.x} + conj(a) e^{-ik.x}, projected.
SpectralField eigenmode(const GridPtr& grid, const Wavevector& k, const std::array<cplx, 3>& amplitude);

/// u = amp (-cos x sin y, sin x cos y[, 0]): a steady Euler flow whose
/// Navier-Stokes evolution is pure decay at rate 2 nu.
SpectralField taylor_green(const GridPtr& grid, double amplitude = 1.0);

}  // namespace salt
