#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace salt {

inline constexpr double kTwoThirdsRule = 2.0 / 3.0;

using Wavevector = std::array<int, 3>;

/// Periodic box [0, 2pi)^dim sampled on resolution^dim points.
///
/// Spectral arrays are stored in full (not half-complex) FFT order: linear
/// index (i0 * n + i1) * n + i2 with axis 0 slowest, and wavenumber i for
/// i < n/2, i - n otherwise. A mode is "in band" when every |k_j| is at most
/// the dealiasing cutoff, and "retained" when it is in band and k != 0.
/// Stokes eigenvalues are lambda_k = |k|^2.
class TorusGrid {
 public:
  TorusGrid(int dim, int resolution, double dealias);

  int dim() const { return dim_; }
  int resolution() const { return n_; }
  int cutoff() const { return cutoff_; }
  double dealias() const { return dealias_; }
  std::size_t size() const { return size_; }

  int wavenumber(std::size_t idx, int axis) const { return kint_[axis][idx]; }
  Wavevector wavevector(std::size_t idx) const;
  double lambda(std::size_t idx) const { return lambda_[idx]; }
  bool in_band(std::size_t idx) const { return band_[idx] != 0.0; }
  bool retained(std::size_t idx) const { return retained_[idx] != 0.0; }
  bool is_nyquist(std::size_t idx) const;
  std::size_t mirror(std::size_t idx) const { return mirror_[idx]; }

  /// Linear index of k; every |k_j| must be below resolution/2.
  std::size_t index_of(const Wavevector& k) const;

  /// k_axis as doubles, zero on the Nyquist plane (spectral derivative convention).
  std::span<const double> derivative_symbol(int axis) const { return kderiv_[axis]; }
  std::span<const double> lambdas() const { return lambda_; }
  /// lambda^m on k != 0; the k = 0 entry is 1 for m = 0 and 0 otherwise.
  std::span<const double> sobolev_weights(int m) const { return weights_.at(static_cast<std::size_t>(m)); }
  std::span<const double> band_mask() const { return band_; }
  std::span<const double> retained_mask() const { return retained_; }

  std::size_t retained_count() const { return retained_count_; }

  bool same_shape(const TorusGrid& other) const {
    return dim_ == other.dim_ && n_ == other.n_ && cutoff_ == other.cutoff_;
  }

 private:
  int dim_;
  int n_;
  int cutoff_;
  double dealias_;
  std::size_t size_;
  std::size_t retained_count_ = 0;
  std::array<std::vector<int>, 3> kint_;
  std::array<std::vector<double>, 3> kderiv_;
  std::vector<double> lambda_;
  std::array<std::vector<double>, 4> weights_;
  std::vector<double> band_;
  std::vector<double> retained_;
  std::vector<std::size_t> mirror_;
};

using GridPtr = std::shared_ptr<const TorusGrid>;

/// Throws std::invalid_argument for dim outside {2,3} or a resolution that
/// is odd or below 4.
GridPtr make_grid(int dim, int resolution, double dealias = kTwoThirdsRule);

}  // namespace salt
