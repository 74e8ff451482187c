#include "salt/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace salt {

namespace {

int wavenumber_of(int i, int n) { return i < n / 2 ? i : i - n; }

}  // namespace

TorusGrid::TorusGrid(int dim, int resolution, double dealias)
    : dim_(dim), n_(resolution), dealias_(dealias) {
  if (dim != 2 && dim != 3) {
    throw std::invalid_argument("grid dimension must be 2 or 3, got " + std::to_string(dim));
  }
  if (resolution % 2 != 0) {
    throw std::invalid_argument("grid resolution must be even, got " + std::to_string(resolution));
  }
  if (resolution < 4) {
    throw std::invalid_argument("grid resolution must be at least 4, got " +
                                std::to_string(resolution));
  }
  if (!(dealias > 0.0 && dealias <= 1.0)) {
    throw std::invalid_argument("dealias fraction must lie in (0, 1]");
  }
  // 1e-9 guards fractions like 2/3 * 24 that are integers in exact arithmetic.
  cutoff_ = static_cast<int>(std::floor(dealias * (n_ / 2) + 1e-9));
  cutoff_ = std::min(cutoff_, n_ / 2 - 1);

  size_ = 1;
  for (int a = 0; a < dim_; ++a) size_ *= static_cast<std::size_t>(n_);

  for (int a = 0; a < dim_; ++a) {
    kint_[a].resize(size_);
    kderiv_[a].resize(size_);
  }
  lambda_.resize(size_);
  band_.resize(size_);
  retained_.resize(size_);
  mirror_.resize(size_);
  for (auto& w : weights_) w.resize(size_);

  const std::size_t n = static_cast<std::size_t>(n_);
  for (std::size_t idx = 0; idx < size_; ++idx) {
    std::size_t rest = idx;
    std::array<int, 3> i{0, 0, 0};
    for (int a = dim_ - 1; a >= 0; --a) {
      i[a] = static_cast<int>(rest % n);
      rest /= n;
    }
    double lam = 0.0;
    bool band = true;
    std::size_t mirror = 0;
    for (int a = 0; a < dim_; ++a) {
      const int k = wavenumber_of(i[a], n_);
      kint_[a][idx] = k;
      kderiv_[a][idx] = (2 * std::abs(k) == n_) ? 0.0 : static_cast<double>(k);
      lam += static_cast<double>(k) * k;
      band = band && std::abs(k) <= cutoff_;
      mirror = mirror * n + static_cast<std::size_t>((n_ - i[a]) % n_);
    }
    lambda_[idx] = lam;
    band_[idx] = band ? 1.0 : 0.0;
    const bool kept = band && idx != 0;
    retained_[idx] = kept ? 1.0 : 0.0;
    retained_count_ += kept ? 1 : 0;
    mirror_[idx] = mirror;
    for (int m = 0; m < 4; ++m) {
      weights_[m][idx] = idx == 0 ? (m == 0 ? 1.0 : 0.0) : std::pow(lam, m);
    }
  }
}

Wavevector TorusGrid::wavevector(std::size_t idx) const {
  Wavevector k{0, 0, 0};
  for (int a = 0; a < dim_; ++a) k[a] = kint_[a][idx];
  return k;
}

bool TorusGrid::is_nyquist(std::size_t idx) const {
  for (int a = 0; a < dim_; ++a) {
    if (2 * std::abs(kint_[a][idx]) == n_) return true;
  }
  return false;
}

std::size_t TorusGrid::index_of(const Wavevector& k) const {
  std::size_t idx = 0;
  for (int a = 0; a < dim_; ++a) {
    if (2 * std::abs(k[a]) >= n_) {
      throw std::out_of_range("wavenumber " + std::to_string(k[a]) + " outside grid");
    }
    idx = idx * static_cast<std::size_t>(n_) + static_cast<std::size_t>((k[a] + n_) % n_);
  }
  for (int a = dim_; a < 3; ++a) {
    if (k[a] != 0) throw std::out_of_range("wavevector has components beyond grid dimension");
  }
  return idx;
}

GridPtr make_grid(int dim, int resolution, double dealias) {
  return std::make_shared<const TorusGrid>(dim, resolution, dealias);
}

}  // namespace salt
