#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "salt/field.hpp"
#include "salt/operators.hpp"

namespace salt {

/// Largest |d^alpha xi^c| over multi-indices |alpha| <= 3 and components,
/// sampled on a 2x oversampled grid. A lower estimate of the W^{3,inf} norm:
/// the true sup may fall between sample points.
double w3inf_estimate(const SpectralField& xi);

/// Finite family of correlation fields xi_i driving the transport noise.
class XiEnsemble {
 public:
  /// Empty ensemble on grid.
  explicit XiEnsemble(GridPtr grid);
  /// Wraps arbitrary divergence-free fields; the certificate is the measured
  /// sum of squared W^{3,inf} estimates.
  XiEnsemble(GridPtr grid, std::vector<SpectralField> fields);

  const GridPtr& grid_ptr() const { return grid_; }
  std::size_t size() const { return fields_.size(); }
  bool empty() const { return fields_.empty(); }
  const SpectralField& field(std::size_t i) const { return fields_.at(i); }
  const std::vector<SpectralField>& fields() const { return fields_; }
  const PhysicalGradient& physical(std::size_t i) const { return physical_.at(i); }

  std::span<const double> w3inf_norms() const { return w3inf_; }
  double decay_rate() const { return decay_; }
  double amplitude() const { return amplitude_; }
  /// max_i of the squared W^{3,inf} estimate of the unit-amplitude base fields.
  double base_norm_factor() const { return base_factor_; }
  /// Upper bound on sum_i ||xi_i||^2_{W^{3,inf}}.
  double summability_certificate() const { return certificate_; }
  double measured_norm_sum() const;

 private:
  friend XiEnsemble make_xi_ensemble(const GridPtr&, int, double, double, std::uint64_t, double);
  void build_cache();

  GridPtr grid_;
  std::vector<SpectralField> fields_;
  std::vector<PhysicalGradient> physical_;
  std::vector<double> w3inf_;
  double decay_ = 0.0;
  double amplitude_ = 0.0;
  double base_factor_ = 0.0;
  double certificate_ = 0.0;
};

/// xi_i = amplitude * decay^i * b_i where each b_i is a randomly phased
/// combination of modes with lambda <= max_lambda, normalised to unit sup
/// norm. The certificate is amplitude^2 * C * (1 - decay^{2N}) / (1 - decay^2)
/// with C = max_i ||b_i||^2_{W^{3,inf}}. Throws std::invalid_argument unless
/// 0 <= decay < 1 and count >= 0.
XiEnsemble make_xi_ensemble(const GridPtr& grid, int count, double decay, double amplitude,
                            std::uint64_t seed, double max_lambda = 9.0);

/// Increments of `count` independent real Brownian motions on a uniform
/// time grid. increments are stored step-major: [step * count + i].
///
/// Values are quantised to a power-of-two multiple of 2^-40 sqrt(dt), so
/// sums of refined increments reproduce coarse increments exactly.
struct BrownianPath {
  std::uint64_t seed = 0;
  double dt = 0.0;
  int steps = 0;
  int count = 0;
  int level = 0;
  double quantum = 0.0;
  std::vector<double> increments;

  std::span<const double> at_step(int step) const {
    return std::span<const double>(increments).subspan(static_cast<std::size_t>(step) * count, count);
  }
  double increment(int step, int i) const { return increments[static_cast<std::size_t>(step) * count + i]; }
};

/// Stream for noise index i is an mt19937_64 seeded from (seed, i, level 0).
/// Throws std::invalid_argument for dt <= 0 or negative sizes.
BrownianPath sample_increments(int steps, int count, double dt, std::uint64_t seed);

/// Brownian-bridge refinement to dt/2: each coarse increment dW splits into
/// (dW/2 + z sqrt(dt)/2, dW - first), z drawn from the stream (seed, i,
/// level + 1) in coarse-step order.
BrownianPath refine(const BrownianPath& coarse);

}  // namespace salt
