#include "salt/noise.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "salt/fourier.hpp"
#include "salt/simd/kernels.hpp"

namespace salt {

namespace {

// Largest sup over components of d^alpha f for every |alpha| <= max_order.
double sup_of_derivatives(const SpectralVector& f, int max_order) {
  const TorusGrid& g = f.grid();
  const int d = g.dim();
  FourierTransform ft(f.grid_ptr(), 2);
  std::vector<double> samples(ft.physical_size());
  std::vector<cplx> spec(g.size());
  double best = 0.0;
  std::array<int, 3> alpha{0, 0, 0};
  const int last = d == 3 ? max_order : 0;
  for (alpha[0] = 0; alpha[0] <= max_order; ++alpha[0]) {
    for (alpha[1] = 0; alpha[0] + alpha[1] <= max_order; ++alpha[1]) {
      for (alpha[2] = 0; alpha[2] <= last && alpha[0] + alpha[1] + alpha[2] <= max_order; ++alpha[2]) {
        const int order = alpha[0] + alpha[1] + alpha[2];
        // i^order
        static const cplx kIPow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
        for (int c = 0; c < d; ++c) {
          const auto in = f.component(c);
          for (std::size_t i = 0; i < g.size(); ++i) {
            double m = 1.0;
            for (int a = 0; a < d; ++a) m *= std::pow(g.derivative_symbol(a)[i], alpha[a]);
            spec[i] = kIPow[order % 4] * m * in[i];
          }
          ft.to_physical(spec, samples);
          best = std::max(best, simd::max_abs(samples));
        }
      }
    }
  }
  return best;
}

std::mt19937_64 stream(std::uint64_t seed, int index, int level) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(level), 0x5a17u};
  return std::mt19937_64(seq);
}

double quantize(double x, double q) { return std::nearbyint(x / q) * q; }

}  // namespace

double w3inf_estimate(const SpectralField& xi) { return sup_of_derivatives(xi, 3); }

XiEnsemble::XiEnsemble(GridPtr grid) : grid_(std::move(grid)) {}

XiEnsemble::XiEnsemble(GridPtr grid, std::vector<SpectralField> fields)
    : grid_(std::move(grid)), fields_(std::move(fields)) {
  for (const auto& f : fields_) {
    if (!f.grid().same_shape(*grid_)) throw std::invalid_argument("xi field on a different grid");
    w3inf_.push_back(w3inf_estimate(f));
  }
  certificate_ = measured_norm_sum();
  build_cache();
}

double XiEnsemble::measured_norm_sum() const {
  double s = 0.0;
  for (double w : w3inf_) s += w * w;
  return s;
}

void XiEnsemble::build_cache() {
  physical_.clear();
  if (fields_.empty()) return;
  OperatorWorkspace ws(grid_);
  physical_.resize(fields_.size());
  for (std::size_t i = 0; i < fields_.size(); ++i) ws.evaluate(fields_[i], physical_[i], true);
}

XiEnsemble make_xi_ensemble(const GridPtr& grid, int count, double decay, double amplitude, std::uint64_t seed,
                            double max_lambda) {
  if (count < 0) throw std::invalid_argument("ensemble size must be non-negative");
  if (!(decay >= 0.0 && decay < 1.0)) {
    throw std::invalid_argument("xi decay must lie in [0, 1): the squared-norm series would diverge");
  }
  if (!(amplitude >= 0.0)) throw std::invalid_argument("xi amplitude must be non-negative");
  XiEnsemble ens(grid);
  ens.decay_ = decay;
  ens.amplitude_ = amplitude;
  std::mt19937_64 rng(seed);
  RandomFieldSpec spec;
  spec.min_lambda = 1.0;
  spec.max_lambda = max_lambda;
  spec.l2_norm = 1.0;
  double scale = amplitude;
  for (int i = 0; i < count; ++i) {
    SpectralField base = random_field(grid, rng, spec);
    const double sup = sup_of_derivatives(base, 0);
    if (sup > 0.0) base *= 1.0 / sup;
    const double w = w3inf_estimate(base);
    ens.base_factor_ = std::max(ens.base_factor_, w * w);
    base *= scale;
    ens.w3inf_.push_back(w3inf_estimate(base));
    ens.fields_.push_back(std::move(base));
    scale *= decay;
  }
  const double d2 = decay * decay;
  const double geometric = count == 0 ? 0.0 : (1.0 - std::pow(d2, count)) / (1.0 - d2);
  ens.certificate_ = amplitude * amplitude * ens.base_factor_ * geometric;
  ens.build_cache();
  return ens;
}

BrownianPath sample_increments(int steps, int count, double dt, std::uint64_t seed) {
  if (!(dt > 0.0)) throw std::invalid_argument("Brownian time step must be positive");
  if (steps < 0 || count < 0) throw std::invalid_argument("Brownian path sizes must be non-negative");
  BrownianPath p;
  p.seed = seed;
  p.dt = dt;
  p.steps = steps;
  p.count = count;
  p.level = 0;
  p.quantum = std::ldexp(1.0, std::ilogb(std::sqrt(dt)) - 40);
  p.increments.resize(static_cast<std::size_t>(steps) * count);
  const double sd = std::sqrt(dt);
  for (int i = 0; i < count; ++i) {
    auto gen = stream(seed, i, 0);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int s = 0; s < steps; ++s) {
      p.increments[static_cast<std::size_t>(s) * count + i] = quantize(sd * normal(gen), p.quantum);
    }
  }
  return p;
}

BrownianPath refine(const BrownianPath& coarse) {
  BrownianPath p;
  p.seed = coarse.seed;
  p.dt = coarse.dt / 2.0;
  p.steps = coarse.steps * 2;
  p.count = coarse.count;
  p.level = coarse.level + 1;
  p.quantum = coarse.quantum;
  p.increments.resize(static_cast<std::size_t>(p.steps) * p.count);
  const double half_sd = std::sqrt(coarse.dt) / 2.0;
  for (int i = 0; i < coarse.count; ++i) {
    auto gen = stream(coarse.seed, i, p.level);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int s = 0; s < coarse.steps; ++s) {
      const double dw = coarse.increment(s, i);
      const double first = quantize(dw / 2.0 + half_sd * normal(gen), p.quantum);
      p.increments[static_cast<std::size_t>(2 * s) * p.count + i] = first;
      p.increments[static_cast<std::size_t>(2 * s + 1) * p.count + i] = dw - first;
    }
  }
  return p;
}

}  // namespace salt
