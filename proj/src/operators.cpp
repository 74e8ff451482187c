#include "salt/operators.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "salt/noise.hpp"
#include "salt/simd/kernels.hpp"

namespace salt {

namespace {

// multiply by i * k_axis
void differentiate_into(std::span<const cplx> in, std::span<const double> k, std::span<cplx> out) {
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = cplx(-in[i].imag() * k[i], in[i].real() * k[i]);
}

}  // namespace

OperatorWorkspace::OperatorWorkspace(GridPtr grid) : grid_(grid), ft_(grid) {
  spec_.resize(grid_->size());
  acc_.resize(ft_.physical_size());
}

void OperatorWorkspace::evaluate(const SpectralVector& f, PhysicalGradient& out, bool with_gradient) {
  if (!grid_->same_shape(f.grid())) throw std::invalid_argument("workspace and field grids differ");
  const int d = grid_->dim();
  const std::size_t n = ft_.physical_size();
  out.dim = d;
  out.points = n;
  out.has_gradient = with_gradient;
  out.value.resize(static_cast<std::size_t>(d) * n);
  for (int c = 0; c < d; ++c) {
    ft_.to_physical(f.component(c), std::span<double>(out.value).subspan(static_cast<std::size_t>(c) * n, n));
  }
  if (!with_gradient) return;
  out.grad.resize(static_cast<std::size_t>(d * d) * n);
  for (int j = 0; j < d; ++j) {
    for (int c = 0; c < d; ++c) {
      differentiate_into(f.component(c), grid_->derivative_symbol(j), spec_);
      ft_.to_physical(spec_, std::span<double>(out.grad).subspan((static_cast<std::size_t>(j) * d + c) * n, n));
    }
  }
}

SpectralVector OperatorWorkspace::transport(const PhysicalGradient& a, const PhysicalGradient& b, double a_adv,
                                            double a_str) {
  const int d = grid_->dim();
  const std::size_t n = ft_.physical_size();
  if ((a_adv != 0.0 && !b.has_gradient) || (a_str != 0.0 && !a.has_gradient)) {
    throw std::logic_error("transport: missing gradient samples");
  }
  SpectralVector out(grid_);
  std::vector<double> scaled;
  for (int c = 0; c < d; ++c) {
    std::fill(acc_.begin(), acc_.end(), 0.0);
    for (int j = 0; j < d; ++j) {
      if (a_adv != 0.0) simd::mul_add(acc_, {a.component(j), n}, {b.derivative(j, c), n});
    }
    if (a_adv != 1.0 && a_adv != 0.0) {
      for (double& v : acc_) v *= a_adv;
    }
    if (a_str != 0.0) {
      if (a_adv == 0.0 && a_str == 1.0) {
        for (int j = 0; j < d; ++j) simd::mul_add(acc_, {b.component(j), n}, {a.derivative(c, j), n});
      } else {
        scaled.assign(n, 0.0);
        for (int j = 0; j < d; ++j) simd::mul_add(scaled, {b.component(j), n}, {a.derivative(c, j), n});
        for (std::size_t p = 0; p < n; ++p) acc_[p] += a_str * scaled[p];
      }
    }
    ft_.to_spectral(acc_, out.component(c));
    simd::scale_by(out.component(c), grid_->band_mask());
  }
  return out;
}

SpectralVector derivative(const SpectralVector& f, int axis) {
  SpectralVector out(f.grid_ptr());
  for (int c = 0; c < f.components(); ++c) {
    differentiate_into(f.component(c), f.grid().derivative_symbol(axis), out.component(c));
  }
  return out;
}

SpectralVector laplacian(const SpectralVector& f) {
  SpectralVector out = f;
  std::vector<double> minus_lambda(f.grid().lambdas().begin(), f.grid().lambdas().end());
  for (double& v : minus_lambda) v = -v;
  for (int c = 0; c < out.components(); ++c) simd::scale_by(out.component(c), minus_lambda);
  return out;
}

SpectralVector advect(const SpectralVector& phi, const SpectralVector& psi, OperatorWorkspace& ws) {
  phi.require_same_grid(psi);
  ws.evaluate(phi, ws.scratch_a(), false);
  ws.evaluate(psi, ws.scratch_b(), true);
  return ws.transport(ws.scratch_a(), ws.scratch_b(), 1.0, 0.0);
}

SpectralVector stretch(const SpectralVector& phi, const SpectralVector& psi, OperatorWorkspace& ws) {
  phi.require_same_grid(psi);
  ws.evaluate(phi, ws.scratch_a(), true);
  ws.evaluate(psi, ws.scratch_b(), false);
  return ws.transport(ws.scratch_a(), ws.scratch_b(), 0.0, 1.0);
}

SpectralVector noise_op(std::size_t i, const SpectralVector& u, const XiEnsemble& xi, OperatorWorkspace& ws) {
  if (i >= xi.size()) {
    throw std::out_of_range("noise index " + std::to_string(i) + " outside ensemble of size " +
                            std::to_string(xi.size()));
  }
  u.require_same_grid(xi.field(i));
  ws.evaluate(u, ws.scratch_b(), true);
  return ws.transport(xi.physical(i), ws.scratch_b(), 1.0, 1.0);
}

SpectralVector noise_op_twice(std::size_t i, const SpectralVector& u, const XiEnsemble& xi, OperatorWorkspace& ws,
                              bool project_between) {
  SpectralVector once = noise_op(i, u, xi, ws);
  if (project_between) return noise_op(i, leray_project(once), xi, ws);
  return noise_op(i, once, xi, ws);
}

SpectralField nonlinear_term(const SpectralField& u, OperatorWorkspace& ws) {
  ws.evaluate(u, ws.scratch_a(), true);
  return leray_project(ws.transport(ws.scratch_a(), ws.scratch_a(), 1.0, 0.0));
}

SpectralField ito_correction(const SpectralField& u, const XiEnsemble& xi, OperatorWorkspace& ws) {
  SpectralVector sum(u.grid_ptr());
  for (std::size_t i = 0; i < xi.size(); ++i) sum += noise_op_twice(i, u, xi, ws, false);
  SpectralField out = leray_project(sum);
  out *= 0.5;
  return out;
}

SpectralField drift(const SpectralField& u, const XiEnsemble& xi, double nu, OperatorWorkspace& ws) {
  if (!(nu > 0.0)) throw std::invalid_argument("viscosity must be positive");
  SpectralField out = ito_correction(u, xi, ws);
  out -= nonlinear_term(u, ws);
  out.axpy(-nu, stokes_apply(u));
  return out;
}

SpectralVector noise_commutator(std::size_t i, const SpectralVector& f, const XiEnsemble& xi, OperatorWorkspace& ws) {
  SpectralVector out = laplacian(noise_op(i, f, xi, ws));
  out -= noise_op(i, laplacian(f), xi, ws);
  return out;
}

}  // namespace salt
