#pragma once

#include <cstddef>
#include <vector>

#include "salt/field.hpp"
#include "salt/fourier.hpp"

namespace salt {

class XiEnsemble;

/// Physical-space samples of a vector field and, optionally, its gradient.
/// value[c * n + p] = f^c(x_p), grad[(j * dim + c) * n + p] = d_j f^c(x_p).
struct PhysicalGradient {
  int dim = 0;
  std::size_t points = 0;
  bool has_gradient = false;
  std::vector<double> value;
  std::vector<double> grad;

  const double* component(int c) const { return value.data() + static_cast<std::size_t>(c) * points; }
  const double* derivative(int j, int c) const {
    return grad.data() + (static_cast<std::size_t>(j) * dim + c) * points;
  }
};

/// Per-worker scratch for pseudo-spectral products.
///
/// Fields are kept in the 2/3 band (|k_j| <= cutoff ~ N/3), so a quadratic
/// product sampled on the N-point grid has no aliases landing back in the
/// band: the N grid already acts as the 3/2-padded grid for band-limited
/// inputs, and products truncated to the band are exact up to rounding.
class OperatorWorkspace {
 public:
  explicit OperatorWorkspace(GridPtr grid);

  const GridPtr& grid_ptr() const { return grid_; }
  FourierTransform& transform() { return ft_; }

  void evaluate(const SpectralVector& f, PhysicalGradient& out, bool with_gradient);

  /// out^c = a_adv * sum_j a^j d_j b^c + a_str * sum_j b^j d_c a^j, band truncated.
  SpectralVector transport(const PhysicalGradient& a, const PhysicalGradient& b, double a_adv, double a_str);

  PhysicalGradient& scratch_a() { return a_; }
  PhysicalGradient& scratch_b() { return b_; }

 private:
  GridPtr grid_;
  FourierTransform ft_;
  PhysicalGradient a_;
  PhysicalGradient b_;
  std::vector<std::complex<double>> spec_;
  std::vector<double> acc_;
};

/// Spectral derivative d_j f, component by component.
SpectralVector derivative(const SpectralVector& f, int axis);
/// Componentwise Laplacian (multiplies by -|k|^2).
SpectralVector laplacian(const SpectralVector& f);

/// L_phi psi = sum_j phi^j d_j psi, dealiased, not projected.
SpectralVector advect(const SpectralVector& phi, const SpectralVector& psi, OperatorWorkspace& ws);
/// T_phi psi = sum_j psi^j grad phi^j, dealiased, not projected.
SpectralVector stretch(const SpectralVector& phi, const SpectralVector& psi, OperatorWorkspace& ws);

/// B_i u = L_{xi_i} u + T_{xi_i} u. Throws std::out_of_range for a bad index.
SpectralVector noise_op(std::size_t i, const SpectralVector& u, const XiEnsemble& xi, OperatorWorkspace& ws);

/// B_i (B_i u); with project_between the inner result is Leray projected first.
SpectralVector noise_op_twice(std::size_t i, const SpectralVector& u, const XiEnsemble& xi,
                              OperatorWorkspace& ws, bool project_between);

/// P L_u u.
SpectralField nonlinear_term(const SpectralField& u, OperatorWorkspace& ws);

/// (1/2) sum_i P B_i^2 u over the ensemble, each B_i^2 applied unprojected.
SpectralField ito_correction(const SpectralField& u, const XiEnsemble& xi, OperatorWorkspace& ws);

/// -P L_u u - nu A u + (1/2) sum_i P B_i^2 u. Throws for nu <= 0.
SpectralField drift(const SpectralField& u, const XiEnsemble& xi, double nu, OperatorWorkspace& ws);

/// [Laplacian, B_i] f = Lap(B_i f) - B_i(Lap f).
SpectralVector noise_commutator(std::size_t i, const SpectralVector& f, const XiEnsemble& xi, OperatorWorkspace& ws);

}  // namespace salt
