#pragma once

// Numerical audits of the abstract operator assumptions for the concrete
// SALT Navier-Stokes operators with V = W^{3,2}, H = W^{2,2}, U = W^{1,2},
// X = L^2 (all divergence-free, mean-free), A(phi) the Ito drift and
// G_i(phi) = -P B_i phi.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "salt/noise.hpp"
#include "salt/sde.hpp"

namespace salt {

enum class AuditKind {
  check,       // must pass
  control,     // deliberately broken; must fail
  diagnostic,  // reported only
};

std::string to_string(AuditKind k);

/// One inequality evaluated over a sample suite. ratio[k] = lhs[k] / rhs[k]
/// where rhs omits the unknown constant, so c_hat = max ratio is the
/// smallest constant that makes the suite satisfy the inequality.
struct InequalityAudit {
  std::string id;
  std::string label;
  AuditKind kind = AuditKind::check;
  std::vector<double> lhs;
  std::vector<double> rhs;
  std::vector<double> ratio;
  double c_hat = 0.0;
  std::optional<double> kappa_hat;
  /// Trend statistic of the sweep (meaning depends on the audit; see note).
  std::optional<double> slope;
  double tolerance = 0.0;
  bool pass = false;
  std::string note;

  std::size_t samples() const { return ratio.size(); }
  /// Passing checks and failing controls are both "as expected".
  bool as_expected() const;
};

struct Exponents {
  double p = 4.0, q = 4.0, p_tilde = 2.0, q_tilde = 2.0;
};

struct AssumptionReport {
  std::string name;
  std::uint64_t seed = 0;
  int dim = 0;
  int resolution = 0;
  Exponents exponents;
  std::vector<InequalityAudit> audits;

  bool pass() const;
  const InequalityAudit& audit(const std::string& id) const;
};

/// Everything an audit needs. The ensemble is owned by the caller.
struct AuditContext {
  GridPtr grid;
  const XiEnsemble* xi = nullptr;
  double nu = 1.0;
  int samples = 100;
  std::uint64_t seed = 0;
  Exponents exponents;
  double kappa_min = 0.5;
  /// Used by the amplitude sweep to rebuild the ensemble at other amplitudes.
  int xi_count = 0;
  double xi_decay = 0.5;
  double xi_amplitude = 0.0;
  double xi_max_lambda = 9.0;
  std::uint64_t xi_seed = 0;
};

AuditContext make_audit_context(const SimConfig& cfg, const GridPtr& grid, const XiEnsemble& xi);

/// K(phi) = 1 + |phi|_U^p and its relatives.
double K1(const SpectralVector& phi, const Exponents& e);
double K2(const SpectralVector& phi, const SpectralVector& psi, const Exponents& e);
double Ktilde1(const SpectralVector& phi, const Exponents& e);
double Ktilde2(const SpectralVector& phi, const SpectralVector& psi, const Exponents& e);

/// |<L_xi phi, phi>_0| / (|xi|_0 |phi|_1^2) over random divergence-free
/// pairs, plus a control with a non-solenoidal xi.
AssumptionReport check_cancellation(const GridPtr& grid, std::uint64_t seed, int samples);

/// Growth bounds on A and G over a magnitude sweep |phi|_U in [1e-2, 1e2].
AssumptionReport check_growth_bounds(const AuditContext& ctx);

/// Galerkin coercivity; kappa_hat is the smallest -LHS_lin / |phi|_V^2 with
/// the lower-order constant set to zero, so lower-order noise terms count
/// against kappa. The nonlinear part is reported as a separate constant.
AssumptionReport check_coercive_inequality(const AuditContext& ctx);

/// Local Lipschitz bounds along phi -> phi + eps h, eps in [1e-6, 1].
AssumptionReport check_local_lipschitz(const AuditContext& ctx);

/// Difference forms of the coercivity bounds in U and X.
AssumptionReport check_monotonicity_pair(const AuditContext& ctx);

/// |P_n phi|_H <= |phi|_H and the mu_n tail bounds across shell levels.
AssumptionReport check_projection_properties(const AuditContext& ctx);

/// Log-log slope of |[Lap, B_0] f| / |f| over fields on single shells.
AssumptionReport check_commutator_order(const GridPtr& grid, const XiEnsemble& xi, std::uint64_t seed,
                                        const std::vector<double>& shells = {1, 2, 4, 8, 16, 32, 64});

/// Every audit at every configured resolution, plus the commutator sweep.
std::vector<AssumptionReport> run_assumption_lab(const SimConfig& cfg);

/// Ordinary least squares slope of y against x.
double ols_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace salt
