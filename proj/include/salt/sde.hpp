#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "salt/field.hpp"
#include "salt/noise.hpp"
#include "salt/operators.hpp"

namespace salt {

enum class Scheme { euler_maruyama_ito, heun_stratonovich, milstein_ito };

/// Which blow-up functional the stopping time watches:
/// H: sup ||u||_1^2 + int ||u||_2^2 (the W^{1,2}-valued solution class),
/// V: sup ||u||_2^2 + int ||u||_3^2 (the W^{2,2}-valued class).
enum class Monitor { H, V };

std::string to_string(Scheme s);
std::string to_string(Monitor m);
Scheme parse_scheme(const std::string& s);
Monitor parse_monitor(const std::string& s);

/// Everything a run needs; the config file keys are exactly these member names.
struct SimConfig {
  int dim = 2;
  int resolution = 32;
  /// Galerkin level as the largest retained Stokes eigenvalue; 0 keeps every retained mode.
  double galerkin_lambda = 0.0;
  double nu = 1.0;

  int xi_count = 0;
  double xi_decay = 0.5;
  double xi_amplitude = 0.05;
  double xi_max_lambda = 9.0;

  double dt = 1e-3;
  double horizon = 1.0;
  double M = 100.0;
  Scheme scheme = Scheme::euler_maruyama_ito;
  std::uint64_t seed = 0;
  int snapshot_every = 0;
  Monitor monitor = Monitor::H;
  bool nonlinear = true;
  bool exact_viscosity = true;

  /// taylor_green | random | zero
  std::string initial = "taylor_green";
  double ic_amplitude = 1.0;
  double ic_max_lambda = 8.0;
  double ic_decay_exponent = 2.0;

  // Monte Carlo harness
  std::vector<double> levels{2.0, 8.0, 0.0};
  int paths = 16;
  std::vector<double> small_times{};
  int threads = 1;

  // Assumption audits
  int audit_samples = 100;
  /// Ensemble size for the audits (xi_count drives simulations only).
  int audit_xi_count = 4;
  std::vector<int> audit_resolutions{16, 32, 64};
  double kappa_min = 0.5;
  double p = 4.0;
  double q = 4.0;
  double p_tilde = 2.0;
  double q_tilde = 2.0;
};

/// Throws std::invalid_argument naming the offending key.
void validate(const SimConfig& cfg);

/// Galerkin level cutoff; 0 (or negative) means all retained modes.
double resolve_level(double galerkin_lambda);

/// Deterministic sub-seed for a named purpose and index.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t purpose, std::uint64_t index = 0);
inline constexpr std::uint64_t kSeedXi = 1;
inline constexpr std::uint64_t kSeedPath = 2;
inline constexpr std::uint64_t kSeedInitial = 3;
inline constexpr std::uint64_t kSeedAudit = 4;

SpectralField initial_condition(const SimConfig& cfg, const GridPtr& grid);
XiEnsemble ensemble_for(const SimConfig& cfg, const GridPtr& grid);

class IntegrationAborted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Time stepping of the Galerkin system on V_n. Every operator is wrapped by
/// P_n; with exact viscosity the Stokes part is integrated per mode with the
/// factor exp(-nu lambda dt) and the remaining terms are explicit.
class GalerkinStepper {
 public:
  GalerkinStepper(GridPtr grid, double max_lambda, const XiEnsemble& xi, double nu, bool nonlinear = true,
                  bool exact_viscosity = true);

  double max_lambda() const { return max_lambda_; }
  SpectralField project(const SpectralField& f) const;

  /// u+ = E P_n[u + dt (-P L_u u + 1/2 sum P B_i^2 u) - sum P B_i u dW_i].
  SpectralField step_euler_maruyama(const SpectralField& u, double dt, std::span<const double> dW,
                                    OperatorWorkspace& ws);
  /// Integrating-factor Heun for the Stratonovich form (no correction drift).
  /// For a Galerkin level strictly below the band its Ito limit differs from
  /// the converted Galerkin equation by the P_n tail inside B_i^2.
  SpectralField step_heun_stratonovich(const SpectralField& u, double dt, std::span<const double> dW,
                                       OperatorWorkspace& ws);
  /// Euler-Maruyama plus the commutative-noise Milstein term
  /// 1/2 sum_ij G_i G_j u (dW_i dW_j - delta_ij dt), G_i = -P_n P B_i.
  SpectralField step_milstein_ito(const SpectralField& u, double dt, std::span<const double> dW,
                                  OperatorWorkspace& ws);
  SpectralField step(Scheme scheme, const SpectralField& u, double dt, std::span<const double> dW,
                     OperatorWorkspace& ws);

  /// -P_n P B_i v
  SpectralField diffusion(std::size_t i, const SpectralField& v, OperatorWorkspace& ws) const;

 private:
  SpectralField deterministic_part(const SpectralField& u, bool ito, OperatorWorkspace& ws) const;
  SpectralField increment(const SpectralField& u, double dt, std::span<const double> dW, bool ito,
                          OperatorWorkspace& ws) const;
  const RadialMultiplier& propagator(double dt);
  SpectralField finish(SpectralField u) const;

  GridPtr grid_;
  double max_lambda_;
  const XiEnsemble* xi_;
  double nu_;
  bool nonlinear_;
  bool exact_viscosity_;
  RadialMultiplier mask_;
  double cached_dt_ = -1.0;
  std::optional<RadialMultiplier> propagator_;
};

struct StoppingTimeEvent {
  double level_lambda = 0.0;
  double M = 0.0;
  double time = 0.0;
  std::size_t step = 0;
  double functional = 0.0;
  Monitor monitor = Monitor::H;
};

/// Norm time series of one sample path with the running sup and
/// trapezoidal running integrals of both blow-up monitors.
struct TrajectoryRecord {
  std::vector<double> times;
  std::vector<double> n0, n1, n2, n3;
  std::vector<double> sup_n1sq, int_n2sq;
  std::vector<double> sup_n2sq, int_n3sq;
  Monitor monitor = Monitor::H;
  double threshold = 0.0;
  std::optional<StoppingTimeEvent> stop;
  std::vector<std::string> snapshots;
  bool aborted = false;
  std::string abort_reason;

  std::size_t size() const { return times.size(); }
  bool empty() const { return times.empty(); }
  void append(double t, const SpectralVector& u);
  /// Monitored functional at sample k.
  double functional(std::size_t k, Monitor m) const;
  double functional(std::size_t k) const { return functional(k, monitor); }
};

/// sup ||u||_U^2 + int ||u||_H^2 at the end of the record (U, H per monitor).
double blowup_functional(const TrajectoryRecord& rec, Monitor m = Monitor::H);

/// Integrate from u0 on the given path until the horizon or the first sample
/// whose functional reaches M + ||u0||_U^2.
TrajectoryRecord integrate(const SimConfig& cfg, const SpectralField& u0, const XiEnsemble& xi,
                           const BrownianPath& path, OperatorWorkspace& ws,
                           const std::optional<std::filesystem::path>& snapshot_dir = std::nullopt);

/// Build grid, ensemble, path and initial data from cfg and integrate.
TrajectoryRecord run_trajectory(const SimConfig& cfg,
                                const std::optional<std::filesystem::path>& snapshot_dir = std::nullopt);

}  // namespace salt
