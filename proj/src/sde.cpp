#include "salt/sde.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "salt/snapshot.hpp"

namespace salt {

std::string to_string(Scheme s) {
  switch (s) {
    case Scheme::euler_maruyama_ito:
      return "euler_maruyama_ito";
    case Scheme::heun_stratonovich:
      return "heun_stratonovich";
    case Scheme::milstein_ito:
      return "milstein_ito";
  }
  return "?";
}

std::string to_string(Monitor m) { return m == Monitor::H ? "H" : "V"; }

Scheme parse_scheme(const std::string& s) {
  if (s == "euler_maruyama_ito") return Scheme::euler_maruyama_ito;
  if (s == "heun_stratonovich") return Scheme::heun_stratonovich;
  if (s == "milstein_ito") return Scheme::milstein_ito;
  throw std::invalid_argument("scheme: unknown value '" + s + "'");
}

Monitor parse_monitor(const std::string& s) {
  if (s == "H") return Monitor::H;
  if (s == "V") return Monitor::V;
  throw std::invalid_argument("monitor: expected H or V, got '" + s + "'");
}

void validate(const SimConfig& cfg) {
  auto fail = [](const std::string& msg) { throw std::invalid_argument(msg); };
  if (cfg.dim != 2 && cfg.dim != 3) fail("dim: must be 2 or 3");
  if (cfg.resolution < 4 || cfg.resolution % 2 != 0) fail("resolution: must be even and at least 4");
  if (!(cfg.nu > 0.0)) fail("nu: viscosity must be positive");
  if (cfg.xi_count < 0) fail("xi_count: must be non-negative");
  if (!(cfg.xi_decay >= 0.0 && cfg.xi_decay < 1.0)) fail("xi_decay: must lie in [0, 1)");
  if (!(cfg.xi_amplitude >= 0.0)) fail("xi_amplitude: must be non-negative");
  if (!(cfg.dt > 0.0)) fail("dt: must be positive");
  if (!(cfg.horizon > 0.0)) fail("horizon: must be positive");
  if (!(cfg.M > 1.0)) fail("M: M must exceed 1");
  if (cfg.snapshot_every < 0) fail("snapshot_every: must be non-negative");
  if (cfg.initial != "taylor_green" && cfg.initial != "random" && cfg.initial != "zero") {
    fail("initial: expected taylor_green, random or zero");
  }
  if (cfg.paths < 1) fail("paths: must be at least 1");
  if (cfg.threads < 1) fail("threads: must be at least 1");
  if (cfg.audit_samples < 1) fail("audit_samples: must be at least 1");
  if (cfg.audit_xi_count < 0) fail("audit_xi_count: must be non-negative");
  if (cfg.levels.empty()) fail("levels: need at least one Galerkin level");
  for (std::size_t i = 1; i < cfg.levels.size(); ++i) {
    if (resolve_level(cfg.levels[i]) < resolve_level(cfg.levels[i - 1])) fail("levels: must be ascending");
  }
  for (double s : cfg.small_times) {
    if (!(s >= 0.0)) fail("small_times: entries must be non-negative");
  }
  for (int r : cfg.audit_resolutions) {
    if (r < 4 || r % 2 != 0) fail("audit_resolutions: entries must be even and at least 4");
  }
}

double resolve_level(double galerkin_lambda) {
  return galerkin_lambda > 0.0 ? galerkin_lambda : std::numeric_limits<double>::infinity();
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t purpose, std::uint64_t index) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(mix(seed) ^ purpose) ^ index);
}

SpectralField initial_condition(const SimConfig& cfg, const GridPtr& grid) {
  if (cfg.initial == "taylor_green") return taylor_green(grid, cfg.ic_amplitude);
  if (cfg.initial == "zero") return SpectralField(grid);
  std::mt19937_64 rng(derive_seed(cfg.seed, kSeedInitial));
  RandomFieldSpec spec;
  spec.max_lambda = cfg.ic_max_lambda;
  spec.decay_exponent = cfg.ic_decay_exponent;
  spec.l2_norm = cfg.ic_amplitude;
  return random_field(grid, rng, spec);
}

XiEnsemble ensemble_for(const SimConfig& cfg, const GridPtr& grid) {
  return make_xi_ensemble(grid, cfg.xi_count, cfg.xi_decay, cfg.xi_amplitude, derive_seed(cfg.seed, kSeedXi),
                          cfg.xi_max_lambda);
}

GalerkinStepper::GalerkinStepper(GridPtr grid, double max_lambda, const XiEnsemble& xi, double nu, bool nonlinear,
                                 bool exact_viscosity)
    : grid_(std::move(grid)),
      max_lambda_(max_lambda),
      xi_(&xi),
      nu_(nu),
      nonlinear_(nonlinear),
      exact_viscosity_(exact_viscosity),
      mask_(galerkin_mask(*grid_, max_lambda)) {
  if (!(nu > 0.0)) throw std::invalid_argument("viscosity must be positive");
  if (!xi.grid_ptr()->same_shape(*grid_)) throw std::invalid_argument("xi ensemble on a different grid");
}

SpectralField GalerkinStepper::project(const SpectralField& f) const {
  SpectralField out = f;
  out.apply(mask_);
  return out;
}

SpectralField GalerkinStepper::diffusion(std::size_t i, const SpectralField& v, OperatorWorkspace& ws) const {
  SpectralField g = leray_project(noise_op(i, v, *xi_, ws));
  g.apply(mask_);
  g *= -1.0;
  return g;
}

SpectralField GalerkinStepper::deterministic_part(const SpectralField& u, bool ito, OperatorWorkspace& ws) const {
  SpectralField out(grid_);
  if (nonlinear_) out -= nonlinear_term(u, ws);
  if (ito && !xi_->empty()) out += ito_correction(u, *xi_, ws);
  if (!exact_viscosity_) out.axpy(-nu_, stokes_apply(u));
  out.apply(mask_);
  return out;
}

SpectralField GalerkinStepper::increment(const SpectralField& u, double dt, std::span<const double> dW, bool ito,
                                         OperatorWorkspace& ws) const {
  SpectralField f = deterministic_part(u, ito, ws);
  f *= dt;
  for (std::size_t i = 0; i < xi_->size(); ++i) f.axpy(dW[i], diffusion(i, u, ws));
  return f;
}

const RadialMultiplier& GalerkinStepper::propagator(double dt) {
  if (dt != cached_dt_ || !propagator_) {
    const double nu = nu_;
    const double cut = max_lambda_;
    const bool exact = exact_viscosity_;
    propagator_.emplace(*grid_, [=](double lam) {
      if (lam > cut) return 0.0;
      return exact ? std::exp(-nu * lam * dt) : 1.0;
    });
    cached_dt_ = dt;
  }
  return *propagator_;
}

SpectralField GalerkinStepper::finish(SpectralField u) const {
  if (!u.vec().all_finite()) throw IntegrationAborted("non-finite state after time step");
  return u;
}

SpectralField GalerkinStepper::step_euler_maruyama(const SpectralField& u, double dt, std::span<const double> dW,
                                                   OperatorWorkspace& ws) {
  if (dW.size() != xi_->size()) throw std::invalid_argument("increment count differs from ensemble size");
  SpectralField next = u + increment(u, dt, dW, true, ws);
  next.apply(propagator(dt));
  return finish(std::move(next));
}

SpectralField GalerkinStepper::step_heun_stratonovich(const SpectralField& u, double dt,
                                                      std::span<const double> dW, OperatorWorkspace& ws) {
  if (dW.size() != xi_->size()) throw std::invalid_argument("increment count differs from ensemble size");
  const RadialMultiplier& e = propagator(dt);
  const SpectralField f0 = increment(u, dt, dW, false, ws);
  SpectralField predictor = u + f0;
  predictor.apply(e);
  const SpectralField f1 = increment(predictor, dt, dW, false, ws);
  SpectralField next = u;
  next.axpy(0.5, f0);
  next.apply(e);
  next.axpy(0.5, f1);
  return finish(std::move(next));
}

SpectralField GalerkinStepper::step_milstein_ito(const SpectralField& u, double dt, std::span<const double> dW,
                                                 OperatorWorkspace& ws) {
  if (dW.size() != xi_->size()) throw std::invalid_argument("increment count differs from ensemble size");
  SpectralField noise(grid_);
  for (std::size_t i = 0; i < xi_->size(); ++i) noise.axpy(dW[i], diffusion(i, u, ws));
  SpectralField next = deterministic_part(u, true, ws);
  next *= dt;
  next += u;
  next += noise;
  for (std::size_t i = 0; i < xi_->size(); ++i) {
    next.axpy(0.5 * dW[i], diffusion(i, noise, ws));
    next.axpy(-0.5 * dt, diffusion(i, diffusion(i, u, ws), ws));
  }
  next.apply(propagator(dt));
  return finish(std::move(next));
}

SpectralField GalerkinStepper::step(Scheme scheme, const SpectralField& u, double dt, std::span<const double> dW,
                                    OperatorWorkspace& ws) {
  switch (scheme) {
    case Scheme::euler_maruyama_ito:
      return step_euler_maruyama(u, dt, dW, ws);
    case Scheme::heun_stratonovich:
      return step_heun_stratonovich(u, dt, dW, ws);
    case Scheme::milstein_ito:
      return step_milstein_ito(u, dt, dW, ws);
  }
  throw std::logic_error("unknown scheme");
}

void TrajectoryRecord::append(double t, const SpectralVector& u) {
  const double a0 = sobolev_norm(u, 0);
  const double a1 = sobolev_norm(u, 1);
  const double a2 = sobolev_norm(u, 2);
  const double a3 = sobolev_norm(u, 3);
  if (times.empty()) {
    sup_n1sq.push_back(a1 * a1);
    sup_n2sq.push_back(a2 * a2);
    int_n2sq.push_back(0.0);
    int_n3sq.push_back(0.0);
  } else {
    const double h = t - times.back();
    sup_n1sq.push_back(std::max(sup_n1sq.back(), a1 * a1));
    sup_n2sq.push_back(std::max(sup_n2sq.back(), a2 * a2));
    int_n2sq.push_back(int_n2sq.back() + 0.5 * h * (n2.back() * n2.back() + a2 * a2));
    int_n3sq.push_back(int_n3sq.back() + 0.5 * h * (n3.back() * n3.back() + a3 * a3));
  }
  times.push_back(t);
  n0.push_back(a0);
  n1.push_back(a1);
  n2.push_back(a2);
  n3.push_back(a3);
}

double TrajectoryRecord::functional(std::size_t k, Monitor m) const {
  return m == Monitor::H ? sup_n1sq.at(k) + int_n2sq.at(k) : sup_n2sq.at(k) + int_n3sq.at(k);
}

double blowup_functional(const TrajectoryRecord& rec, Monitor m) {
  if (rec.empty()) throw std::invalid_argument("empty trajectory record");
  return rec.functional(rec.size() - 1, m);
}

TrajectoryRecord integrate(const SimConfig& cfg, const SpectralField& u0, const XiEnsemble& xi,
                           const BrownianPath& path, OperatorWorkspace& ws,
                           const std::optional<std::filesystem::path>& snapshot_dir) {
  const auto steps = static_cast<int>(std::llround(cfg.horizon / cfg.dt));
  if (path.count != static_cast<int>(xi.size())) throw std::invalid_argument("path and ensemble sizes differ");
  if (path.steps < steps || std::abs(path.dt - cfg.dt) > 1e-15 * cfg.dt) {
    throw std::invalid_argument("Brownian path does not cover the configured horizon and dt");
  }
  GalerkinStepper stepper(u0.grid_ptr(), resolve_level(cfg.galerkin_lambda), xi, cfg.nu, cfg.nonlinear,
                          cfg.exact_viscosity);
  SpectralField u = stepper.project(u0);

  TrajectoryRecord rec;
  rec.monitor = cfg.monitor;
  rec.append(0.0, u);
  const double u0_sq = cfg.monitor == Monitor::H ? rec.sup_n1sq[0] : rec.sup_n2sq[0];
  rec.threshold = cfg.M + u0_sq;

  auto snapshot = [&](int step, double t) {
    if (!snapshot_dir || cfg.snapshot_every <= 0 || step % cfg.snapshot_every != 0) return;
    char name[32];
    std::snprintf(name, sizeof(name), "snap_%06d.bin", step);
    write_snapshot(*snapshot_dir / name, u, t);
    rec.snapshots.emplace_back(name);
  };
  snapshot(0, 0.0);

  for (int s = 0; s < steps; ++s) {
    try {
      u = stepper.step(cfg.scheme, u, cfg.dt, path.at_step(s), ws);
    } catch (const IntegrationAborted& e) {
      rec.aborted = true;
      rec.abort_reason = std::string(e.what()) + " at step " + std::to_string(s + 1);
      break;
    }
    const double t = (s + 1) * cfg.dt;
    rec.append(t, u);
    snapshot(s + 1, t);
    const std::size_t k = rec.size() - 1;
    if (rec.functional(k) >= rec.threshold) {
      rec.stop = StoppingTimeEvent{stepper.max_lambda(), cfg.M, t, k, rec.functional(k), cfg.monitor};
      break;
    }
  }
  return rec;
}

TrajectoryRecord run_trajectory(const SimConfig& cfg, const std::optional<std::filesystem::path>& snapshot_dir) {
  validate(cfg);
  const GridPtr grid = make_grid(cfg.dim, cfg.resolution);
  const XiEnsemble xi = ensemble_for(cfg, grid);
  const auto steps = static_cast<int>(std::llround(cfg.horizon / cfg.dt));
  const BrownianPath path =
      sample_increments(steps, static_cast<int>(xi.size()), cfg.dt, derive_seed(cfg.seed, kSeedPath));
  OperatorWorkspace ws(grid);
  return integrate(cfg, initial_condition(cfg, grid), xi, path, ws, snapshot_dir);
}

}  // namespace salt
