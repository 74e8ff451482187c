#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "salt/sde.hpp"
#include "salt/snapshot.hpp"

using namespace salt;

namespace {

SimConfig base_config() {
  SimConfig c;
  c.resolution = 16;
  c.dt = 1e-3;
  c.horizon = 0.1;
  c.M = 1e9;
  return c;
}

double rel_diff(const SpectralField& a, const SpectralField& b) {
  return sobolev_norm(a.vec() - b.vec(), 0) / sobolev_norm(b, 0);
}

SpectralField run_to_end(GalerkinStepper& st, Scheme scheme, const SpectralField& u0, const BrownianPath& p,
                         OperatorWorkspace& ws) {
  SpectralField u = u0;
  for (int s = 0; s < p.steps; ++s) u = st.step(scheme, u, p.dt, p.at_step(s), ws);
  return u;
}

}  // namespace

TEST_CASE("config helpers") {
  CHECK(parse_scheme("heun_stratonovich") == Scheme::heun_stratonovich);
  CHECK(parse_monitor("V") == Monitor::V);
  CHECK_THROWS_AS(parse_scheme("rk4"), std::invalid_argument);
  CHECK(to_string(Scheme::milstein_ito) == "milstein_ito");
  SimConfig c;
  CHECK_NOTHROW(validate(c));
  c.M = 0.5;
  CHECK_THROWS_WITH(validate(c), "M: M must exceed 1");
  c = SimConfig{};
  c.dt = 0;
  CHECK_THROWS_AS(validate(c), std::invalid_argument);
  c = SimConfig{};
  c.levels = {8, 2};
  CHECK_THROWS_AS(validate(c), std::invalid_argument);
  CHECK(derive_seed(1, kSeedXi) == derive_seed(1, kSeedXi));
  CHECK(derive_seed(1, kSeedXi) != derive_seed(1, kSeedPath));
  CHECK(derive_seed(1, kSeedPath, 0) != derive_seed(1, kSeedPath, 1));
}

TEST_CASE("single Stokes mode decays exactly") {
  auto g = make_grid(2, 16);
  const XiEnsemble none(g);
  OperatorWorkspace ws(g);
  const double nu = 0.7, dt = 1e-2;
  GalerkinStepper st(g, resolve_level(0), none, nu, false, true);
  const SpectralField u0 = eigenmode(g, {2, 1, 0}, {cplx(1, 2), cplx(-2, -4), cplx(0)});
  SpectralField u = u0;
  for (int s = 1; s <= 50; ++s) {
    u = st.step_euler_maruyama(u, dt, {}, ws);
    SpectralField want = u0;
    want *= std::exp(-nu * 5.0 * dt * s);
    CHECK(rel_diff(u, want) <= 1e-12);
  }
}

TEST_CASE("Taylor-Green keeps its shape and decays at rate 2 nu") {
  auto g = make_grid(2, 32);
  const XiEnsemble none(g);
  OperatorWorkspace ws(g);
  const double nu = 1.0, dt = 1e-3;
  GalerkinStepper st(g, resolve_level(0), none, nu, true, true);
  const SpectralField u0 = taylor_green(g, 1.0);
  SpectralField u = u0;
  for (int s = 0; s < 500; ++s) u = st.step_euler_maruyama(u, dt, {}, ws);
  SpectralField want = u0;
  want *= std::exp(-2 * nu * 0.5);
  CHECK(rel_diff(u, want) <= 1e-12);
}

TEST_CASE("zero initial data stays zero") {
  auto g = make_grid(2, 16);
  const XiEnsemble xi = make_xi_ensemble(g, 2, 0.5, 0.5, 1);
  OperatorWorkspace ws(g);
  GalerkinStepper st(g, resolve_level(0), xi, 1.0);
  const double dw[2] = {0.03, -0.02};
  for (Scheme s : {Scheme::euler_maruyama_ito, Scheme::heun_stratonovich, Scheme::milstein_ito}) {
    const SpectralField z = st.step(s, SpectralField(g), 1e-3, dw, ws);
    CHECK(sobolev_norm(z, 0) == 0.0);
  }
  CHECK_THROWS_AS(st.step_euler_maruyama(SpectralField(g), 1e-3, std::span<const double>(dw, 1), ws),
                  std::invalid_argument);
}

TEST_CASE("Heun and Euler-Maruyama agree to scheme order without noise") {
  auto g = make_grid(2, 16);
  const XiEnsemble none(g);
  OperatorWorkspace ws(g);
  std::mt19937_64 rng(4);
  const SpectralField u0 = random_field(g, rng, {1.0, 20.0, 1.0, 2.0});
  GalerkinStepper st(g, resolve_level(0), none, 1.0);
  double gaps[2];
  for (int level = 0; level < 2; ++level) {
    const double dt = 2e-3 / (1 << level);
    const BrownianPath p = sample_increments(static_cast<int>(std::lround(0.1 / dt)), 0, dt, 1);
    const SpectralField a = run_to_end(st, Scheme::euler_maruyama_ito, u0, p, ws);
    const SpectralField b = run_to_end(st, Scheme::heun_stratonovich, u0, p, ws);
    gaps[level] = rel_diff(a, b);
  }
  CHECK(gaps[0] <= 1e-2);
  // first-order gap: halving dt roughly halves it
  CHECK(std::log2(gaps[0] / gaps[1]) == doctest::Approx(1.0).epsilon(0.15));
}

TEST_CASE("strong convergence on a shared refined path") {
  auto g = make_grid(2, 16);
  const XiEnsemble xi = make_xi_ensemble(g, 1, 0.5, 0.5, 3);
  OperatorWorkspace ws(g);
  GalerkinStepper st(g, 10.0, xi, 1.0, false, true);
  std::mt19937_64 rng(6);
  const SpectralField u0 = st.project(random_field(g, rng, {1.0, 10.0, 0.0, 1.0}));
  const int paths = 32;
  const double horizon = 0.2;
  double err_em[2] = {0, 0}, err_mil[2] = {0, 0};
  for (int k = 0; k < paths; ++k) {
    const BrownianPath p0 = sample_increments(static_cast<int>(horizon / 4e-3), 1, 4e-3, 1000 + k);
    const BrownianPath p1 = refine(p0);
    const BrownianPath p2 = refine(refine(refine(p1)));
    const SpectralField ref = run_to_end(st, Scheme::milstein_ito, u0, p2, ws);
    const BrownianPath* coarse[2] = {&p0, &p1};
    for (int l = 0; l < 2; ++l) {
      const SpectralField em = run_to_end(st, Scheme::euler_maruyama_ito, u0, *coarse[l], ws);
      const SpectralField mil = run_to_end(st, Scheme::milstein_ito, u0, *coarse[l], ws);
      err_em[l] += std::pow(sobolev_norm(em.vec() - ref.vec(), 0), 2);
      err_mil[l] += std::pow(sobolev_norm(mil.vec() - ref.vec(), 0), 2);
    }
  }
  const double order_em = 0.5 * std::log2(err_em[0] / err_em[1]);
  const double order_mil = 0.5 * std::log2(err_mil[0] / err_mil[1]);
  MESSAGE("EM strong order ", order_em, ", Milstein ", order_mil);
  CHECK(order_em == doctest::Approx(0.5).epsilon(0.5));
  CHECK(order_mil >= 0.8);
}

TEST_CASE("divergence-free and mean-free over 1000 noisy steps") {
  auto g = make_grid(2, 16);
  const XiEnsemble xi = make_xi_ensemble(g, 3, 0.5, 0.2, 9);
  OperatorWorkspace ws(g);
  GalerkinStepper st(g, resolve_level(0), xi, 1.0);
  std::mt19937_64 rng(8);
  SpectralField u = random_field(g, rng, {1.0, 20.0, 1.0, 1.0});
  const BrownianPath p = sample_increments(1000, 3, 1e-3, 77);
  for (int s = 0; s < 1000; ++s) {
    u = st.step_euler_maruyama(u, 1e-3, p.at_step(s), ws);
  }
  CHECK(divergence_residual(u) <= 1e-10);
  CHECK(u.vec().at(0, 0) == cplx(0.0));
  CHECK(u.vec().at(1, 0) == cplx(0.0));
  CHECK(symmetry_residual(u) <= 1e-14);
}

TEST_CASE("deterministic energy decays step by step") {
  auto g = make_grid(2, 32);
  const XiEnsemble none(g);
  OperatorWorkspace ws(g);
  GalerkinStepper st(g, resolve_level(0), none, 1.0);
  std::mt19937_64 rng(10);
  SpectralField u = random_field(g, rng, {1.0, 30.0, 1.0, 3.0});
  double e = sobolev_norm(u, 0);
  for (int s = 0; s < 200; ++s) {
    u = st.step_euler_maruyama(u, 1e-3, {}, ws);
    const double next = sobolev_norm(u, 0);
    CHECK(next <= e);
    e = next;
  }
}

TEST_CASE("stopping time") {
  SUBCASE("unreachable threshold runs to the horizon") {
    SimConfig c = base_config();
    c.ic_amplitude = 0.1;
    const TrajectoryRecord r = run_trajectory(c);
    CHECK_FALSE(r.stop.has_value());
    CHECK(r.size() == 101);
    CHECK(r.times.back() == doctest::Approx(0.1));
  }
  SUBCASE("Taylor-Green crossing matches the analytic time") {
    // ||u||_1^2 = a^2 e^{-4 nu t}, ||u||_2^2 = 2 a^2 e^{-4 nu t}, so the
    // functional is a^2 + a^2 (1 - e^{-4 nu s}) / (2 nu) and crosses
    // M + a^2 at s* = -ln(1 - 2 nu M / a^2) / (4 nu).
    SimConfig c = base_config();
    c.resolution = 32;
    c.ic_amplitude = std::sqrt(8.0);
    c.M = 2.0;
    c.horizon = 1.0;
    const TrajectoryRecord r = run_trajectory(c);
    REQUIRE(r.stop.has_value());
    const double s_star = -std::log(1 - 2 * c.M / 8.0) / 4.0;
    CHECK(std::abs(r.stop->time - s_star) <= 2 * c.dt);
    CHECK(r.stop->functional >= c.M + 8.0 * (1 - 1e-12));
    CHECK(r.functional(r.stop->step - 1) < r.threshold);
  }
  SUBCASE("trigger is monotone in M on a shared path") {
    SimConfig c = base_config();
    c.initial = "random";
    c.ic_amplitude = 2.0;
    c.xi_count = 2;
    c.xi_amplitude = 0.3;
    c.horizon = 0.3;
    double last = 0.0;
    for (double M : {1.5, 3.0, 6.0, 12.0}) {
      c.M = M;
      const TrajectoryRecord r = run_trajectory(c);
      const double t = r.stop ? r.stop->time : 1e9;
      CHECK(t >= last);
      last = t;
    }
  }
}

TEST_CASE("record invariants and blow-up functional") {
  SimConfig c = base_config();
  c.initial = "random";
  c.xi_count = 2;
  c.xi_amplitude = 0.2;
  const TrajectoryRecord r = run_trajectory(c);
  for (std::size_t k = 1; k < r.size(); ++k) {
    CHECK(r.sup_n1sq[k] >= r.sup_n1sq[k - 1]);
    CHECK(r.int_n2sq[k] >= r.int_n2sq[k - 1]);
    CHECK(r.sup_n2sq[k] >= r.sup_n2sq[k - 1]);
    CHECK(r.int_n3sq[k] >= r.int_n3sq[k - 1]);
    CHECK(r.functional(k) >= r.functional(k - 1));
  }
  CHECK_THROWS_AS(blowup_functional(TrajectoryRecord{}), std::invalid_argument);

  SimConfig z = base_config();
  z.initial = "zero";
  CHECK(blowup_functional(run_trajectory(z)) == 0.0);

  SUBCASE("single decaying mode matches the analytic integral") {
    auto g = make_grid(2, 16);
    const XiEnsemble none(g);
    OperatorWorkspace ws(g);
    SimConfig s = base_config();
    s.nonlinear = false;
    s.nu = 0.5;
    s.horizon = 1.0;
    const double lam = 5.0;
    const SpectralField u0 = eigenmode(g, {1, 2, 0}, {cplx(2, 0), cplx(-1, 0), cplx(0)});
    const TrajectoryRecord rec = integrate(s, u0, none, sample_increments(1000, 0, s.dt, 1), ws);
    const double n1 = std::pow(sobolev_norm(u0, 1), 2), n2 = std::pow(sobolev_norm(u0, 2), 2);
    const double want = n1 + n2 * (1 - std::exp(-2 * s.nu * lam * s.horizon)) / (2 * s.nu * lam);
    CHECK(blowup_functional(rec) == doctest::Approx(want).epsilon(1e-4));
    const double n3 = std::pow(sobolev_norm(u0, 3), 2);
    const double want_v = n2 + n3 * (1 - std::exp(-2 * s.nu * lam * s.horizon)) / (2 * s.nu * lam);
    CHECK(blowup_functional(rec, Monitor::V) == doctest::Approx(want_v).epsilon(1e-4));
  }
}

TEST_CASE("snapshots are written at the cadence") {
  const auto dir = std::filesystem::temp_directory_path() / "salt_test_snapshots";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  SimConfig c = base_config();
  c.horizon = 0.01;
  c.snapshot_every = 5;
  const TrajectoryRecord r = run_trajectory(c, dir);
  REQUIRE(r.snapshots.size() == 3);
  CHECK(r.snapshots[2] == "snap_000010.bin");
  const Snapshot s = read_snapshot(dir / r.snapshots[2]);
  CHECK(s.time == doctest::Approx(0.01));
  CHECK(sobolev_norm(s.field, 0) == doctest::Approx(r.n0.back()).epsilon(1e-15));
  std::filesystem::remove_all(dir);
}
