#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "salt/noise.hpp"
#include "salt/operators.hpp"

using namespace salt;

namespace {

const cplx kSin(0, -0.5);  // coefficient of sin(k.x) at +k
const cplx kCos(0.5, 0);

void add_mode(SpectralVector& v, int c, const Wavevector& k, cplx a) {
  const auto& g = v.grid();
  const std::size_t i = g.index_of(k);
  v.at(c, i) += a;
  v.at(c, g.mirror(i)) += std::conj(a);
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// phi = (sin y, 0), psi = (0, sin x)
SpectralField shear_y(const GridPtr& g) { return eigenmode(g, {0, 1, 0}, {kSin, cplx(0), cplx(0)}); }
SpectralField shear_x(const GridPtr& g) { return eigenmode(g, {1, 0, 0}, {cplx(0), kSin, cplx(0)}); }

}  // namespace

TEST_CASE("transport of single modes matches the trigonometric product") {
  auto g = make_grid(2, 16);
  OperatorWorkspace ws(g);
  const SpectralField phi = shear_y(g), psi = shear_x(g);

  // L_phi psi = sin y d_x (0, sin x) = (0, cos x sin y)
  const SpectralVector a = advect(phi, psi, ws);
  // L_psi phi = sin x d_y (sin y, 0) = (sin x cos y, 0)
  const SpectralVector b = advect(psi, phi, ws);
  // T_phi psi = sum_j psi^j grad phi^j = sin x grad(0) = 0
  const SpectralVector s1 = stretch(phi, psi, ws);
  // T_psi psi = sin x grad(sin x) = (sin x cos x, 0)
  const SpectralVector s2 = stretch(psi, psi, ws);

  std::vector<double> ax(g->size()), ay(g->size()), bx(g->size()), s2x(g->size());
  for (std::size_t p = 0; p < g->size(); ++p) {
    const auto x = oracle::point(*g, p);
    ax[p] = 0.0;
    ay[p] = std::cos(x[0]) * std::sin(x[1]);
    bx[p] = std::sin(x[0]) * std::cos(x[1]);
    s2x[p] = std::sin(x[0]) * std::cos(x[0]);
  }
  CHECK(max_abs_diff(oracle::synthesize_component(a, 0), ax) <= 1e-14);
  CHECK(max_abs_diff(oracle::synthesize_component(a, 1), ay) <= 1e-14);
  CHECK(max_abs_diff(oracle::synthesize_component(b, 0), bx) <= 1e-14);
  CHECK(max_abs_diff(oracle::synthesize_component(b, 1), ax) <= 1e-14);
  CHECK(sobolev_norm(s1, 0) <= 1e-15);
  CHECK(max_abs_diff(oracle::synthesize_component(s2, 0), s2x) <= 1e-14);
  CHECK(max_abs_diff(oracle::synthesize_component(s2, 1), ax) <= 1e-14);

  SUBCASE("noise_op is the sum of the two products") {
    const XiEnsemble xi(g, {phi});
    const SpectralVector bu = noise_op(0, psi, xi, ws);
    CHECK(sobolev_norm(bu - a, 0) <= 1e-15);
    CHECK_THROWS_AS(noise_op(1, psi, xi, ws), std::out_of_range);
  }
}

TEST_CASE("transport agrees with direct physical-space products on random band-limited fields") {
  for (int dim : {2, 3}) {
    auto g = make_grid(dim, dim == 2 ? 24 : 12);
    OperatorWorkspace ws(g);
    std::mt19937_64 rng(7 + dim);
    const RandomFieldSpec spec{1.0, dim == 2 ? 20.0 : 6.0, 0.0, 1.0};
    const SpectralField phi = random_field(g, rng, spec);
    const SpectralField psi = random_field(g, rng, spec);
    const SpectralVector adv = advect(phi, psi, ws);
    const SpectralVector str = stretch(phi, psi, ws);
    for (int c = 0; c < dim; ++c) {
      std::vector<double> want_adv(g->size(), 0.0), want_str(g->size(), 0.0);
      for (int j = 0; j < dim; ++j) {
        const auto phij = oracle::synthesize_component(phi, j);
        const auto psij = oracle::synthesize_component(psi, j);
        const auto dj_psic = oracle::synthesize_derivative(psi, c, j);
        const auto dc_phij = oracle::synthesize_derivative(phi, j, c);
        for (std::size_t p = 0; p < g->size(); ++p) {
          want_adv[p] += phij[p] * dj_psic[p];
          want_str[p] += psij[p] * dc_phij[p];
        }
      }
      CHECK(max_abs_diff(oracle::synthesize_component(adv, c), want_adv) <= 1e-12);
      CHECK(max_abs_diff(oracle::synthesize_component(str, c), want_str) <= 1e-12);
    }
  }
}

TEST_CASE("zero inputs give zero") {
  auto g = make_grid(2, 16);
  OperatorWorkspace ws(g);
  std::mt19937_64 rng(1);
  const SpectralField f = random_field(g, rng);
  const SpectralField z(g);
  CHECK(sobolev_norm(advect(z, f, ws), 0) == 0.0);
  CHECK(sobolev_norm(advect(f, z, ws), 0) == 0.0);
  CHECK(sobolev_norm(stretch(z, f, ws), 0) == 0.0);
  CHECK(sobolev_norm(nonlinear_term(z, ws), 0) == 0.0);
  CHECK(sobolev_norm(ito_correction(f, XiEnsemble(g), ws), 0) == 0.0);
  CHECK(sobolev_norm(drift(z, XiEnsemble(g), 1.0, ws), 0) == 0.0);
  CHECK_THROWS_AS(drift(f, XiEnsemble(g), 0.0, ws), std::invalid_argument);
}

TEST_CASE("cancellation of advection against the advected field") {
  auto g = make_grid(2, 32);
  OperatorWorkspace ws(g);
  std::mt19937_64 rng(30);
  double worst = 0.0, worst_energy = 0.0;
  for (int s = 0; s < 100; ++s) {
    const SpectralField xi = random_field(g, rng, {1.0, 50.0, 1.0, 1.0});
    const SpectralField f = random_field(g, rng, {1.0, 200.0, 1.0, 1.0});
    const double r = std::abs(sobolev_inner(advect(xi, f, ws), f, 0));
    worst = std::max(worst, r / (sobolev_norm(xi, 0) * std::pow(sobolev_norm(f, 1), 2)));
    const double e = std::abs(sobolev_inner(nonlinear_term(f, ws), f, 0));
    worst_energy = std::max(worst_energy, e / (sobolev_norm(f, 0) * sobolev_norm(f, 1) * sobolev_norm(f, 2)));
  }
  CHECK(worst <= 1e-10);
  CHECK(worst_energy <= 1e-10);
}

TEST_CASE("Taylor-Green convective term is a pure gradient") {
  auto g = make_grid(2, 32);
  OperatorWorkspace ws(g);
  const SpectralField tg = taylor_green(g, 1.0);
  const SpectralVector raw = advect(tg, tg, ws);
  CHECK(sobolev_norm(raw, 0) > 0.1);
  CHECK(sobolev_norm(nonlinear_term(tg, ws), 0) <= 1e-15);
  // brute force: u.grad u = -(1/2) grad(cos^2 x + cos^2 y)/... evaluated directly
  std::vector<double> want(g->size());
  for (std::size_t p = 0; p < g->size(); ++p) {
    const auto x = oracle::point(*g, p);
    want[p] = -0.5 * std::sin(2 * x[0]);  // first component of u.grad u
  }
  CHECK(max_abs_diff(oracle::synthesize_component(raw, 0), want) <= 1e-14);

  SUBCASE("drift reduces to heat decay") {
    const double nu = 0.3;
    const SpectralField d = drift(tg, XiEnsemble(g), nu, ws);
    CHECK(sobolev_norm(d.vec() + (2 * nu) * tg.vec(), 0) <= 1e-15);
  }
}

TEST_CASE("bilinearity") {
  auto g = make_grid(2, 32);
  OperatorWorkspace ws(g);
  std::mt19937_64 rng(4);
  const SpectralField phi = random_field(g, rng), p1 = random_field(g, rng), p2 = random_field(g, rng);
  const double a = 0.7, b = -1.9;
  SpectralField comb = p1;
  comb *= a;
  comb.axpy(b, p2);
  for (auto op : {&advect, &stretch}) {
    SpectralVector lhs = op(phi, comb, ws);
    SpectralVector rhs = op(phi, p1, ws);
    rhs *= a;
    rhs.axpy(b, op(phi, p2, ws));
    CHECK(sobolev_norm(lhs - rhs, 0) <= 1e-12 * sobolev_norm(lhs, 0));
    lhs = op(comb, phi, ws);
    rhs = op(p1, phi, ws);
    rhs *= a;
    rhs.axpy(b, op(p2, phi, ws));
    CHECK(sobolev_norm(lhs - rhs, 0) <= 1e-12 * sobolev_norm(lhs, 0));
  }
}

TEST_CASE("doubling the resolution leaves band-limited products unchanged") {
  auto g = make_grid(2, 32), h = make_grid(2, 64);
  OperatorWorkspace wg(g), wh(h);
  std::mt19937_64 rng(12);
  for (int s = 0; s < 5; ++s) {
    const SpectralField phi = random_field(g, rng);
    const SpectralField psi = random_field(g, rng);
    const SpectralVector coarse = advect(phi, psi, wg);
    const SpectralVector fine = advect(oracle::embed(phi, h), oracle::embed(psi, h), wh);
    // restrict the fine result to the coarse band
    SpectralVector fine_in_band = oracle::embed(fine, g);
    for (int c = 0; c < 2; ++c) {
      for (std::size_t i = 0; i < g->size(); ++i) {
        if (!g->in_band(i)) fine_in_band.at(c, i) = 0.0;
      }
    }
    CHECK(sobolev_norm(coarse - fine_in_band, 0) <= 1e-12 * sobolev_norm(coarse, 0));
  }
}

TEST_CASE("double noise application") {
  auto g = make_grid(2, 16);
  OperatorWorkspace ws(g);
  const SpectralField xi_field = shear_y(g);
  const XiEnsemble xi(g, {xi_field});
  const SpectralField u = shear_x(g);

  SUBCASE("hand-computed correction") {
    // B u = (0, cos x sin y); B^2 u = sin y d_x (0, cos x sin y) = (0, -sin x sin^2 y)
    //     = (0, -sin x / 2 + sin(x+2y)/4 + sin(x-2y)/4)
    SpectralVector raw(g);
    add_mode(raw, 1, {1, 0, 0}, -0.5 * kSin);
    add_mode(raw, 1, {1, 2, 0}, 0.25 * kSin);
    add_mode(raw, 1, {1, -2, 0}, 0.25 * kSin);
    CHECK(sobolev_norm(noise_op_twice(0, u, xi, ws, false) - raw, 0) <= 1e-15);
    SpectralField want = leray_project(raw);
    want *= 0.5;
    CHECK(sobolev_norm(ito_correction(u, xi, ws).vec() - want.vec(), 0) <= 1e-15);
  }

  SUBCASE("intermediate projection does not change P B^2 u") {
    auto g2 = make_grid(2, 32);
    OperatorWorkspace ws2(g2);
    std::mt19937_64 rng(17);
    const XiEnsemble ens = make_xi_ensemble(g2, 3, 0.5, 0.3, 5);
    for (int s = 0; s < 20; ++s) {
      const SpectralField f = random_field(g2, rng);
      for (std::size_t i = 0; i < ens.size(); ++i) {
        const SpectralField plain = leray_project(noise_op_twice(i, f, ens, ws2, false));
        const SpectralField pre = leray_project(noise_op_twice(i, f, ens, ws2, true));
        CHECK(sobolev_norm(plain.vec() - pre.vec(), 0) <= 1e-10 * sobolev_norm(plain, 0));
      }
    }
  }
}

TEST_CASE("noise commutator") {
  auto g = make_grid(2, 16);
  OperatorWorkspace ws(g);
  std::mt19937_64 rng(2);
  const SpectralField f = random_field(g, rng);
  CHECK_THROWS_AS(noise_commutator(0, f, XiEnsemble(g), ws), std::out_of_range);

  // xi = (sin y, 0), f = (0, sin(m x)): B f = (0, m cos(mx) sin y),
  // Lap B f = -(m^2 + 1) B f, B Lap f = -m^2 B f, so [Lap, B] f = -B f.
  const XiEnsemble xi(g, {shear_y(g)});
  for (int m : {1, 2, 4}) {
    const SpectralField fm = eigenmode(g, {m, 0, 0}, {cplx(0), kSin, cplx(0)});
    const SpectralVector bf = noise_op(0, fm, xi, ws);
    CHECK(sobolev_norm(noise_commutator(0, fm, xi, ws) + bf, 0) <= 1e-13);
  }
}
