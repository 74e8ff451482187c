#include <doctest.h>

#include <cmath>
#include <cstring>
#include <limits>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "salt/field.hpp"
#include "salt/snapshot.hpp"

using namespace salt;

TEST_CASE("make_grid") {
  SUBCASE("2D 32 points uses |k_j| <= 10 under the 2/3 rule") {
    auto g = make_grid(2, 32);
    CHECK(g->size() == 32u * 32u);
    CHECK(g->cutoff() == 10);
    CHECK(g->retained_count() == 21u * 21u - 1u);
  }
  SUBCASE("3D 16 points") {
    auto g = make_grid(3, 16);
    CHECK(g->size() == 16u * 16u * 16u);
    CHECK(g->cutoff() == 5);
  }
  SUBCASE("rejections") {
    CHECK_THROWS_AS(make_grid(2, 5), std::invalid_argument);
    CHECK_THROWS_AS(make_grid(2, 2), std::invalid_argument);
    CHECK_THROWS_AS(make_grid(4, 16), std::invalid_argument);
    CHECK_THROWS_AS(make_grid(1, 16), std::invalid_argument);
  }
  SUBCASE("wavevector bookkeeping") {
    auto g = make_grid(3, 8);
    const std::size_t i = g->index_of({1, -2, 3});
    CHECK(g->wavevector(i) == Wavevector{1, -2, 3});
    CHECK(g->lambda(i) == 14.0);
    CHECK(g->wavevector(g->mirror(i)) == Wavevector{-1, 2, -3});
    CHECK_THROWS(g->index_of({4, 0, 0}));
  }
}

TEST_CASE("leray_project") {
  auto g = make_grid(2, 32);
  std::mt19937_64 rng(1);

  SUBCASE("gradients are annihilated") {
    // grad p has coefficients i k p_k
    SpectralVector grad(g);
    std::normal_distribution<double> normal;
    for (std::size_t i = 0; i < g->size(); ++i) {
      const std::size_t m = g->mirror(i);
      if (!g->retained(i) || m <= i) continue;
      const cplx p(normal(rng), normal(rng));
      for (int c = 0; c < 2; ++c) {
        grad.at(c, i) = cplx(0, 1) * static_cast<double>(g->wavenumber(i, c)) * p;
        grad.at(c, m) = std::conj(grad.at(c, i));
      }
    }
    CHECK(sobolev_norm(leray_project(grad), 0) <= 1e-14 * sobolev_norm(grad, 0));
  }

  SUBCASE("divergence-free input is unchanged coefficientwise") {
    const SpectralField f = random_field(g, rng);
    const SpectralField pf = leray_project(f);
    for (std::size_t k = 0; k < f.vec().data().size(); ++k) {
      CHECK(std::abs(pf.vec().data()[k] - f.vec().data()[k]) <= 1e-15);
    }
  }

  SUBCASE("3D single mode k=(1,0,0), v=(1,1,0) -> (0,1,0)") {
    auto g3 = make_grid(3, 8);
    SpectralVector v(g3);
    const std::size_t i = g3->index_of({1, 0, 0});
    v.at(0, i) = 1.0;
    v.at(1, i) = 1.0;
    v.at(0, g3->mirror(i)) = 1.0;
    v.at(1, g3->mirror(i)) = 1.0;
    const SpectralField p = leray_project(v);
    CHECK(p.vec().at(0, i) == cplx(0.0));
    CHECK(p.vec().at(1, i) == cplx(1.0));
    CHECK(p.vec().at(2, i) == cplx(0.0));
  }

  SUBCASE("zero mean and aliased band are removed") {
    SpectralVector v = random_vector(g, rng);
    v.at(0, 0) = 3.0;
    const std::size_t alias = g->index_of({12, 0, 0});
    v.at(1, alias) = 1.0;
    v.at(1, g->mirror(alias)) = 1.0;
    const SpectralField p = leray_project(v);
    CHECK(p.vec().at(0, 0) == cplx(0.0));
    CHECK(p.vec().at(1, alias) == cplx(0.0));
  }
}

TEST_CASE("leray_project properties on random inputs") {
  for (int dim : {2, 3}) {
    auto g = make_grid(dim, dim == 2 ? 32 : 8);
    std::mt19937_64 rng(100 + dim);
    for (int s = 0; s < 100; ++s) {
      const SpectralVector f = random_vector(g, rng);
      const SpectralVector h = random_vector(g, rng);
      const SpectralField pf = leray_project(f);
      const SpectralField ph = leray_project(h);
      // idempotent
      const SpectralField ppf = leray_project(pf);
      CHECK(sobolev_norm(ppf.vec() - pf.vec(), 0) <= 1e-15 * sobolev_norm(f, 0));
      // self-adjoint
      const double lhs = sobolev_inner(pf, h, 0);
      const double rhs = sobolev_inner(f, ph, 0);
      CHECK(std::abs(lhs - rhs) <= 1e-12 * sobolev_norm(f, 0) * sobolev_norm(h, 0));
      CHECK(divergence_residual(pf) <= 1e-12);
      CHECK(symmetry_residual(pf) == 0.0);
      CHECK_NOTHROW(SpectralField::checked(pf.vec()));
    }
  }
}

TEST_CASE("checked factory rejects broken invariants") {
  auto g = make_grid(2, 16);
  std::mt19937_64 rng(3);
  SpectralVector v = random_vector(g, rng);  // not divergence-free
  CHECK_THROWS_WITH_AS(SpectralField::checked(v), "field is not divergence-free", std::invalid_argument);
  SpectralVector mean(g);
  mean.at(0, 0) = 1.0;
  CHECK_THROWS_WITH_AS(SpectralField::checked(mean), "field has a nonzero mean", std::invalid_argument);
  SpectralVector asym(g);
  const std::size_t i = g->index_of({0, 1, 0});
  asym.at(0, i) = 1.0;  // missing conjugate partner
  CHECK_THROWS_WITH_AS(SpectralField::checked(asym), "field is not real (conjugate symmetry)",
                       std::invalid_argument);
}

TEST_CASE("sobolev_inner") {
  auto g = make_grid(2, 32);
  SUBCASE("unit eigenmode pair at lambda = 5 has norm 5^{m/2}") {
    // amplitude orthogonal to k = (1, 2); |a|^2 = 1/2 gives unit L2 norm
    const double s = 1.0 / std::sqrt(10.0);
    const SpectralField f = eigenmode(g, {1, 2, 0}, {cplx(2 * s, 0), cplx(-s, 0), cplx(0)});
    for (int m = 0; m <= 3; ++m) {
      CHECK(sobolev_norm(f, m) == doctest::Approx(std::pow(5.0, 0.5 * m)).epsilon(1e-14));
    }
  }
  SUBCASE("zero field") {
    SpectralField z(g);
    for (int m = 0; m <= 3; ++m) CHECK(sobolev_norm(z, m) == 0.0);
  }
  SUBCASE("Parseval against direct synthesis and grid quadrature") {
    std::mt19937_64 rng(5);
    for (int s = 0; s < 3; ++s) {
      const SpectralField f = random_field(g, rng, {1.0, 40.0, 1.0, 0.7});
      const double ms = oracle::mean_square(f);
      CHECK(std::abs(sobolev_norm(f, 0) * sobolev_norm(f, 0) - ms) <= 1e-10 * ms);
    }
  }
  SUBCASE("grid mismatch and bad index") {
    SpectralField a(make_grid(2, 16)), b(make_grid(2, 32));
    CHECK_THROWS_AS(sobolev_inner(a, b, 0), std::invalid_argument);
    CHECK_THROWS_AS(sobolev_inner(b, b, 4), std::invalid_argument);
  }
}

TEST_CASE("stokes_apply") {
  auto g = make_grid(2, 32);
  const SpectralField f = eigenmode(g, {2, 1, 0}, {cplx(1, 0.5), cplx(-2, -1), cplx(0)});
  const SpectralField af = stokes_apply(f);
  for (std::size_t k = 0; k < f.vec().data().size(); ++k) {
    CHECK(af.vec().data()[k] == 5.0 * f.vec().data()[k]);
  }
  CHECK(sobolev_norm(stokes_apply(SpectralField(g)), 0) == 0.0);

  std::mt19937_64 rng(9);
  for (int s = 0; s < 20; ++s) {
    const SpectralField r = random_field(g, rng);
    const SpectralField ar = stokes_apply(r);
    // independent summation: mode by mode, component innermost
    double direct = 0.0;
    for (std::size_t i = 0; i < g->size(); ++i) {
      for (int c = 0; c < 2; ++c) direct += g->lambda(i) * std::norm(r.vec().at(c, i));
    }
    CHECK(std::abs(sobolev_inner(ar, r, 0) - direct) <= 1e-10 * direct);
    CHECK(std::abs(sobolev_norm(r, 1) * sobolev_norm(r, 1) - direct) <= 1e-10 * direct);
    CHECK(divergence_residual(ar) <= 1e-12);
  }
}

TEST_CASE("StokesSpectrum ordering and shells") {
  auto g = make_grid(2, 32);
  StokesSpectrum spec(*g);
  CHECK(spec.mode_count() == g->retained_count());
  const auto lam = spec.shell_lambdas();
  CHECK(lam[0] == 1.0);
  CHECK(lam[1] == 2.0);
  CHECK(lam[2] == 4.0);
  CHECK(lam[3] == 5.0);
  CHECK(spec.modes_through_lambda(1.0) == 4u);
  CHECK(spec.modes_through_lambda(2.0) == 8u);
  CHECK(spec.is_shell_boundary(8));
  CHECK_FALSE(spec.is_shell_boundary(5));
  for (std::size_t n = 1; n < spec.mode_count(); ++n) CHECK(spec.lambda_of(n) <= spec.lambda_of(n + 1));
}

TEST_CASE("galerkin_project") {
  auto g = make_grid(2, 32);
  StokesSpectrum spec(*g);
  std::mt19937_64 rng(11);
  const SpectralField f = random_field(g, rng);

  SUBCASE("all modes is the identity, zero modes the zero field") {
    const SpectralField all = galerkin_project(f, spec, spec.mode_count());
    CHECK(all.vec().data().size() == f.vec().data().size());
    CHECK(sobolev_norm(all.vec() - f.vec(), 0) == 0.0);
    CHECK(sobolev_norm(galerkin_project(f, spec, 0), 0) == 0.0);
  }
  SUBCASE("two-mode field at lambda 1 and 9") {
    SpectralField two = eigenmode(g, {1, 0, 0}, {cplx(0), cplx(0.3, 0.1), cplx(0)});
    two += eigenmode(g, {0, 3, 0}, {cplx(0.7, -0.2), cplx(0), cplx(0)});
    const std::size_t n = spec.modes_through_lambda(1.0);
    const SpectralField low = galerkin_project(two, spec, n);
    const SpectralVector tail = two.vec() - low.vec();
    CHECK(sobolev_norm(tail, 1) == doctest::Approx(3.0 * sobolev_norm(tail, 0)).epsilon(1e-14));
    CHECK(sobolev_norm(low, 0) == doctest::Approx(std::sqrt(2 * (0.09 + 0.01))).epsilon(1e-14));
  }
  SUBCASE("idempotent and orthogonal in every Sobolev product") {
    const std::size_t n = spec.modes_through_lambda(13.0);
    const SpectralField p = galerkin_project(f, spec, n);
    CHECK(sobolev_norm(galerkin_project(p, spec, n).vec() - p.vec(), 0) == 0.0);
    const SpectralVector rest = f.vec() - p.vec();
    for (int m = 0; m <= 3; ++m) CHECK(std::abs(sobolev_inner(p, rest, m)) <= 1e-14 * sobolev_norm(f, m) * sobolev_norm(f, m));
  }
  SUBCASE("commutes with the Stokes operator") {
    const std::size_t n = spec.modes_through_lambda(20.0);
    const SpectralField a = galerkin_project(stokes_apply(f), spec, n);
    const SpectralField b = stokes_apply(galerkin_project(f, spec, n));
    CHECK(sobolev_norm(a.vec() - b.vec(), 0) == 0.0);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(galerkin_project(f, spec, spec.mode_count() + 1), std::invalid_argument);
    CHECK_THROWS_AS(galerkin_project(f, spec, 5), std::invalid_argument);
  }
}

TEST_CASE("tail_bound_mu") {
  auto g = make_grid(2, 32);
  StokesSpectrum spec(*g);
  CHECK(tail_bound_mu(spec, spec.modes_through_lambda(4.0)) == doctest::Approx(std::sqrt(5.0)));
  CHECK(tail_bound_mu(spec, 0) == 1.0);
  CHECK(tail_bound_mu(spec, spec.mode_count()) == std::numeric_limits<double>::infinity());

  SUBCASE("equality iff the tail sits on the first excluded shell") {
    const std::size_t n = spec.modes_through_lambda(4.0);
    const double mu = tail_bound_mu(spec, n);
    const SpectralField on_shell = eigenmode(g, {1, 2, 0}, {cplx(2, 1), cplx(-1, -0.5), cplx(0)});
    CHECK(sobolev_norm(on_shell, 0) == doctest::Approx(sobolev_norm(on_shell, 1) / mu).epsilon(1e-14));
    SpectralField mixed = on_shell;
    mixed += eigenmode(g, {1, 1, 0}, {cplx(1, 0), cplx(-1, 0), cplx(0)});
    const SpectralVector tail = mixed.vec() - galerkin_project(mixed, spec, n).vec();
    CHECK(sobolev_norm(tail, 0) < sobolev_norm(mixed, 1) / mu);
  }

  SUBCASE("both tail inequalities on 100 random fields across levels") {
    std::mt19937_64 rng(21);
    for (int s = 0; s < 100; ++s) {
      const SpectralField f = random_field(g, rng);
      for (std::size_t sh : {0u, 2u, 5u, 10u, 20u}) {
        const std::size_t n = spec.modes_through_shell(sh);
        const double mu = tail_bound_mu(spec, n);
        const SpectralVector tail = f.vec() - galerkin_project(f, spec, n).vec();
        CHECK(sobolev_norm(tail, 0) <= sobolev_norm(f, 1) / mu * (1 + 1e-12));
        CHECK(sobolev_norm(tail, 1) <= sobolev_norm(f, 2) / mu * (1 + 1e-12));
        CHECK(sobolev_norm(f, 0) <= sobolev_norm(f, 1));
        CHECK(sobolev_norm(f, 1) <= sobolev_norm(f, 2));
      }
    }
  }
}

TEST_CASE("taylor_green coefficients") {
  auto g = make_grid(2, 16);
  const SpectralField tg = taylor_green(g, 1.0);
  CHECK(sobolev_norm(tg, 0) * sobolev_norm(tg, 0) == doctest::Approx(0.5));
  const auto u = oracle::synthesize_component(tg, 0);
  const auto v = oracle::synthesize_component(tg, 1);
  for (std::size_t p = 0; p < g->size(); ++p) {
    const auto x = oracle::point(*g, p);
    CHECK(u[p] == doctest::Approx(-std::cos(x[0]) * std::sin(x[1])).epsilon(1e-13));
    CHECK(v[p] == doctest::Approx(std::sin(x[0]) * std::cos(x[1])).epsilon(1e-13));
  }
}

TEST_CASE("snapshot format") {
  auto g = make_grid(2, 8);
  std::mt19937_64 rng(2);
  const SpectralField f = random_field(g, rng);
  std::stringstream ss;
  write_snapshot(ss, f, 0.125);
  const std::string bytes = ss.str();
  REQUIRE(bytes.size() == 8 + 4 + 4 + 8 + 2 * 64 * 16);
  CHECK(bytes.substr(0, 8) == "SALTFLD1");
  CHECK(bytes[8] == 2);
  CHECK(bytes[12] == 8);
  double t;
  std::memcpy(&t, bytes.data() + 16, 8);
  CHECK(t == 0.125);
  double first_re;
  std::memcpy(&first_re, bytes.data() + 24 + 16 * 1, 8);  // component 0, wavevector index 1
  CHECK(first_re == f.vec().at(0, 1).real());

  const Snapshot back = read_snapshot(ss);
  CHECK(back.time == 0.125);
  CHECK(back.field.grid().same_shape(*g));
  CHECK(std::equal(back.field.data().begin(), back.field.data().end(), f.vec().data().begin()));

  std::stringstream bad("SALTFLD2xxxx");
  CHECK_THROWS_AS(read_snapshot(bad), std::runtime_error);
}
