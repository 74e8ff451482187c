#include "salt/assumptions.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

namespace salt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSlopeLimit = 0.1;

// Magnitudes |phi|_U of the sweep: 1e-2 ... 1e2 in half decades.
const std::vector<double>& sweep_magnitudes() {
  static const std::vector<double> m = [] {
    std::vector<double> v;
    for (int e = -4; e <= 4; ++e) v.push_back(std::pow(10.0, 0.5 * e));
    return v;
  }();
  return m;
}

// Galerkin levels the sample suite is spread over.
const double kLevels[] = {2.0, 8.0, 32.0, kInf};

bool all_finite(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

double max_of(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, x);
  return m;
}

double sq(double x) { return x * x; }

SpectralField scaled(SpectralField f, double s) {
  f *= s;
  return f;
}

// A random field in V_n for the level chosen by index, unit U norm.
SpectralField sample_shape(const GridPtr& g, std::mt19937_64& rng, std::size_t index) {
  std::uniform_real_distribution<double> decay(1.0, 4.0);
  const double level = kLevels[index % std::size(kLevels)];
  SpectralField f = random_field(g, rng, {1.0, level, decay(rng), 1.0});
  return scaled(f, 1.0 / sobolev_norm(f, 1));
}

struct Operators {
  const XiEnsemble& xi;
  double nu;
  OperatorWorkspace& ws;

  SpectralField A(const SpectralField& phi) const { return drift(phi, xi, nu, ws); }
  SpectralField A_lin(const SpectralField& phi) const {
    SpectralField out = ito_correction(phi, xi, ws);
    out.axpy(-nu, stokes_apply(phi));
    return out;
  }
  SpectralField G(std::size_t i, const SpectralField& phi) const {
    return scaled(leray_project(noise_op(i, phi, xi, ws)), -1.0);
  }
};

InequalityAudit make_audit(std::string id, std::string label, AuditKind kind = AuditKind::check) {
  InequalityAudit a;
  a.id = std::move(id);
  a.label = std::move(label);
  a.kind = kind;
  return a;
}

void push(InequalityAudit& a, double lhs, double rhs) {
  a.lhs.push_back(lhs);
  a.rhs.push_back(rhs);
  a.ratio.push_back(rhs > 0.0 ? lhs / rhs : (lhs == 0.0 ? 0.0 : kInf));
}

// Fill an audit by sweeping every shape over the magnitude grid. The trend
// statistic is the largest per-shape slope of log(ratio) against
// log(magnitude) over magnitudes >= 1, where unbounded growth would show.
void sweep(InequalityAudit& a, const std::vector<SpectralField>& shapes,
           const std::function<std::pair<double, double>(std::size_t, double)>& eval) {
  double worst = -kInf;
  for (std::size_t j = 0; j < shapes.size(); ++j) {
    std::vector<double> x, y;
    for (double m : sweep_magnitudes()) {
      const auto [l, r] = eval(j, m);
      push(a, l, r);
      if (m >= 1.0 && a.ratio.back() > 0.0 && std::isfinite(a.ratio.back())) {
        x.push_back(std::log(m));
        y.push_back(std::log(a.ratio.back()));
      }
    }
    if (x.size() >= 2) worst = std::max(worst, ols_slope(x, y));
  }
  a.c_hat = max_of(a.ratio);
  a.slope = std::isfinite(worst) ? worst : 0.0;
  a.tolerance = kSlopeLimit;
  a.pass = all_finite(a.ratio) && *a.slope <= kSlopeLimit;
  if (a.note.empty()) {
    a.note = "pass iff all ratios finite and the largest per-shape log-log slope over |phi|_U >= 1 is <= 0.1";
  }
}

std::vector<SpectralField> shapes_for(const AuditContext& ctx, std::mt19937_64& rng, int count) {
  std::vector<SpectralField> out;
  for (int j = 0; j < count; ++j) out.push_back(sample_shape(ctx.grid, rng, static_cast<std::size_t>(j)));
  return out;
}

int sweep_shapes(const AuditContext& ctx) { return std::max(2, ctx.samples / static_cast<int>(sweep_magnitudes().size())); }

AssumptionReport new_report(std::string name, const AuditContext& ctx) {
  AssumptionReport r;
  r.name = std::move(name);
  r.seed = ctx.seed;
  r.dim = ctx.grid->dim();
  r.resolution = ctx.grid->resolution();
  r.exponents = ctx.exponents;
  return r;
}

std::uint64_t audit_seed(const AuditContext& ctx, std::uint64_t which) { return derive_seed(ctx.seed, kSeedAudit, which); }

// -LHS_lin / |phi|_V^2 for the Galerkin coercivity form in H.
double coercive_kappa(const Operators& ops, const SpectralField& phi, double level) {
  double lhs = 2.0 * sobolev_inner(truncate_to_lambda(ops.A_lin(phi), level), phi, 2);
  for (std::size_t i = 0; i < ops.xi.size(); ++i) lhs += sq(sobolev_norm(truncate_to_lambda(ops.G(i, phi), level), 2));
  return -lhs / sq(sobolev_norm(phi, 3));
}

// -(2<A_lin w, w>_U + sum |G_i w|_U^2) / |w|_H^2.
double pair_kappa(const Operators& ops, const SpectralField& w) {
  double lhs = 2.0 * sobolev_inner(ops.A_lin(w), w, 1);
  for (std::size_t i = 0; i < ops.xi.size(); ++i) lhs += sq(sobolev_norm(ops.G(i, w), 1));
  return -lhs / sq(sobolev_norm(w, 2));
}

// Field supported on the single shell |k|^2 = lambda with random amplitudes.
SpectralField shell_field(const GridPtr& g, double lambda, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  SpectralVector v(g);
  for (std::size_t i = 0; i < g->size(); ++i) {
    const std::size_t m = g->mirror(i);
    if (!g->retained(i) || m <= i || g->lambda(i) != lambda) continue;
    for (int c = 0; c < g->dim(); ++c) {
      v.at(c, i) = cplx(normal(rng), normal(rng));
      v.at(c, m) = std::conj(v.at(c, i));
    }
  }
  return leray_project(v);
}

}  // namespace

std::string to_string(AuditKind k) {
  switch (k) {
    case AuditKind::check:
      return "check";
    case AuditKind::control:
      return "control";
    case AuditKind::diagnostic:
      return "diagnostic";
  }
  return "?";
}

bool InequalityAudit::as_expected() const {
  switch (kind) {
    case AuditKind::check:
      return pass;
    case AuditKind::control:
      return !pass;
    case AuditKind::diagnostic:
      return true;
  }
  return false;
}

bool AssumptionReport::pass() const {
  return std::all_of(audits.begin(), audits.end(), [](const InequalityAudit& a) { return a.as_expected(); });
}

const InequalityAudit& AssumptionReport::audit(const std::string& id) const {
  for (const auto& a : audits) {
    if (a.id == id) return a;
  }
  throw std::out_of_range("no audit '" + id + "' in report " + name);
}

double ols_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("ols_slope needs two or more points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (sxx == 0.0) throw std::invalid_argument("ols_slope: x values are all equal");
  return sxy / sxx;
}

double K1(const SpectralVector& phi, const Exponents& e) { return 1.0 + std::pow(sobolev_norm(phi, 1), e.p); }

double K2(const SpectralVector& phi, const SpectralVector& psi, const Exponents& e) {
  return 1.0 + std::pow(sobolev_norm(phi, 1), e.p) + std::pow(sobolev_norm(psi, 1), e.q);
}

double Ktilde1(const SpectralVector& phi, const Exponents& e) {
  return K1(phi, e) + std::pow(sobolev_norm(phi, 2), e.p_tilde);
}

double Ktilde2(const SpectralVector& phi, const SpectralVector& psi, const Exponents& e) {
  return K2(phi, psi, e) + std::pow(sobolev_norm(phi, 2), e.p_tilde) + std::pow(sobolev_norm(psi, 2), e.q_tilde);
}

AuditContext make_audit_context(const SimConfig& cfg, const GridPtr& grid, const XiEnsemble& xi) {
  AuditContext c;
  c.grid = grid;
  c.xi = &xi;
  c.nu = cfg.nu;
  c.samples = cfg.audit_samples;
  c.seed = cfg.seed;
  c.exponents = {cfg.p, cfg.q, cfg.p_tilde, cfg.q_tilde};
  c.kappa_min = cfg.kappa_min;
  c.xi_count = cfg.audit_xi_count;
  c.xi_decay = cfg.xi_decay;
  c.xi_amplitude = cfg.xi_amplitude;
  c.xi_max_lambda = cfg.xi_max_lambda;
  c.xi_seed = derive_seed(cfg.seed, kSeedXi);
  return c;
}

AssumptionReport check_cancellation(const GridPtr& grid, std::uint64_t seed, int samples) {
  if (samples < 1) throw std::invalid_argument("cancellation audit needs at least one sample");
  AssumptionReport r;
  r.name = "cancellation";
  r.seed = seed;
  r.dim = grid->dim();
  r.resolution = grid->resolution();
  OperatorWorkspace ws(grid);
  std::mt19937_64 rng(derive_seed(seed, kSeedAudit, 1));

  auto residual = [&](InequalityAudit& a, const SpectralVector& xi, const SpectralField& phi) {
    const double lhs = std::abs(sobolev_inner(advect(xi, phi, ws), phi, 0));
    push(a, lhs, sobolev_norm(xi, 0) * sq(sobolev_norm(phi, 1)));
  };

  InequalityAudit a = make_audit("cancellation", "|<L_xi phi, phi>_0| / (|xi|_0 |phi|_1^2), divergence-free xi");
  InequalityAudit broken =
      make_audit("cancellation-broken", "same residual with a non-solenoidal xi (expected to fail)", AuditKind::control);
  for (int s = 0; s < samples; ++s) {
    std::uniform_real_distribution<double> decay(0.0, 3.0);
    const SpectralField xi = random_field(grid, rng, {1.0, kInf, decay(rng), 1.0});
    const SpectralField phi = random_field(grid, rng, {1.0, kInf, decay(rng), 1.0});
    residual(a, xi, phi);
    const SpectralVector bad = random_vector(grid, rng, {1.0, kInf, decay(rng), 1.0});
    residual(broken, bad, phi);
  }
  // phi = 0 gives exactly zero
  residual(a, random_field(grid, rng), SpectralField(grid));
  for (InequalityAudit* x : {&a, &broken}) {
    x->c_hat = max_of(x->ratio);
    x->tolerance = 1e-10;
    x->pass = all_finite(x->ratio) && x->c_hat <= 1e-10;
  }
  a.note = "pass iff the largest scaled residual is <= 1e-10";
  broken.note = "non-solenoidal xi breaks the integration by parts; must exceed 1e-10";
  r.audits = {std::move(a), std::move(broken)};
  return r;
}

AssumptionReport check_growth_bounds(const AuditContext& ctx) {
  AssumptionReport r = new_report("growth_bounds", ctx);
  OperatorWorkspace ws(ctx.grid);
  const Operators ops{*ctx.xi, ctx.nu, ws};
  std::mt19937_64 rng(audit_seed(ctx, 2));
  const auto shapes = shapes_for(ctx, rng, sweep_shapes(ctx));
  const Exponents& e = ctx.exponents;

  auto growth_v = [&](const Exponents& ex) {
    return [&, ex](std::size_t j, double m) {
      const SpectralField phi = scaled(shapes[j], m);
      double lhs = sq(sobolev_norm(ops.A(phi), 1));
      for (std::size_t i = 0; i < ops.xi.size(); ++i) lhs += sq(sobolev_norm(ops.G(i, phi), 2));
      return std::make_pair(lhs, K1(phi, ex) * (1.0 + sq(sobolev_norm(phi, 3))));
    };
  };

  InequalityAudit growth = make_audit("growth-V", "|A(phi)|_U^2 + sum |G_i(phi)|_H^2 <= c K(phi) [1 + |phi|_V^2]");
  sweep(growth, shapes, growth_v(e));

  InequalityAudit control = make_audit("growth-V-p0", "growth-V with p = 0 (expected to fail)", AuditKind::control);
  Exponents flat = e;
  flat.p = 0.0;
  sweep(control, shapes, growth_v(flat));
  control.note = "with p = 0 the quartic nonlinearity outgrows K(phi) [1 + |phi|_V^2]; must fail";

  InequalityAudit a17 =
      make_audit("growth-H", "|A(phi)|_X^2 + sum |G_i(phi)|_U^2 <= c K(phi) [1 + |phi|_H^2]");
  sweep(a17, shapes, [&](std::size_t j, double m) {
    const SpectralField phi = scaled(shapes[j], m);
    double lhs = sq(sobolev_norm(ops.A(phi), 0));
    for (std::size_t i = 0; i < ops.xi.size(); ++i) lhs += sq(sobolev_norm(ops.G(i, phi), 1));
    return std::make_pair(lhs, K1(phi, e) * (1.0 + sq(sobolev_norm(phi, 2))));
  });

  // Without noise: |P L_phi phi + nu A phi|_U against |phi|_2 |phi|_3 + nu |phi|_3.
  InequalityAudit alg = make_audit("algebra", "|P L_phi phi + nu A phi|_U <= c (|phi|_2 |phi|_3 + nu |phi|_3)");
  sweep(alg, shapes, [&](std::size_t j, double m) {
    const SpectralField phi = scaled(shapes[j], m);
    SpectralField v = nonlinear_term(phi, ws);
    v.axpy(ctx.nu, stokes_apply(phi));
    const double n3 = sobolev_norm(phi, 3);
    return std::make_pair(sobolev_norm(v, 1), sobolev_norm(phi, 2) * n3 + ctx.nu * n3);
  });

  r.audits = {std::move(growth), std::move(control), std::move(a17), std::move(alg)};
  return r;
}

AssumptionReport check_coercive_inequality(const AuditContext& ctx) {
  AssumptionReport r = new_report("coercivity", ctx);
  OperatorWorkspace ws(ctx.grid);
  const Operators ops{*ctx.xi, ctx.nu, ws};
  const XiEnsemble none(ctx.grid);
  const Operators stokes{none, ctx.nu, ws};
  std::mt19937_64 rng(audit_seed(ctx, 3));

  std::vector<SpectralField> suite;
  std::vector<double> level_of;
  for (int s = 0; s < ctx.samples; ++s) {
    std::uniform_real_distribution<double> mag(-1.0, 1.0);
    suite.push_back(scaled(sample_shape(ctx.grid, rng, static_cast<std::size_t>(s)), std::pow(10.0, mag(rng))));
    level_of.push_back(kLevels[static_cast<std::size_t>(s) % std::size(kLevels)]);
  }

  InequalityAudit pure = make_audit("coercive-stokes", "xi-free linear part: kappa_hat = 2 nu");
  InequalityAudit lin = make_audit(
      "coercive", "2<P_n A(phi), phi>_H + sum |P_n G_i(phi)|_H^2 <= c K2~(phi)[1 + |phi|_H^2] - kappa |phi|_V^2");
  InequalityAudit nl = make_audit("coercive-nonlinear", "|2<P_n P L_phi phi, phi>_H| <= c |phi|_H^2 |phi|_V");
  double k_pure = kInf, k_lin = kInf;
  for (std::size_t s = 0; s < suite.size(); ++s) {
    const SpectralField& phi = suite[s];
    const double v2 = sq(sobolev_norm(phi, 3));
    const double kp = coercive_kappa(stokes, phi, level_of[s]);
    const double kl = coercive_kappa(ops, phi, level_of[s]);
    push(pure, -kp * v2, v2);
    push(lin, -kl * v2, v2);
    k_pure = std::min(k_pure, kp);
    k_lin = std::min(k_lin, kl);
    const double n = std::abs(2.0 * sobolev_inner(truncate_to_lambda(nonlinear_term(phi, ws), level_of[s]), phi, 2));
    push(nl, n, sq(sobolev_norm(phi, 2)) * sobolev_norm(phi, 3));
  }
  pure.kappa_hat = k_pure;
  pure.c_hat = max_of(pure.ratio);
  pure.tolerance = 1e-10;
  pure.pass = std::abs(k_pure - 2.0 * ctx.nu) <= 1e-10 * 2.0 * ctx.nu;
  pure.note = "kappa_hat must equal 2 nu to 1e-10 relative";
  lin.kappa_hat = k_lin;
  lin.c_hat = max_of(lin.ratio);
  lin.tolerance = ctx.kappa_min;
  lin.pass = std::isfinite(k_lin) && k_lin >= ctx.kappa_min;
  lin.note = "kappa_hat = min -LHS_lin/|phi|_V^2 with the lower-order constant set to 0; pass iff >= kappa_min";
  nl.c_hat = max_of(nl.ratio);
  nl.pass = all_finite(nl.ratio);
  nl.note = "absorbed by Young's inequality into the K2~ term; pass iff finite";

  const auto shapes = shapes_for(ctx, rng, sweep_shapes(ctx));
  InequalityAudit second =
      make_audit("coercive-noise-square", "sum <P_n G_i(phi), phi>_H^2 <= c K2~(phi) [1 + |phi|_H^4]");
  sweep(second, shapes, [&](std::size_t j, double m) {
    const SpectralField phi = scaled(shapes[j], m);
    const double level = kLevels[j % std::size(kLevels)];
    double lhs = 0.0;
    for (std::size_t i = 0; i < ops.xi.size(); ++i) {
      lhs += sq(sobolev_inner(truncate_to_lambda(ops.G(i, phi), level), phi, 2));
    }
    return std::make_pair(lhs, Ktilde1(phi, ctx.exponents) * (1.0 + std::pow(sobolev_norm(phi, 2), 4)));
  });

  InequalityAudit amp = make_audit("coercive-amplitude-sweep", "kappa_hat against xi amplitude", AuditKind::diagnostic);
  if (ctx.xi_count > 0 && ctx.xi_amplitude > 0.0) {
    const std::size_t probe = std::min<std::size_t>(suite.size(), 40);
    double prev_a = 0.0, prev_k = 0.0;
    std::optional<double> crossing;
    for (int j = 0; j <= 12; ++j) {
      const double a = ctx.xi_amplitude * std::ldexp(1.0, j);
      const XiEnsemble ens = make_xi_ensemble(ctx.grid, ctx.xi_count, ctx.xi_decay, a, ctx.xi_seed, ctx.xi_max_lambda);
      const Operators o{ens, ctx.nu, ws};
      double k = kInf;
      for (std::size_t s = 0; s < probe; ++s) k = std::min(k, coercive_kappa(o, suite[s], level_of[s]));
      amp.lhs.push_back(a);
      amp.rhs.push_back(1.0);
      amp.ratio.push_back(k);
      if (!crossing && k < 0.0) {
        // interpolate in log amplitude
        const double t = j == 0 ? 0.0 : prev_k / (prev_k - k);
        crossing = j == 0 ? a : std::exp(std::log(prev_a) + t * (std::log(a) - std::log(prev_a)));
        break;
      }
      prev_a = a;
      prev_k = k;
    }
    amp.kappa_hat = amp.ratio.front();
    amp.pass = true;
    amp.note = crossing ? "lhs holds amplitudes, ratio holds kappa_hat; kappa_hat crosses 0 near amplitude " +
                              std::to_string(*crossing)
                        : "lhs holds amplitudes, ratio holds kappa_hat; no crossing up to 4096x the base amplitude";
    if (crossing) amp.slope = *crossing;
  } else {
    amp.pass = true;
    amp.note = "no noise ensemble configured";
  }

  r.audits = {std::move(pure), std::move(lin), std::move(nl), std::move(second), std::move(amp)};
  return r;
}

AssumptionReport check_local_lipschitz(const AuditContext& ctx) {
  AssumptionReport r = new_report("local_lipschitz", ctx);
  OperatorWorkspace ws(ctx.grid);
  const Operators ops{*ctx.xi, ctx.nu, ws};
  std::mt19937_64 rng(audit_seed(ctx, 4));
  const Exponents& e = ctx.exponents;
  std::vector<double> eps;
  for (int k = -6; k <= 0; ++k) eps.push_back(std::pow(10.0, k));
  const int pairs = std::max(2, ctx.samples / static_cast<int>(eps.size()));

  InequalityAudit drift_lip =
      make_audit("lipschitz-drift-V", "|A(phi) - A(psi)|_X <= c [K(phi,psi) + |phi|_V + |psi|_V] |phi - psi|_H");
  InequalityAudit noise_lip = make_audit("lipschitz-noise", "sum |G_i(phi) - G_i(psi)|_X <= c K(phi,psi) |phi - psi|_H");
  InequalityAudit a2 =
      make_audit("lipschitz-drift-H", "|A(phi) - A(psi)|_X <= c [K(phi,psi) + |phi|_H + |psi|_H] |phi - psi|_H");
  InequalityAudit fre = make_audit("frechet", "difference quotient at eps = 1e-6 against the linearisation");
  InequalityAudit lin = make_audit("linearity", "linear parts: |L(psi) - L(phi)|_X / |psi - phi|_H constant in eps");
  double slope8 = kInf, slope9 = kInf, slope2 = kInf, spread = 0.0;

  for (int p = 0; p < pairs; ++p) {
    const SpectralField phi = sample_shape(ctx.grid, rng, static_cast<std::size_t>(p));
    SpectralField h = sample_shape(ctx.grid, rng, static_cast<std::size_t>(p) + 1);
    h *= 1.0 / sobolev_norm(h, 2);
    const SpectralField a_phi = ops.A(phi);
    const SpectralField a_lin_phi = ops.A_lin(phi);
    std::vector<SpectralField> g_phi;
    for (std::size_t i = 0; i < ops.xi.size(); ++i) g_phi.push_back(ops.G(i, phi));

    std::vector<double> lx, y8, y9, y2, lin_ratio;
    for (double ep : eps) {
      SpectralField psi = phi;
      psi.axpy(ep, h);
      const SpectralField w = psi - phi;
      const double wh = sobolev_norm(w, 2);
      const double k = K2(phi, psi, e);
      const double da = sobolev_norm(ops.A(psi) - a_phi, 0);
      double dg = 0.0;
      for (std::size_t i = 0; i < ops.xi.size(); ++i) dg += sobolev_norm(ops.G(i, psi) - g_phi[i], 0);
      push(drift_lip, da, (k + sobolev_norm(phi, 3) + sobolev_norm(psi, 3)) * wh);
      push(noise_lip, dg, k * wh);
      push(a2, da, (k + sobolev_norm(phi, 2) + sobolev_norm(psi, 2)) * wh);
      lx.push_back(std::log(ep));
      y8.push_back(std::log(drift_lip.ratio.back()));
      y2.push_back(std::log(a2.ratio.back()));
      if (dg > 0.0) y9.push_back(std::log(noise_lip.ratio.back()));
      if (ep >= 1e-3) lin_ratio.push_back(sobolev_norm(ops.A_lin(psi) - a_lin_phi, 0) / wh);
      if (ep == eps.front()) {
        // D A(phi) h = -P(L_phi h + L_h phi) - nu A h + 1/2 sum P B_i^2 h
        SpectralField d = ops.A_lin(h);
        d -= leray_project(advect(phi, h, ws) + advect(h, phi, ws));
        const double exact = sobolev_norm(d, 0);
        push(fre, std::abs(da / ep - exact), exact);
      }
    }
    slope8 = std::min(slope8, ols_slope(lx, y8));
    slope2 = std::min(slope2, ols_slope(lx, y2));
    if (y9.size() == lx.size()) slope9 = std::min(slope9, ols_slope(lx, y9));
    const auto [mn, mx] = std::minmax_element(lin_ratio.begin(), lin_ratio.end());
    spread = std::max(spread, (*mx - *mn) / *mx);
    push(lin, *mx - *mn, *mx);
  }
  // no blow-up as phi -> psi: the ratio may not grow as eps shrinks
  auto finish = [](InequalityAudit& a, double slope) {
    a.c_hat = max_of(a.ratio);
    a.slope = std::isfinite(slope) ? slope : 0.0;
    a.tolerance = -kSlopeLimit;
    a.pass = all_finite(a.ratio) && *a.slope >= -kSlopeLimit;
    a.note = "slope is the smallest per-pair log-log slope against eps; pass iff finite and >= -0.1";
  };
  finish(drift_lip, slope8);
  finish(noise_lip, slope9);
  finish(a2, slope2);
  fre.c_hat = max_of(fre.ratio);
  fre.tolerance = 1e-4;
  fre.pass = all_finite(fre.ratio) && fre.c_hat <= 1e-4;
  fre.note = "ratio is the relative gap of the forward difference quotient; pass iff <= 1e-4";
  lin.c_hat = spread;
  lin.tolerance = 1e-10;
  lin.pass = spread <= 1e-10;
  lin.note = "relative spread over eps in [1e-3, 1] of the Stokes plus correction drift quotient; pass iff <= 1e-10";
  r.audits = {std::move(drift_lip), std::move(noise_lip), std::move(a2), std::move(fre), std::move(lin)};
  return r;
}

AssumptionReport check_monotonicity_pair(const AuditContext& ctx) {
  AssumptionReport r = new_report("monotonicity", ctx);
  OperatorWorkspace ws(ctx.grid);
  const Operators ops{*ctx.xi, ctx.nu, ws};
  const XiEnsemble none(ctx.grid);
  const Operators stokes{none, ctx.nu, ws};
  std::mt19937_64 rng(audit_seed(ctx, 5));
  const Exponents& e = ctx.exponents;

  // one-argument form 2<A(phi), phi>_U + sum |G_i(phi)|_U^2
  auto single = [&](const SpectralField& phi) {
    double v = 2.0 * sobolev_inner(ops.A(phi), phi, 1);
    for (std::size_t i = 0; i < ops.xi.size(); ++i) v += sq(sobolev_norm(ops.G(i, phi), 1));
    return v;
  };
  // two-argument form on the pair, with norm index m
  auto paired = [&](const SpectralField& phi, const SpectralField& psi, int m) {
    const SpectralField w = phi - psi;
    double v = 2.0 * sobolev_inner(ops.A(phi) - ops.A(psi), w, m);
    for (std::size_t i = 0; i < ops.xi.size(); ++i) v += sq(sobolev_norm(ops.G(i, phi) - ops.G(i, psi), m));
    return v;
  };

  InequalityAudit pure = make_audit("monotone-stokes", "xi-free linear part of the U-form: kappa_hat = 2 nu");
  InequalityAudit k35 = make_audit(
      "monotone-U", "2<A(phi)-A(psi), w>_U + sum |G_i(phi)-G_i(psi)|_U^2 <= c K2~(phi,psi) |w|_U^2 - kappa |w|_H^2");
  InequalityAudit nl = make_audit("monotone-nonlinear", "|2<P L_phi phi - P L_psi psi, w>_U| <= c (1 + |phi|_H + |psi|_H) |w|_U |w|_H");
  InequalityAudit noise_sq = make_audit("monotone-noise-square", "sum <G_i(phi)-G_i(psi), w>_U^2 <= c K2~(phi,psi) |w|_U^4");
  InequalityAudit red = make_audit("reduction", "pair form at psi = 0 equals the one-argument form");
  double k_pure = kInf, k_lin = kInf;
  for (int s = 0; s < ctx.samples; ++s) {
    std::uniform_real_distribution<double> mag(-1.0, 1.0);
    const SpectralField phi = scaled(sample_shape(ctx.grid, rng, static_cast<std::size_t>(s)), std::pow(10.0, mag(rng)));
    // every fourth pair puts psi at zero to exercise the one-variable forms
    const SpectralField psi =
        s % 4 == 3 ? SpectralField(ctx.grid) : scaled(sample_shape(ctx.grid, rng, static_cast<std::size_t>(s) + 1), std::pow(10.0, mag(rng)));
    const SpectralField w = phi - psi;
    const double h2 = sq(sobolev_norm(w, 2));
    const double kp = pair_kappa(stokes, w), kl = pair_kappa(ops, w);
    push(pure, -kp * h2, h2);
    push(k35, -kl * h2, h2);
    k_pure = std::min(k_pure, kp);
    k_lin = std::min(k_lin, kl);
    const double n = std::abs(2.0 * sobolev_inner(nonlinear_term(phi, ws) - nonlinear_term(psi, ws), w, 1));
    push(nl, n, (1.0 + sobolev_norm(phi, 2) + sobolev_norm(psi, 2)) * sobolev_norm(w, 1) * sobolev_norm(w, 2));
    double g2 = 0.0;
    for (std::size_t i = 0; i < ops.xi.size(); ++i) g2 += sq(sobolev_inner(ops.G(i, phi) - ops.G(i, psi), w, 1));
    push(noise_sq, g2, Ktilde2(phi, psi, e) * std::pow(sobolev_norm(w, 1), 4));

    const double one = single(phi);
    const double two = paired(phi, SpectralField(ctx.grid), 1);
    push(red, std::abs(one - two), std::abs(one));
  }
  pure.kappa_hat = k_pure;
  pure.c_hat = max_of(pure.ratio);
  pure.tolerance = 1e-10;
  pure.pass = std::abs(k_pure - 2.0 * ctx.nu) <= 1e-10 * 2.0 * ctx.nu;
  pure.note = "kappa_hat must equal 2 nu to 1e-10 relative";
  k35.kappa_hat = k_lin;
  k35.c_hat = max_of(k35.ratio);
  k35.tolerance = ctx.kappa_min;
  k35.pass = std::isfinite(k_lin) && k_lin >= ctx.kappa_min;
  k35.note = "linear part of the difference form; pairs with psi = 0 give the one-variable form; pass iff >= kappa_min";
  nl.c_hat = max_of(nl.ratio);
  nl.pass = all_finite(nl.ratio);
  nl.note = "absorbed into the K2~ term by Young's inequality; pass iff finite";
  noise_sq.c_hat = max_of(noise_sq.ratio);
  noise_sq.pass = all_finite(noise_sq.ratio);
  noise_sq.note = "pass iff finite";
  red.c_hat = max_of(red.ratio);
  red.tolerance = 1e-12;
  red.pass = red.c_hat <= 1e-12;
  red.note = "two code paths; pass iff relative gap <= 1e-12";

  const auto shapes = shapes_for(ctx, rng, 2 * sweep_shapes(ctx));
  const std::size_t half = shapes.size() / 2;
  std::vector<SpectralField> first(shapes.begin(), shapes.begin() + half);
  InequalityAudit coercive_u = make_audit("coercive-U", "2<A(phi), phi>_U + sum |G_i(phi)|_U^2 <= c K(phi) [1 + |phi|_H^2]");
  sweep(coercive_u, first, [&](std::size_t j, double m) {
    const SpectralField phi = scaled(first[j], m);
    return std::make_pair(std::max(0.0, single(phi)), K1(phi, e) * (1.0 + sq(sobolev_norm(phi, 2))));
  });
  InequalityAudit monotone_x = make_audit("monotone-X", "2<A(phi)-A(psi), w>_X + sum |G_i(phi)-G_i(psi)|_X^2 <= c K2~(phi,psi) |w|_X^2");
  sweep(monotone_x, first, [&](std::size_t j, double m) {
    const SpectralField phi = scaled(first[j], m);
    const SpectralField psi = scaled(shapes[half + j], m);
    return std::make_pair(std::max(0.0, paired(phi, psi, 0)), Ktilde2(phi, psi, e) * sq(sobolev_norm(phi - psi, 0)));
  });

  r.audits = {std::move(pure), std::move(k35), std::move(nl), std::move(noise_sq), std::move(red), std::move(coercive_u),
              std::move(monotone_x)};
  return r;
}

AssumptionReport check_projection_properties(const AuditContext& ctx) {
  AssumptionReport r = new_report("projections", ctx);
  StokesSpectrum spec(*ctx.grid);
  std::mt19937_64 rng(audit_seed(ctx, 6));
  const std::size_t shells = spec.shell_lambdas().size();
  // n = 0, a few whole-shell levels, and the full space
  const std::size_t levels[] = {0, spec.modes_through_shell(std::min<std::size_t>(1, shells - 1)),
                                spec.modes_through_shell(std::min<std::size_t>(4, shells - 1)),
                                spec.modes_through_shell(std::min<std::size_t>(9, shells - 1)), spec.mode_count()};

  InequalityAudit bounded = make_audit("projection-bound", "|P_n phi|_H <= |phi|_H");
  InequalityAudit mu1 = make_audit("tail-X", "|(I - P_n) phi|_X <= |phi|_U / mu_n");
  InequalityAudit mu2 = make_audit("tail-U", "|(I - P_n) psi|_U <= |psi|_H / mu_n");
  InequalityAudit eq = make_audit("tail-equality", "equality for fields on the first excluded shell");
  for (int s = 0; s < ctx.samples; ++s) {
    std::uniform_real_distribution<double> decay(0.0, 3.0);
    const SpectralField f = random_field(ctx.grid, rng, {1.0, kInf, decay(rng), 1.0});
    for (std::size_t n : levels) {
      const double mu = tail_bound_mu(spec, n);
      const SpectralField pf = galerkin_project(f, spec, n);
      const SpectralVector tail = f.vec() - pf.vec();
      push(bounded, sobolev_norm(pf, 2), sobolev_norm(f, 2));
      push(mu1, sobolev_norm(tail, 0), sobolev_norm(f, 1) / mu);
      push(mu2, sobolev_norm(tail, 1), sobolev_norm(f, 2) / mu);
    }
  }
  for (std::size_t sh = 0; sh + 1 < std::min<std::size_t>(shells, 12); ++sh) {
    const std::size_t n = spec.modes_through_shell(sh);
    const SpectralField f = shell_field(ctx.grid, spec.shell_lambdas()[sh + 1], rng);
    const SpectralVector tail = f.vec() - galerkin_project(f, spec, n).vec();
    push(eq, sobolev_norm(tail, 0), sobolev_norm(f, 1) / tail_bound_mu(spec, n));
  }
  for (InequalityAudit* a : {&bounded, &mu1, &mu2}) {
    a->c_hat = max_of(a->ratio);
    a->tolerance = 1e-12;
    a->pass = a->c_hat <= 1.0 + 1e-12;
    a->note = "pass iff every ratio is <= 1 + 1e-12";
  }
  eq.c_hat = max_of(eq.ratio);
  eq.tolerance = 1e-12;
  eq.pass = std::all_of(eq.ratio.begin(), eq.ratio.end(), [](double x) { return std::abs(x - 1.0) <= 1e-12; });
  eq.note = "pass iff every ratio equals 1 to 1e-12";
  r.audits = {std::move(bounded), std::move(mu1), std::move(mu2), std::move(eq)};
  return r;
}

AssumptionReport check_commutator_order(const GridPtr& grid, const XiEnsemble& xi, std::uint64_t seed,
                                        const std::vector<double>& shells) {
  if (xi.empty()) throw std::invalid_argument("commutator audit needs at least one xi field");
  if (shells.size() < 2) throw std::invalid_argument("commutator audit needs two or more shells");
  AssumptionReport r;
  r.name = "commutator_order";
  r.seed = seed;
  r.dim = grid->dim();
  r.resolution = grid->resolution();
  OperatorWorkspace ws(grid);
  std::mt19937_64 rng(derive_seed(seed, kSeedAudit, 7));
  const XiEnsemble zero(grid, {SpectralField(grid)});

  InequalityAudit a = make_audit("commutator-order", "log-log slope of |[Lap, B_0] f|_X / |f|_X over shells");
  InequalityAudit z = make_audit("commutator-zero", "xi = 0 gives a zero commutator");
  std::vector<double> x, y;
  for (double lam : shells) {
    double mean = 0.0;
    const int reps = 4;
    for (int k = 0; k < reps; ++k) {
      const SpectralField f = shell_field(grid, lam, rng);
      if (sobolev_norm(f, 0) == 0.0) throw std::invalid_argument("no retained modes on shell " + std::to_string(lam));
      mean += sobolev_norm(noise_commutator(0, f, xi, ws), 0) / sobolev_norm(f, 0) / reps;
      push(z, sobolev_norm(noise_commutator(0, f, zero, ws), 0), sobolev_norm(f, 0));
    }
    push(a, mean, lam);
    x.push_back(std::log(lam));
    y.push_back(std::log(mean));
  }
  a.slope = ols_slope(x, y);
  a.c_hat = max_of(a.ratio);
  a.tolerance = 1.15;
  a.pass = *a.slope <= 1.15;
  a.note = "lhs is the mean growth factor per shell, rhs the shell eigenvalue; pass iff slope <= 1.15";
  z.c_hat = max_of(z.ratio);
  z.pass = z.c_hat == 0.0;
  z.note = "pass iff exactly zero";
  r.audits = {std::move(a), std::move(z)};
  return r;
}

std::vector<AssumptionReport> run_assumption_lab(const SimConfig& cfg) {
  validate(cfg);
  std::vector<AssumptionReport> out;
  for (int res : cfg.audit_resolutions) {
    const GridPtr grid = make_grid(cfg.dim, res);
    const XiEnsemble xi = make_xi_ensemble(grid, cfg.audit_xi_count, cfg.xi_decay, cfg.xi_amplitude,
                                           derive_seed(cfg.seed, kSeedXi), cfg.xi_max_lambda);
    const AuditContext ctx = make_audit_context(cfg, grid, xi);
    out.push_back(check_cancellation(grid, cfg.seed, cfg.audit_samples));
    out.push_back(check_growth_bounds(ctx));
    out.push_back(check_coercive_inequality(ctx));
    out.push_back(check_local_lipschitz(ctx));
    out.push_back(check_monotonicity_pair(ctx));
    out.push_back(check_projection_properties(ctx));
  }
  // the commutator sweep needs shells up to 64, i.e. |k| = 8 inside the band
  const GridPtr big = make_grid(cfg.dim, 64);
  const XiEnsemble xi = make_xi_ensemble(big, 1, cfg.xi_decay, 1.0, derive_seed(cfg.seed, kSeedXi), cfg.xi_max_lambda);
  out.push_back(check_commutator_order(big, xi, cfg.seed));
  return out;
}

}  // namespace salt
