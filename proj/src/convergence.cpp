#include "salt/convergence.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <thread>

namespace salt {

namespace {

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

MeanSe mean_se(const std::vector<double>& v) {
  MeanSe r;
  if (v.empty()) return r;
  const double n = static_cast<double>(v.size());
  for (double x : v) r.mean += x;
  r.mean /= n;
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - r.mean) * (x - r.mean);
    r.se = std::sqrt(ss / (n - 1.0) / n);
  }
  return r;
}

std::size_t pair_count(std::size_t levels) { return levels * (levels - 1) / 2; }

// Running sup of |w|_1^2 and trapezoidal integral of |w|_2^2 for one pair.
struct DifferenceAccumulator {
  bool active = true;
  double sup = 0.0;
  double integral = 0.0;
  double last_n2sq = 0.0;

  void start(const SpectralVector& w) {
    sup = std::pow(sobolev_norm(w, 1), 2);
    last_n2sq = std::pow(sobolev_norm(w, 2), 2);
  }
  void add(const SpectralVector& w, double h) {
    const double n2sq = std::pow(sobolev_norm(w, 2), 2);
    sup = std::max(sup, std::pow(sobolev_norm(w, 1), 2));
    integral += 0.5 * h * (last_n2sq + n2sq);
    last_n2sq = n2sq;
  }
  double value() const { return sup + integral; }
};

}  // namespace

double xt_norm(const TrajectoryRecord& rec, double T) {
  if (rec.empty()) throw std::out_of_range("xt_norm of an empty record");
  const double last = rec.times.back();
  if (T < 0.0 || T > last + 1e-12 * std::max(1.0, last)) {
    throw std::out_of_range("xt_norm: T = " + std::to_string(T) + " outside the record [0, " + std::to_string(last) +
                            "]");
  }
  const auto it = std::upper_bound(rec.times.begin(), rec.times.end(), T);
  const std::size_t k = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, it - rec.times.begin() - 1));
  double sup = rec.sup_n1sq[k];
  double integral = rec.int_n2sq[k];
  if (k + 1 < rec.size() && T > rec.times[k]) {
    const double h = T - rec.times[k];
    const double theta = h / (rec.times[k + 1] - rec.times[k]);
    const double a1 = rec.n1[k] * rec.n1[k], b1 = rec.n1[k + 1] * rec.n1[k + 1];
    const double a2 = rec.n2[k] * rec.n2[k], b2 = rec.n2[k + 1] * rec.n2[k + 1];
    sup = std::max(sup, a1 + theta * (b1 - a1));
    integral += 0.5 * h * (a2 + (a2 + theta * (b2 - a2)));
  }
  return std::sqrt(sup + integral);
}

void parallel_for(int count, int threads, const std::function<void(int, int)>& fn) {
  if (count <= 0) return;
  const int workers = std::max(1, std::min(threads, count));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) fn(0, i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (int i = next++; i < count; i = next++) {
        try {
          fn(w, i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          next = count;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

CoupledPath run_coupled_path(const SimConfig& cfg, const SpectralField& u0, const XiEnsemble& xi,
                             const BrownianPath& path, OperatorWorkspace& ws) {
  const std::size_t L = cfg.levels.size();
  const auto steps = static_cast<int>(std::llround(cfg.horizon / cfg.dt));
  if (path.steps < steps || path.count != static_cast<int>(xi.size())) {
    throw std::invalid_argument("Brownian path does not match the horizon or the ensemble");
  }
  std::vector<GalerkinStepper> steppers;
  std::vector<SpectralField> u;
  CoupledPath out;
  out.records.resize(L);
  for (std::size_t l = 0; l < L; ++l) {
    steppers.emplace_back(u0.grid_ptr(), resolve_level(cfg.levels[l]), xi, cfg.nu, cfg.nonlinear,
                          cfg.exact_viscosity);
    u.push_back(steppers[l].project(u0));
    TrajectoryRecord& rec = out.records[l];
    rec.monitor = cfg.monitor;
    rec.append(0.0, u[l]);
    rec.threshold = cfg.M + (cfg.monitor == Monitor::H ? rec.sup_n1sq[0] : rec.sup_n2sq[0]);
  }
  std::vector<DifferenceAccumulator> acc(pair_count(L));
  for (std::size_t m = 0, p = 0; m < L; ++m) {
    for (std::size_t n = m + 1; n < L; ++n, ++p) acc[p].start(u[n].vec() - u[m].vec());
  }
  std::vector<bool> running(L, true);

  for (int s = 0; s < steps; ++s) {
    const double t = (s + 1) * cfg.dt;
    bool any = false;
    for (std::size_t l = 0; l < L; ++l) {
      if (!running[l]) continue;
      try {
        u[l] = steppers[l].step(cfg.scheme, u[l], cfg.dt, path.at_step(s), ws);
      } catch (const IntegrationAborted&) {
        out.aborted = true;
        return out;
      }
      TrajectoryRecord& rec = out.records[l];
      rec.append(t, u[l]);
      const std::size_t k = rec.size() - 1;
      if (rec.functional(k) >= rec.threshold) {
        rec.stop = StoppingTimeEvent{steppers[l].max_lambda(), cfg.M, t, k, rec.functional(k), cfg.monitor};
      }
      any = true;
    }
    for (std::size_t m = 0, p = 0; m < L; ++m) {
      for (std::size_t n = m + 1; n < L; ++n, ++p) {
        if (!acc[p].active) continue;
        acc[p].add(u[n].vec() - u[m].vec(), cfg.dt);
        // the sample at tau_m ^ tau_n is the last one included
        if (out.records[m].stop || out.records[n].stop) acc[p].active = false;
      }
    }
    for (std::size_t l = 0; l < L; ++l) running[l] = running[l] && !out.records[l].stop;
    if (!any) break;
  }
  for (const auto& a : acc) out.differences.push_back(a.value());
  return out;
}

CoupledRuns run_coupled(const SimConfig& cfg) {
  validate(cfg);
  CoupledRuns runs;
  runs.cfg = cfg;
  const GridPtr grid = make_grid(cfg.dim, cfg.resolution);
  const StokesSpectrum spectrum(*grid);
  for (double l : cfg.levels) {
    runs.levels.push_back(resolve_level(l));
    runs.modes.push_back(spectrum.modes_through_lambda(resolve_level(l)));
  }
  const XiEnsemble xi = ensemble_for(cfg, grid);
  const SpectralField u0 = initial_condition(cfg, grid);
  const auto steps = static_cast<int>(std::llround(cfg.horizon / cfg.dt));

  const int workers = std::max(1, std::min(cfg.threads, cfg.paths));
  std::vector<OperatorWorkspace> ws;
  for (int w = 0; w < workers; ++w) ws.emplace_back(grid);
  std::vector<std::optional<CoupledPath>> results(static_cast<std::size_t>(cfg.paths));
  parallel_for(cfg.paths, workers, [&](int worker, int p) {
    const BrownianPath path = sample_increments(steps, static_cast<int>(xi.size()), cfg.dt,
                                                derive_seed(cfg.seed, kSeedPath, static_cast<std::uint64_t>(p)));
    results[static_cast<std::size_t>(p)] = run_coupled_path(cfg, u0, xi, path, ws[static_cast<std::size_t>(worker)]);
  });
  for (int p = 0; p < cfg.paths; ++p) {
    CoupledPath& r = *results[static_cast<std::size_t>(p)];
    if (r.aborted) {
      ++runs.discarded;
      continue;
    }
    runs.paths.push_back(std::move(r));
    runs.path_index.push_back(p);
  }
  return runs;
}

CauchyReport cauchy_experiment(const CoupledRuns& runs) {
  CauchyReport rep;
  rep.levels = runs.levels;
  rep.modes = runs.modes;
  rep.paths = static_cast<int>(runs.paths.size());
  rep.discarded = runs.discarded;
  const std::size_t L = runs.levels.size();
  for (std::size_t m = 0, p = 0; m < L; ++m) {
    for (std::size_t n = m + 1; n < L; ++n, ++p) {
      LevelDifference d;
      d.m = m;
      d.n = n;
      for (const auto& path : runs.paths) d.per_path.push_back(path.differences[p]);
      const MeanSe s = mean_se(d.per_path);
      d.mean = s.mean;
      d.se = s.se;
      rep.pairs.push_back(std::move(d));
    }
  }
  // D(m, top) sits at pair index of (m, L-1)
  auto index_of = [L](std::size_t m) { return m * L - m * (m + 1) / 2 + (L - 1 - m - 1); };
  rep.decreasing = L >= 3 && !runs.paths.empty();
  for (std::size_t m = 0; L >= 3 && m + 2 < L; ++m) {
    const auto& a = rep.pairs[index_of(m)].per_path;
    const auto& b = rep.pairs[index_of(m + 1)].per_path;
    std::vector<double> gap(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) gap[k] = a[k] - b[k];
    const MeanSe s = mean_se(gap);
    rep.gap_mean.push_back(s.mean);
    rep.gap_se.push_back(s.se);
    rep.decreasing = rep.decreasing && s.mean > 0.0 && s.mean > 2.0 * s.se;
  }
  return rep;
}

CauchyReport cauchy_experiment(const SimConfig& cfg) { return cauchy_experiment(run_coupled(cfg)); }

UniformBoundReport uniform_bounds_experiment(const CoupledRuns& runs) {
  UniformBoundReport rep;
  rep.levels = runs.levels;
  rep.modes = runs.modes;
  rep.paths = static_cast<int>(runs.paths.size());
  rep.discarded = runs.discarded;
  const std::size_t L = runs.levels.size();
  double scale = 0.0;
  for (std::size_t l = 0; l < L; ++l) {
    std::vector<double> v, sup, integral;
    for (const auto& path : runs.paths) {
      const TrajectoryRecord& rec = path.records[l];
      v.push_back(blowup_functional(rec, Monitor::V));
      sup.push_back(rec.sup_n2sq.back());
      integral.push_back(rec.int_n3sq.back());
    }
    const MeanSe s = mean_se(v);
    rep.mean.push_back(s.mean);
    rep.se.push_back(s.se);
    rep.sup_mean.push_back(mean_se(sup).mean);
    rep.int_mean.push_back(mean_se(integral).mean);
    rep.c_hat = std::max(rep.c_hat, s.mean);
    scale = std::max(scale, std::abs(s.mean));
  }
  if (L < 2) {
    rep.no_growth = true;
    return rep;
  }
  double xbar = 0.0;
  for (std::size_t n : rep.modes) xbar += static_cast<double>(n) / static_cast<double>(L);
  double sxx = 0.0;
  for (std::size_t n : rep.modes) sxx += std::pow(static_cast<double>(n) - xbar, 2);
  double var = 0.0;
  for (std::size_t l = 0; l < L; ++l) {
    const double w = sxx > 0.0 ? (static_cast<double>(rep.modes[l]) - xbar) / sxx : 0.0;
    rep.slope += w * rep.mean[l];
    var += w * w * rep.se[l] * rep.se[l];
  }
  rep.slope_se = std::sqrt(var);
  const double floor = 1e-12 * scale / std::max(1.0, std::sqrt(sxx));
  rep.no_growth = std::abs(rep.slope) <= 2.0 * rep.slope_se + floor;
  return rep;
}

UniformBoundReport uniform_bounds_experiment(const SimConfig& cfg) { return uniform_bounds_experiment(run_coupled(cfg)); }

SmallTimeReport small_time_probability_experiment(const CoupledRuns& runs) {
  const SimConfig& cfg = runs.cfg;
  SmallTimeReport rep;
  rep.levels = runs.levels;
  rep.paths = static_cast<int>(runs.paths.size());
  rep.discarded = runs.discarded;
  std::vector<double> times = cfg.small_times;
  if (times.empty()) times = {10 * cfg.dt, 0.1 * cfg.horizon, 0.25 * cfg.horizon, 0.5 * cfg.horizon, cfg.horizon};
  times.push_back(0.0);
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  times.erase(std::remove_if(times.begin(), times.end(), [&](double s) { return s > cfg.horizon * (1 + 1e-12); }),
              times.end());
  rep.times = times;

  const double P = static_cast<double>(std::max<std::size_t>(1, runs.paths.size()));
  rep.frequency.assign(runs.levels.size(), std::vector<double>(times.size(), 0.0));
  for (std::size_t l = 0; l < runs.levels.size(); ++l) {
    for (std::size_t j = 0; j < times.size(); ++j) {
      int hits = 0;
      for (const auto& path : runs.paths) {
        const TrajectoryRecord& rec = path.records[l];
        const auto k = std::min<std::size_t>(static_cast<std::size_t>(std::llround(times[j] / cfg.dt)), rec.size() - 1);
        // M - 1 + |u0|_U^2 is the stopping threshold minus one
        if (rec.functional(k) >= rec.threshold - 1.0) ++hits;
      }
      rep.frequency[l][j] = hits / P;
    }
  }
  for (std::size_t j = 0; j < times.size(); ++j) {
    double f = 0.0;
    for (const auto& row : rep.frequency) f = std::max(f, row[j]);
    rep.max_frequency.push_back(f);
    rep.max_se.push_back(std::sqrt(f * (1.0 - f) / P));
  }
  rep.decreasing = rep.max_frequency.front() == 0.0;
  for (std::size_t j = 0; j + 1 < times.size(); ++j) {
    const double tol = 2.0 * std::hypot(rep.max_se[j], rep.max_se[j + 1]);
    rep.decreasing = rep.decreasing && rep.max_frequency[j] <= rep.max_frequency[j + 1] + tol;
  }
  return rep;
}

SmallTimeReport small_time_probability_experiment(const SimConfig& cfg) {
  return small_time_probability_experiment(run_coupled(cfg));
}

}  // namespace salt
