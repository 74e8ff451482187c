#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "salt/sde.hpp"

namespace salt {

/// (sup_{r<=T} |u_r|_1^2 + int_0^T |u_r|_2^2)^{1/2} from a record, with the
/// last partial step interpolated linearly. Throws std::out_of_range for T
/// outside [0, last recorded time].
double xt_norm(const TrajectoryRecord& rec, double T);

/// Runs fn(worker, index) for index in [0, count) on `threads` workers.
/// Indices are claimed dynamically; results must be written per index.
void parallel_for(int count, int threads, const std::function<void(int worker, int index)>& fn);

struct LevelDifference {
  std::size_t m = 0;  // indices into levels
  std::size_t n = 0;
  double mean = 0.0;
  double se = 0.0;
  std::vector<double> per_path;
};

/// Levels on one shared path and ensemble, integrated in lockstep.
struct CoupledPath {
  std::vector<TrajectoryRecord> records;  // one per level
  /// sup |u^n - u^m|_1^2 + int |u^n - u^m|_2^2 up to tau_m ^ tau_n, for m < n
  /// stored row-major over pairs in (m, n) order.
  std::vector<double> differences;
  bool aborted = false;
};

/// Integrate every level of cfg.levels from P_n u0 on the given path.
CoupledPath run_coupled_path(const SimConfig& cfg, const SpectralField& u0, const XiEnsemble& xi,
                             const BrownianPath& path, OperatorWorkspace& ws);

struct CoupledRuns {
  SimConfig cfg;
  std::vector<double> levels;        // lambda cutoffs, infinity for "all"
  std::vector<std::size_t> modes;    // dim V_n per level
  std::vector<CoupledPath> paths;    // kept paths, in path order
  std::vector<int> path_index;       // original index of each kept path
  int discarded = 0;
};

/// All cfg.paths coupled paths. Path p uses Brownian seed
/// derive_seed(cfg.seed, kSeedPath, p); u0 and the ensemble are shared.
CoupledRuns run_coupled(const SimConfig& cfg);

struct CauchyReport {
  std::vector<double> levels;
  std::vector<std::size_t> modes;
  int paths = 0;
  int discarded = 0;
  std::vector<LevelDifference> pairs;
  /// For consecutive m1 < m2 below the top level: mean gap of
  /// D(m1, top) - D(m2, top) and its paired standard error.
  std::vector<double> gap_mean, gap_se;
  bool decreasing = false;
};

CauchyReport cauchy_experiment(const CoupledRuns& runs);
CauchyReport cauchy_experiment(const SimConfig& cfg);

struct UniformBoundReport {
  std::vector<double> levels;
  std::vector<std::size_t> modes;
  int paths = 0;
  int discarded = 0;
  /// E[sup |u^n|_2^2 + int |u^n|_3^2] up to tau_n, per level
  std::vector<double> mean, se;
  std::vector<double> sup_mean, int_mean;
  /// largest per-level estimate, the constant realising the bound
  double c_hat = 0.0;
  /// OLS slope of the estimates against dim V_n, with its standard error
  /// propagated from the per-level standard errors.
  double slope = 0.0, slope_se = 0.0;
  bool no_growth = false;
};

UniformBoundReport uniform_bounds_experiment(const CoupledRuns& runs);
UniformBoundReport uniform_bounds_experiment(const SimConfig& cfg);

struct SmallTimeReport {
  std::vector<double> levels;
  std::vector<double> times;  // ascending, first entry 0
  int paths = 0;
  int discarded = 0;
  /// frequency[level][time] of functional(tau ^ S) >= M - 1 + |u0|_U^2
  std::vector<std::vector<double>> frequency;
  std::vector<double> max_frequency, max_se;
  bool decreasing = false;
};

/// Uses cfg.small_times, or a default grid from 10 dt to the horizon.
SmallTimeReport small_time_probability_experiment(const CoupledRuns& runs);
SmallTimeReport small_time_probability_experiment(const SimConfig& cfg);

}  // namespace salt
