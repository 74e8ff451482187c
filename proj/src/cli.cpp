#include "salt/cli.hpp"

#include <fftw3.h>

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "salt/assumptions.hpp"
#include "salt/config.hpp"
#include "salt/convergence.hpp"
#include "salt/simd/kernels.hpp"
#include "salt/snapshot.hpp"

namespace salt {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr const char* kNormsHeader = "# salt norms v1";
constexpr const char* kMatrixHeader = "# salt cauchy-matrix v1";
constexpr const char* kUniformHeader = "# salt uniform-bounds v1";
constexpr const char* kSmallTimeHeader = "# salt small-time v1";

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string read_bytes(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

/// Every file a command writes goes through here so the manifest can list it.
class OutputDir {
 public:
  explicit OutputDir(fs::path root) : root_(std::move(root)) { fs::create_directories(root_); }

  const fs::path& root() const { return root_; }

  void write(const std::string& name, const std::string& content) {
    std::ofstream os(root_ / name, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + (root_ / name).string());
    os << content;
    track(name);
  }
  void track(const std::string& name) { files_.push_back(name); }

  json inventory() const {
    json out = json::array();
    for (const auto& f : files_) {
      const std::string bytes = read_bytes(root_ / f);
      out.push_back({{"name", f}, {"bytes", bytes.size()}, {"fnv1a", hex64(fnv1a(bytes))}});
    }
    return out;
  }

 private:
  fs::path root_;
  std::vector<std::string> files_;
};

std::string csv_number(double v) { return format_double(v); }

std::string norms_csv(const TrajectoryRecord& rec) {
  std::string s = std::string(kNormsHeader) + " monitor=" + to_string(rec.monitor) + "\n";
  s += "time,n0,n1,n2,sup_n1sq,int_n2sq,stopped,n3,sup_n2sq,int_n3sq\n";
  for (std::size_t k = 0; k < rec.size(); ++k) {
    const bool stopped = rec.stop && rec.stop->step == k;
    s += csv_number(rec.times[k]) + "," + csv_number(rec.n0[k]) + "," + csv_number(rec.n1[k]) + "," +
         csv_number(rec.n2[k]) + "," + csv_number(rec.sup_n1sq[k]) + "," + csv_number(rec.int_n2sq[k]) + "," +
         (stopped ? "1" : "0") + "," + csv_number(rec.n3[k]) + "," + csv_number(rec.sup_n2sq[k]) + "," +
         csv_number(rec.int_n3sq[k]) + "\n";
  }
  return s;
}

json level_json(double level) {
  if (std::isinf(level)) return "all";
  return level;
}

json grid_json(const TorusGrid& g) {
  return {{"dim", g.dim()}, {"resolution", g.resolution()}, {"dealias_cutoff", g.cutoff()},
          {"retained_modes", g.retained_count()}};
}

json ensemble_json(const XiEnsemble& xi, const SimConfig& cfg) {
  return {{"count", xi.size()},
          {"decay", cfg.xi_decay},
          {"amplitude", cfg.xi_amplitude},
          {"max_lambda", cfg.xi_max_lambda},
          {"summability_certificate", xi.summability_certificate()},
          {"measured_norm_sum", xi.measured_norm_sum()}};
}

json seeds_json(const SimConfig& cfg, int paths) {
  json s = {{"master", cfg.seed},
            {"xi", derive_seed(cfg.seed, kSeedXi)},
            {"initial", derive_seed(cfg.seed, kSeedInitial)},
            {"audit", derive_seed(cfg.seed, kSeedAudit)}};
  json p = json::array();
  for (int i = 0; i < paths; ++i) p.push_back(derive_seed(cfg.seed, kSeedPath, static_cast<std::uint64_t>(i)));
  s["paths"] = p;
  return s;
}

struct Common {
  std::string config_path;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::string> monitor;
  std::string out = "salt_out";
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_path, "config file (key = value)")->check(CLI::ExistingFile);
  cmd->add_option("--set", c.sets, "override one config key, KEY=VALUE");
  cmd->add_option("--seed", c.seed, "master seed");
  cmd->add_option("--threads", c.threads, "worker threads");
  cmd->add_option("--monitor", c.monitor, "blow-up monitor, H or V");
  cmd->add_option("--out", c.out, "output directory");
}

SimConfig build_config(const Common& c, const SimConfig& base) {
  SimConfig cfg = c.config_path.empty() ? base : parse_config(c.config_path, base);
  for (const auto& kv : c.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects KEY=VALUE, got '" + kv + "'");
    set_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (c.seed) cfg.seed = *c.seed;
  if (c.threads) cfg.threads = *c.threads;
  if (c.monitor) set_config_value(cfg, "monitor", *c.monitor);
  try {
    validate(cfg);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

class Run {
 public:
  Run(std::string command, const SimConfig& cfg, const fs::path& out)
      : command_(std::move(command)), cfg_(cfg), dir_(out), start_(std::chrono::steady_clock::now()) {
    dir_.write("config.txt", format_config(cfg_));
  }
  OutputDir& dir() { return dir_; }

  void finish(json extra) {
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    json m;
    m["tool"] = "salt";
    m["version"] = kToolVersion;
    m["command"] = command_;
    m["config_hash"] = hex64(config_hash(cfg_));
    m["simd"] = std::string(simd::isa_name(simd::active().isa));
    for (auto& [k, v] : extra.items()) m[k] = v;
    m["files"] = dir_.inventory();
    // wall-clock values are the only fields that differ between reruns
    m["timings"] = {{"wall_seconds", wall}};
    std::ofstream os(dir_.root() / "manifest.json", std::ios::binary);
    os << m.dump(2) << "\n";
  }

 private:
  std::string command_;
  SimConfig cfg_;
  OutputDir dir_;
  std::chrono::steady_clock::time_point start_;
};

json stop_json(const TrajectoryRecord& rec) {
  if (!rec.stop) return nullptr;
  return {{"level_lambda", level_json(rec.stop->level_lambda)},
          {"M", rec.stop->M},
          {"time", rec.stop->time},
          {"step", rec.stop->step},
          {"functional", rec.stop->functional},
          {"monitor", to_string(rec.stop->monitor)}};
}

int cmd_simulate(const SimConfig& cfg, const fs::path& out_path, std::ostream& out) {
  Run run("simulate", cfg, out_path);
  const fs::path snaps = out_path / "snapshots";
  if (cfg.snapshot_every > 0) fs::create_directories(snaps);
  const TrajectoryRecord rec =
      run_trajectory(cfg, cfg.snapshot_every > 0 ? std::optional<fs::path>(snaps) : std::nullopt);
  for (const auto& s : rec.snapshots) run.dir().track("snapshots/" + s);
  run.dir().write("norms.csv", norms_csv(rec));
  json summary = {{"samples", rec.size()},
                  {"final_time", rec.times.back()},
                  {"threshold", rec.threshold},
                  {"stopping_time", stop_json(rec)},
                  {"aborted", rec.aborted},
                  {"abort_reason", rec.abort_reason}};
  run.dir().write("summary.json", summary.dump(2) + "\n");

  const GridPtr grid = make_grid(cfg.dim, cfg.resolution);
  const XiEnsemble xi = ensemble_for(cfg, grid);
  run.finish({{"seeds", seeds_json(cfg, 1)}, {"grid", grid_json(*grid)}, {"ensemble", ensemble_json(xi, cfg)}});

  out << "simulate: " << rec.size() << " samples to t = " << rec.times.back();
  if (rec.stop) out << ", stopped at t = " << rec.stop->time;
  if (rec.aborted) out << ", aborted: " << rec.abort_reason;
  out << "\n";
  return rec.aborted ? 1 : 0;
}

json audit_json(const InequalityAudit& a) {
  json j = {{"id", a.id},       {"label", a.label},         {"kind", to_string(a.kind)},
            {"samples", a.samples()}, {"c_hat", a.c_hat}, {"tolerance", a.tolerance},
            {"pass", a.pass},   {"as_expected", a.as_expected()}};
  j["kappa_hat"] = a.kappa_hat ? json(*a.kappa_hat) : json(nullptr);
  j["slope"] = a.slope ? json(*a.slope) : json(nullptr);
  j["note"] = a.note;
  j["lhs"] = a.lhs;
  j["rhs"] = a.rhs;
  j["ratio"] = a.ratio;
  return j;
}

std::string fixed(double v, int width = 12) {
  std::ostringstream os;
  os << std::setw(width) << std::setprecision(4) << std::scientific << v;
  return os.str();
}

int cmd_assumptions(const SimConfig& cfg, const fs::path& out_path, std::ostream& out) {
  Run run("assumptions", cfg, out_path);
  const auto reports = run_assumption_lab(cfg);
  json arr = json::array();
  std::ostringstream table;
  table << std::left << std::setw(28) << "report" << std::setw(6) << "N" << std::setw(26) << "audit" << std::setw(11)
        << "kind" << std::right << std::setw(12) << "c_hat" << std::setw(12) << "kappa_hat" << std::setw(12)
        << "slope" << "  verdict\n";
  bool all = true;
  for (const auto& r : reports) {
    json j = {{"name", r.name},
              {"seed", r.seed},
              {"dim", r.dim},
              {"resolution", r.resolution},
              {"exponents", {{"p", r.exponents.p}, {"q", r.exponents.q}, {"p_tilde", r.exponents.p_tilde},
                             {"q_tilde", r.exponents.q_tilde}}},
              {"pass", r.pass()}};
    json audits = json::array();
    for (const auto& a : r.audits) {
      audits.push_back(audit_json(a));
      table << std::left << std::setw(28) << r.name << std::setw(6) << r.resolution << std::setw(26) << a.id
            << std::setw(11) << to_string(a.kind) << std::right << fixed(a.c_hat)
            << (a.kappa_hat ? fixed(*a.kappa_hat) : std::string(12, ' ') + "")
            << (a.slope ? fixed(*a.slope) : std::string(12, ' ')) << "  "
            << (a.as_expected() ? "ok" : "UNEXPECTED") << (a.kind == AuditKind::control ? " (control)" : "")
            << "\n";
    }
    j["audits"] = audits;
    arr.push_back(j);
    all = all && r.pass();
  }
  run.dir().write("assumptions.json", arr.dump(2) + "\n");
  run.dir().write("summary.txt", table.str());
  const GridPtr grid = make_grid(cfg.dim, cfg.resolution);
  json grids = json::array();
  for (int n : cfg.audit_resolutions) grids.push_back(grid_json(*make_grid(cfg.dim, n)));
  SimConfig audit_xi = cfg;
  audit_xi.xi_count = cfg.audit_xi_count;
  run.finish({{"seeds", seeds_json(cfg, 0)},
              {"grids", grids},
              {"ensemble", ensemble_json(ensemble_for(audit_xi, grid), audit_xi)}});
  out << table.str() << (all ? "all assumption audits as expected\n" : "some assumption audits FAILED\n");
  return all ? 0 : 1;
}

int cmd_cauchy(const SimConfig& cfg, const fs::path& out_path, std::ostream& out) {
  Run run("cauchy", cfg, out_path);
  const CoupledRuns runs = run_coupled(cfg);
  const CauchyReport cauchy = cauchy_experiment(runs);
  const UniformBoundReport uniform = uniform_bounds_experiment(runs);
  const SmallTimeReport small = small_time_probability_experiment(runs);
  const std::size_t L = runs.levels.size();

  std::vector<std::vector<double>> mean(L, std::vector<double>(L, 0.0)), se = mean;
  for (const auto& d : cauchy.pairs) {
    mean[d.m][d.n] = mean[d.n][d.m] = d.mean;
    se[d.m][d.n] = se[d.n][d.m] = d.se;
  }
  auto matrix_csv = [&](const std::vector<std::vector<double>>& m, const std::string& what) {
    std::string s = std::string(kMatrixHeader) + " " + what + "\nlevel";
    for (double l : runs.levels) s += "," + (std::isinf(l) ? std::string("all") : csv_number(l));
    s += "\n";
    for (std::size_t i = 0; i < L; ++i) {
      s += std::isinf(runs.levels[i]) ? std::string("all") : csv_number(runs.levels[i]);
      for (std::size_t j = 0; j < L; ++j) s += "," + csv_number(m[i][j]);
      s += "\n";
    }
    return s;
  };
  run.dir().write("cauchy_mean.csv", matrix_csv(mean, "mean"));
  run.dir().write("cauchy_se.csv", matrix_csv(se, "standard_error"));

  std::string per_path = std::string(kMatrixHeader) + " per_path\npath,m,n,value\n";
  for (const auto& d : cauchy.pairs) {
    for (std::size_t k = 0; k < d.per_path.size(); ++k) {
      per_path += std::to_string(runs.path_index[k]) + "," + std::to_string(d.m) + "," + std::to_string(d.n) + "," +
                  csv_number(d.per_path[k]) + "\n";
    }
  }
  run.dir().write("cauchy_per_path.csv", per_path);

  std::string ub = std::string(kUniformHeader) + "\nlevel,modes,mean,se,sup_n2sq_mean,int_n3sq_mean\n";
  for (std::size_t l = 0; l < L; ++l) {
    ub += (std::isinf(runs.levels[l]) ? std::string("all") : csv_number(runs.levels[l])) + "," +
          std::to_string(runs.modes[l]) + "," + csv_number(uniform.mean[l]) + "," + csv_number(uniform.se[l]) + "," +
          csv_number(uniform.sup_mean[l]) + "," + csv_number(uniform.int_mean[l]) + "\n";
  }
  run.dir().write("uniform_bounds.csv", ub);

  std::string st = std::string(kSmallTimeHeader) + "\ntime";
  for (double l : runs.levels) st += ",level_" + (std::isinf(l) ? std::string("all") : csv_number(l));
  st += ",max,max_se\n";
  for (std::size_t j = 0; j < small.times.size(); ++j) {
    st += csv_number(small.times[j]);
    for (std::size_t l = 0; l < L; ++l) st += "," + csv_number(small.frequency[l][j]);
    st += "," + csv_number(small.max_frequency[j]) + "," + csv_number(small.max_se[j]) + "\n";
  }
  run.dir().write("small_time.csv", st);

  json levels = json::array();
  for (double l : runs.levels) levels.push_back(level_json(l));
  json report = {{"levels", levels},
                 {"modes", runs.modes},
                 {"paths", cauchy.paths},
                 {"discarded", cauchy.discarded},
                 {"cauchy", {{"gap_mean", cauchy.gap_mean}, {"gap_se", cauchy.gap_se}, {"decreasing", cauchy.decreasing}}},
                 {"uniform_bounds",
                  {{"c_hat", uniform.c_hat}, {"slope", uniform.slope}, {"slope_se", uniform.slope_se},
                   {"no_growth", uniform.no_growth}}},
                 {"small_time", {{"decreasing", small.decreasing}}}};
  run.dir().write("report.json", report.dump(2) + "\n");

  const GridPtr grid = make_grid(cfg.dim, cfg.resolution);
  run.finish({{"seeds", seeds_json(cfg, cfg.paths)},
              {"grid", grid_json(*grid)},
              {"ensemble", ensemble_json(ensemble_for(cfg, grid), cfg)}});

  out << "cauchy: " << cauchy.paths << " paths (" << cauchy.discarded << " discarded)\n";
  for (const auto& d : cauchy.pairs) {
    out << "  D(" << level_json(runs.levels[d.m]).dump() << ", " << level_json(runs.levels[d.n]).dump()
        << ") = " << d.mean << " +- " << d.se << "\n";
  }
  out << "  differences decrease toward the finest level: " << (cauchy.decreasing ? "yes" : "no") << "\n";
  out << "  uniform-bound slope " << uniform.slope << " +- " << uniform.slope_se << "\n";
  return cauchy.decreasing ? 0 : 1;
}

int cmd_taylor_green(const SimConfig& cfg, const fs::path& out_path, std::ostream& out) {
  Run run("taylor-green", cfg, out_path);
  const GridPtr grid = make_grid(cfg.dim, cfg.resolution);
  const XiEnsemble none(grid);
  OperatorWorkspace ws(grid);
  GalerkinStepper stepper(grid, resolve_level(cfg.galerkin_lambda), none, cfg.nu, cfg.nonlinear,
                          cfg.exact_viscosity);
  const SpectralField u0 = taylor_green(grid, cfg.ic_amplitude);
  SpectralField u = stepper.project(u0);
  TrajectoryRecord rec;
  rec.append(0.0, u);
  const auto steps = static_cast<int>(std::llround(cfg.horizon / cfg.dt));
  for (int s = 0; s < steps; ++s) {
    u = stepper.step(cfg.scheme, u, cfg.dt, {}, ws);
    rec.append((s + 1) * cfg.dt, u);
  }
  const double T = rec.times.back();
  SpectralVector exact = u0.vec();
  exact *= std::exp(-2.0 * cfg.nu * T);
  const double rel = sobolev_norm(u.vec() - exact, 0) / sobolev_norm(exact, 0);
  std::vector<double> logn;
  for (double n : rec.n0) logn.push_back(std::log(n));
  const double rate = -ols_slope(rec.times, logn);
  const double rate_err = std::abs(rate - 2.0 * cfg.nu) / (2.0 * cfg.nu);
  const bool pass = rel <= 1e-5 && rate_err <= 1e-5;

  run.dir().write("norms.csv", norms_csv(rec));
  json report = {{"final_time", T},           {"relative_l2_error", rel}, {"decay_rate", rate},
                 {"expected_rate", 2.0 * cfg.nu}, {"tolerance", 1e-5},     {"pass", pass}};
  run.dir().write("report.json", report.dump(2) + "\n");
  run.finish({{"seeds", seeds_json(cfg, 0)}, {"grid", grid_json(*grid)}});
  out << "taylor-green: relative L2 error " << rel << ", decay rate " << rate << " (exact " << 2.0 * cfg.nu
      << ") " << (pass ? "PASS" : "FAIL") << "\n";
  return pass ? 0 : 1;
}

int cmd_info(const SimConfig& cfg, std::ostream& out) {
  out << "salt " << kToolVersion << "\n";
  out << "simd kernels: " << simd::isa_name(simd::active().isa) << "\n";
  out << "fftw: " << fftw_version << "\n";
  out << "config hash: " << hex64(config_hash(cfg)) << "\n";
  out << "config:\n" << format_config(cfg);
  return 0;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"SALT Navier-Stokes Galerkin simulator and verification lab", "salt"};
  app.require_subcommand(1);
  Common common;
  auto* simulate = app.add_subcommand("simulate", "integrate one trajectory, write norms.csv and snapshots");
  auto* cauchy = app.add_subcommand("cauchy", "coupled Galerkin levels: Cauchy, uniform-bound and small-time estimates");
  auto* assumptions = app.add_subcommand("assumptions", "numerical audits of the operator assumptions");
  auto* tg = app.add_subcommand("taylor-green", "deterministic Taylor-Green decay check");
  auto* info = app.add_subcommand("info", "build and default configuration");
  for (auto* c : {simulate, cauchy, assumptions, tg, info}) add_common(c, common);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  SimConfig base;
  if (tg->parsed()) base.horizon = 0.5;
  SimConfig cfg;
  try {
    cfg = build_config(common, base);
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  }
  const fs::path out_path = common.out;
  try {
    if (simulate->parsed()) return cmd_simulate(cfg, out_path, out);
    if (cauchy->parsed()) return cmd_cauchy(cfg, out_path, out);
    if (assumptions->parsed()) return cmd_assumptions(cfg, out_path, out);
    if (tg->parsed()) return cmd_taylor_green(cfg, out_path, out);
    return cmd_info(cfg, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

int dispatch(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return dispatch(args, std::cout, std::cerr);
}

}  // namespace salt
