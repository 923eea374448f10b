// Command-line front door: config parsing, experiment orchestration, artifact
// output, reproducibility manifest.
//
// Exit codes: 0 pass, 1 assertion failure, 2 configuration error.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <string>

#include "CLI11.hpp"
#include "fbmavg/experiments.hpp"
#include "fbmavg/fbm.hpp"
#include "fbmavg/fit.hpp"
#include "fbmavg/io.hpp"
#include "fbmavg/norms.hpp"
#include "fbmavg/rng.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace fbmavg;

namespace {

constexpr const char* kVersion = "fbmavg 0.1.0";

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void reject_unknown_keys(const json& j, const std::set<std::string>& allowed,
                         const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key()))
      throw ConfigError("unknown key '" + it.key() + "' in " + where);
}

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  try {
    return json::parse(in);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
}

template <typename T>
T get_or(const json& j, const std::string& key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const std::exception&) {
    throw ConfigError("bad value type for key '" + key + "'");
  }
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

void write_manifest(const std::string& dir, const json& config, std::uint64_t seed,
                    double wall_seconds, const std::vector<std::string>& outputs) {
  json m{{"version", kVersion},
         {"config", config},
         {"seed", seed},
         {"wall_time_s", wall_seconds}};
  json files = json::object();
  for (const auto& f : outputs) files[fs::path(f).filename().string()] = file_fingerprint(f);
  m["outputs"] = files;
  write_text(dir + "/manifest.json", m.dump(2) + "\n");
}

// The canonical feedback model: f = cos(y) a(x), V0 = -sin(y), V = 1.
// avg(cos) under the von Mises density exp(2 cos y) is I_1(2)/I_0(2).
FeedbackConfig canonical_feedback_config(const json& cfg, const std::string& profile) {
  FeedbackConfig fc;
  fc.H = get_or(cfg, "H", 0.75);
  fc.beta_report = get_or(cfg, "beta_report", 0.8 * fc.H);
  const std::size_t slow_n = get_or<std::size_t>(cfg, "slow_n", profile == "paper" ? 2048 : 512);
  fc.slow_grid = TimeGrid(0.0, get_or(cfg, "T", 1.0), slow_n);
  fc.eps_grid = get_or(cfg, "eps_grid", std::vector<double>{0.2, 0.1, 0.05, 0.025});
  fc.n_mc = get_or<std::size_t>(cfg, "n_mc", profile == "paper" ? 1024 : 128);
  fc.p = get_or(cfg, "p", 2.0);
  fc.substep_factor = get_or(cfg, "substep_factor", 20.0);
  fc.norm_stride = get_or<std::size_t>(cfg, "norm_stride", 2);
  fc.density_ny = get_or<std::size_t>(cfg, "density_ny", 1024);
  fc.x0 = get_or(cfg, "x0", 1.0);
  fc.y0 = get_or(cfg, "y0", 0.0);
  fc.f = [](double x, double y) { return std::cos(y) * (1.0 + 0.25 * std::sin(x)); };
  fc.g = [](double x, double) { return -0.1 * x; };
  fc.fast.V0 = [](const Eigen::VectorXd&, double y) { return -std::sin(y); };
  fc.fast.V = {[](const Eigen::VectorXd&, double) { return 1.0; }};
  fc.fast.ellipticity = 1.0;
  fc.fast_x_dependent = false;
  return fc;
}

NoFeedbackConfig canonical_nofeedback_config(const json& cfg, const std::string& profile) {
  NoFeedbackConfig nc;
  nc.H = get_or(cfg, "H", 0.75);
  nc.grid = TimeGrid(0.0, get_or(cfg, "T", 1.0),
                     get_or<std::size_t>(cfg, "grid_n", profile == "paper" ? 4096 : 1024));
  nc.n_grid = get_or(cfg, "n_grid", std::vector<double>{4, 16, 64, 256});
  nc.n_mc = get_or<std::size_t>(cfg, "n_mc", profile == "paper" ? 1024 : 256);
  nc.p = get_or(cfg, "p", 2.0);
  nc.alpha = get_or(cfg, "alpha", 0.5);
  nc.norm_stride = get_or<std::size_t>(cfg, "norm_stride", 4);
  nc.chain.rate_up = get_or(cfg, "chain_rate_up", 2.0);
  nc.chain.rate_down = get_or(cfg, "chain_rate_down", 2.0);
  nc.x0 = get_or(cfg, "x0", 1.0);
  // sigma(y) two values symmetric about the mean; f = sigma(y) * a(x)
  nc.f = [](double x, double y) { return y * (1.0 + 0.25 * std::sin(x)) + 1.0; };
  nc.g = [](double x, double) { return -0.1 * x; };
  return nc;
}

PeriodicConfig canonical_periodic_config(const json& cfg, const std::string& profile) {
  PeriodicConfig pc;
  pc.H = get_or(cfg, "H", 0.75);
  pc.grid = TimeGrid(0.0, get_or(cfg, "T", 1.0),
                     get_or<std::size_t>(cfg, "grid_n", profile == "paper" ? 4096 : 1024));
  pc.n_grid = get_or(cfg, "n_grid", std::vector<double>{1, 4, 16, 64});
  pc.n_mc = get_or<std::size_t>(cfg, "n_mc", profile == "paper" ? 256 : 64);
  pc.kappa = get_or(cfg, "kappa", 0.3);
  pc.alpha = get_or(cfg, "alpha", 0.5);
  PeriodicComponent comp;
  comp.weight = 1.0;
  comp.period = 2.0 * M_PI;
  comp.F = [](double t, double x) { return std::sin(t) * (1.0 + 0.5 * std::cos(x)); };
  pc.components = {comp};
  pc.fbar = [](double) { return 0.0; };
  return pc;
}

const std::set<std::string> kRunKeys = {
    "H",    "T",        "slow_n",     "grid_n",         "eps_grid", "n_grid",
    "n_mc", "p",        "alpha",      "beta_report",    "kappa",    "substep_factor",
    "x0",   "y0",       "norm_stride", "density_ny",    "chain_rate_up", "chain_rate_down",
    "seed", "windows"};

int cmd_sample_fbm(const json& cfg, const std::string& out_dir, std::uint64_t seed, int jobs) {
  reject_unknown_keys(cfg, {"H", "T", "grid_n", "n_paths", "dims", "seed"}, "sample-fbm config");
  const double H = get_or(cfg, "H", 0.75);
  const auto n = get_or<std::size_t>(cfg, "grid_n", 1024);
  const auto n_paths = get_or<std::size_t>(cfg, "n_paths", 16);
  const auto dims = get_or<std::size_t>(cfg, "dims", 1);
  const double T = get_or(cfg, "T", 1.0);

  const auto t0 = std::chrono::steady_clock::now();
  FbmEnsemble ens = sample_fbm(H, TimeGrid(0.0, T, n), n_paths, dims, seed, jobs);
  save_ensemble(ens, out_dir);

  // summary statistics: increment variance at full span and lag-1 correlation
  std::vector<double> finals;
  double lag_num = 0.0, lag_den = 0.0;
  for (const auto& p : ens.paths) {
    finals.push_back(p.at(n, 0));
    for (std::size_t k = 0; k + 2 <= n; ++k) {
      const double d1 = p.at(k + 1, 0) - p.at(k, 0);
      const double d2 = p.at(k + 2, 0) - p.at(k + 1, 0);
      lag_num += d1 * d2;
      lag_den += d1 * d1;
    }
  }
  double var = 0.0;
  for (double v : finals) var += v * v;
  var /= static_cast<double>(finals.size());
  const double lag1 = (lag_den > 0.0) ? lag_num / lag_den : 0.0;
  std::cout << "sampled " << n_paths << " paths (H=" << H << ", n=" << n << ")\n";
  std::cout << "  var(B_T) = " << var << " (theory " << std::pow(T, 2.0 * H) << ")\n";
  std::cout << "  lag-1 increment correlation = " << lag1 << " (theory "
            << fgn_autocovariance(H, 1) << ")\n";
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  std::vector<std::string> outputs;
  for (std::size_t i = 0; i < n_paths; ++i)
    outputs.push_back(out_dir + "/path_" + std::to_string(i) + ".gpth");
  write_manifest(out_dir, cfg, seed, wall, outputs);
  return 0;
}

int cmd_check_kernels(const json& cfg, const std::string& out_dir, std::uint64_t seed) {
  reject_unknown_keys(cfg, {"H_grid", "corrupt_c1", "seed"}, "check-kernels config");
  const auto H_grid = get_or(cfg, "H_grid", std::vector<double>{0.6, 0.75, 0.9});
  const bool corrupt = get_or(cfg, "corrupt_c1", false);  // negative-control hook

  const auto t0 = std::chrono::steady_clock::now();
  json verdicts = json::array();
  bool all_pass = true;
  RngStream rng(seed, {stream::kMisc});

  for (double H : H_grid) {
    KernelConstants kc(H);
    if (corrupt) kc.c1 *= 1.5;

    // d2R against the second mixed finite difference of covariance_R
    double worst_fd = 0.0;
    for (int i = 0; i < 20; ++i) {
      const double r = 0.2 + 0.7 * rng.uniform();
      const double s = r + 0.15 + 0.8 * rng.uniform();
      const double del = 1e-3;
      const double fd = (covariance_R(r + del, s + del, H) - covariance_R(r + del, s - del, H) -
                         covariance_R(r - del, s + del, H) + covariance_R(r - del, s - del, H)) /
                        (4.0 * del * del);
      const double cl = d2R_closed(r, s, kc);
      worst_fd = std::max(worst_fd, std::abs(fd - cl) / std::abs(cl));
    }
    const bool fd_pass = worst_fd <= 1e-3;

    // G asymptotics: slopes of d2R in the separation
    std::vector<double> small_d{1e-4, 3e-4, 1e-3, 3e-3, 1e-2}, small_v;
    for (double d : small_d) small_v.push_back(d2R_closed(1.0, 1.0 + d, kc));
    const double slope_small = fit_loglog(small_d, small_v).slope;
    std::vector<double> big_d{1e2, 3e2, 1e3, 3e3, 1e4}, big_v;
    for (double d : big_d) big_v.push_back(d2R_closed(1.0, 1.0 + d, kc));
    const double slope_big = fit_loglog(big_d, big_v).slope;
    const bool slope_pass = std::abs(slope_small - (2.0 * H - 2.0)) <= 0.05 &&
                            std::abs(slope_big - (H - 1.5)) <= 0.05;

    // RKHS bound over the oscillatory family with C fitted at k=1
    const double kappa = (H - 0.5) / 2.0;
    TimeGrid grid(0.0, 1.0, 512);
    RkhsForm form(H, grid);
    auto osc_path = [&grid](double k) {
      GridPath p(grid, 1);
      for (std::size_t j = 0; j < p.points(); ++j)
        p.at(j) = std::sin(2.0 * M_PI * k * grid.point(j));
      return p;
    };
    const GridPath h1 = osc_path(1.0);
    const double C_fit =
        form.norm(h1) / neg_holder_norm(h1, kappa).value;  // T = 1 so T^{H-kappa} = 1
    bool rkhs_pass = true;
    for (double k : {2.0, 4.0, 8.0, 16.0, 32.0, 64.0}) {
      const GridPath hk = osc_path(k);
      if (form.norm(hk) > 1.001 * C_fit * neg_holder_norm(hk, kappa).value) rkhs_pass = false;
    }

    all_pass = all_pass && fd_pass && slope_pass && rkhs_pass;
    verdicts.push_back(json{{"H", H},
                            {"fd_worst_rel_err", worst_fd},
                            {"fd_pass", fd_pass},
                            {"slope_small", slope_small},
                            {"slope_big", slope_big},
                            {"slope_pass", slope_pass},
                            {"rkhs_C", C_fit},
                            {"rkhs_pass", rkhs_pass}});
  }
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  json out{{"checks", verdicts}, {"pass", all_pass}};
  std::cout << out.dump(2) << "\n";
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    write_text(out_dir + "/kernels.json", out.dump(2) + "\n");
    write_manifest(out_dir, cfg, seed, wall, {out_dir + "/kernels.json"});
  }
  return all_pass ? 0 : 1;
}

void print_report(const ConvergenceReport& rep) {
  std::cout << rep.name << ": fitted rate slope = " << rep.rate.slope << " (95% CI ["
            << rep.rate.slope_lo() << ", " << rep.rate.slope_hi() << "], R^2 = " << rep.rate.r2
            << ")\n";
  for (std::size_t i = 0; i < rep.param.size(); ++i)
    std::cout << "  " << rep.param_name << " = " << rep.param[i] << ": err = " << rep.err[i]
              << " +- " << rep.err_se[i] << "\n";
}

int cmd_run(const std::string& which, const json& cfg, const std::string& out_dir,
            std::uint64_t seed, int jobs, const std::string& profile, bool resume) {
  reject_unknown_keys(cfg, kRunKeys, "run config");
  fs::create_directories(out_dir);
  const std::string report_path = out_dir + "/report.json";
  const json config_echo = json{{"command", which}, {"profile", profile}, {"config", cfg}};

  if (resume && fs::exists(report_path)) {
    std::ifstream in(out_dir + "/manifest.json");
    if (in) {
      json m = json::parse(in, nullptr, false);
      if (!m.is_discarded() && m.contains("config") && m["config"] == config_echo &&
          m.contains("seed") && m["seed"].get<std::uint64_t>() == seed) {
        std::cout << "resume: report already complete in " << out_dir << "\n";
        return 0;
      }
    }
  }

  const auto t0 = std::chrono::steady_clock::now();
  std::vector<std::string> outputs;

  auto finish_convergence = [&](const ConvergenceReport& rep) {
    write_text(report_path, rep.to_json() + "\n");
    write_text(out_dir + "/report.csv", rep.to_csv());
    write_text(out_dir + "/plot.dat", rep.plot_data());
    outputs = {report_path, out_dir + "/report.csv", out_dir + "/plot.dat"};
    print_report(rep);
  };

  if (which == "nofeedback") {
    NoFeedbackConfig nc = canonical_nofeedback_config(cfg, profile);
    nc.seed = seed;
    nc.jobs = jobs;
    finish_convergence(run_nofeedback(nc));
  } else if (which == "periodic") {
    PeriodicConfig pc = canonical_periodic_config(cfg, profile);
    pc.seed = seed;
    pc.jobs = jobs;
    const PeriodicReport rep = run_periodic_example(pc);
    write_text(report_path, rep.to_json() + "\n");
    write_text(out_dir + "/report.csv", rep.solution.to_csv());
    write_text(out_dir + "/plot.dat", rep.solution.plot_data());
    outputs = {report_path, out_dir + "/report.csv", out_dir + "/plot.dat"};
    print_report(rep.solution);
    std::cout << "  coefficient norm rate = " << rep.coeff_rate.slope << "\n";
  } else if (which == "feedback") {
    FeedbackConfig fc = canonical_feedback_config(cfg, profile);
    fc.seed = seed;
    fc.jobs = jobs;
    const ConvergenceReport rep = run_feedback(fc);
    finish_convergence(rep);
    const double khat = rep.rate.slope;
    std::cout << "  kappa_hat = " << khat << " (95% CI [" << rep.rate.slope_lo() << ", "
              << rep.rate.slope_hi() << "])\n";
  } else if (which == "uniform-bound") {
    FeedbackConfig fc = canonical_feedback_config(cfg, profile);
    fc.seed = seed;
    fc.jobs = jobs;
    // center h = cos(y) - avg under the invariant density
    const auto nu = averaged_slow_coefficient(fc, [](double, double y) { return std::cos(y); });
    const double center = nu(fc.x0);
    const UniformBoundReport rep = uniform_bound_experiment(
        fc, [center](double, double y) { return std::cos(y) - center; },
        get_or<std::size_t>(cfg, "windows", 4));
    write_text(report_path, rep.to_json() + "\n");
    outputs = {report_path};
    std::cout << "uniform-bound: eps slope = " << rep.eps_slope.slope << " (CI ["
              << rep.eps_slope.slope_lo() << ", " << rep.eps_slope.slope_hi()
              << "]), window slope = " << rep.window_slope.slope << "\n";
  } else if (which == "sewing-equiv") {
    FeedbackConfig fc = canonical_feedback_config(cfg, profile);
    fc.seed = seed;
    fc.jobs = jobs;
    // the germ freezes x in both h and the fast flow; couple the well to x so
    // the frozen-flow comparison is non-degenerate
    fc.fast.V0 = [](const Eigen::VectorXd& x, double y) { return -std::sin(y - 0.5 * x(0)); };
    fc.fast_x_dependent = true;
    const double eps = fc.eps_grid.size() > 1 ? fc.eps_grid[1] : fc.eps_grid[0];
    const SewingEquivReport rep = sewing_equals_young_check(fc, fc.f, eps,
                                                            profile == "paper" ? 0 : 64);
    write_text(report_path, rep.to_json() + "\n");
    outputs = {report_path};
    std::cout << "sewing-equiv: refinement slope = " << rep.refinement.slope
              << ", etabar_hat = " << rep.etabar_hat << "\n";
  } else {
    throw ConfigError("unknown run target: " + which);
  }

  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_manifest(out_dir, config_echo, seed, wall, outputs);
  return 0;
}

int cmd_report(const std::string& in_dir) {
  std::ifstream in(in_dir + "/report.json");
  if (!in) throw ConfigError("no report.json in " + in_dir);
  json rep = json::parse(in);
  std::cout << rep.dump(2) << "\n";
  if (rep.contains("param") && rep.contains("err")) {
    std::string dat = "# param err\n";
    for (std::size_t i = 0; i < rep["param"].size(); ++i)
      dat += std::to_string(rep["param"][i].get<double>()) + " " +
             std::to_string(rep["err"][i].get<double>()) + "\n";
    write_text(in_dir + "/plot.dat", dat);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fbmavg: fBm averaging toolkit (sampling, kernels, slow/fast experiments)"};
  app.set_version_flag("--version", kVersion);

  std::string config_path, out_dir = "out", profile = "smoke", run_target, report_dir = "out";
  std::uint64_t seed = 1;
  int jobs = 0;
  bool resume = false;

  auto* sample = app.add_subcommand("sample-fbm", "sample an fBm ensemble to disk");
  sample->add_option("--config", config_path);
  sample->add_option("--seed", seed);
  sample->add_option("--jobs", jobs);
  sample->add_option("--out", out_dir);

  auto* kernels = app.add_subcommand("check-kernels", "kernel identities against oracles");
  kernels->add_option("--config", config_path);
  kernels->add_option("--seed", seed);
  kernels->add_option("--out", out_dir);

  auto* run = app.add_subcommand("run", "run an averaging experiment");
  run->add_option("target", run_target,
                  "one of: nofeedback periodic feedback uniform-bound sewing-equiv")
      ->required();
  run->add_option("--config", config_path);
  run->add_option("--seed", seed);
  run->add_option("--jobs", jobs);
  run->add_option("--out", out_dir);
  run->add_option("--profile", profile)->check(CLI::IsMember({"smoke", "paper"}));
  run->add_flag("--resume", resume);

  auto* report = app.add_subcommand("report", "pretty-print a report directory");
  report->add_option("--in", report_dir);

  app.require_subcommand(1);
  CLI11_PARSE(app, argc, argv);

  try {
    const json cfg = load_config(config_path);
    if (sample->parsed()) {
      fs::create_directories(out_dir);
      return cmd_sample_fbm(cfg, out_dir, seed, jobs);
    }
    if (kernels->parsed()) return cmd_check_kernels(cfg, out_dir, seed);
    if (run->parsed()) return cmd_run(run_target, cfg, out_dir, seed, jobs, profile, resume);
    if (report->parsed()) return cmd_report(report_dir);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
