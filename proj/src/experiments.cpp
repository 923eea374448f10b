#include "fbmavg/experiments.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>

#include "fbmavg/norms.hpp"
#include "fbmavg/parallel.hpp"
#include "fbmavg/quadrature.hpp"
#include "fbmavg/rng.hpp"
#include "fbmavg/sde.hpp"
#include "fbmavg/sewing.hpp"
#include "json.hpp"

namespace fbmavg {

namespace {

using nlohmann::json;

std::string fingerprint_ensemble(const FbmEnsemble& ens) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](const void* data, std::size_t bytes) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < bytes; ++i) {
      h ^= p[i];
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto& path : ens.paths)
    mix(path.data().data(), path.data().size() * sizeof(double));
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

double holder_diff_norm(const GridPath& a, const GridPath& b, double alpha, std::size_t stride) {
  GridPath diff(a.grid(), 1);
  for (std::size_t k = 0; k < a.points(); ++k) diff.at(k) = a.at(k) - b.at(k);
  return holder_seminorm(diff, alpha, stride).value;
}

bool monotone_within_bands(const std::vector<double>& err, const std::vector<double>& se) {
  for (std::size_t i = 0; i + 1 < err.size(); ++i)
    if (err[i + 1] > err[i] + 2.0 * (se[i] + se[i + 1])) return false;
  return true;
}

MatrixCoeff scalar_matrix_coeff(std::function<double(std::size_t, double)> f) {
  return [f = std::move(f)](std::size_t k, const Eigen::VectorXd& z, Eigen::MatrixXd& out) {
    out(0, 0) = f(k, z(0));
  };
}

VectorCoeff scalar_vector_coeff(std::function<double(std::size_t, double)> f) {
  return [f = std::move(f)](std::size_t k, const Eigen::VectorXd& z, Eigen::VectorXd& out) {
    out(0) = f(k, z(0));
  };
}

json fit_to_json(const LineFit& f) {
  return json{{"slope", f.slope}, {"intercept", f.intercept}, {"r2", f.r2},
              {"slope_se", f.slope_se}, {"ci_lo", f.slope_lo()}, {"ci_hi", f.slope_hi()}};
}

// Rate fits are only meaningful on >= 2 strictly positive points; degenerate
// inputs (an exact collapse to the averaged path, or a single grid point)
// yield the default flat fit.
LineFit safe_weighted_fit(const std::vector<double>& x, const std::vector<double>& y,
                          const std::vector<double>& y_se) {
  if (x.size() < 2) return LineFit{};
  for (double v : y)
    if (!(v > 0.0)) return LineFit{};
  return fit_loglog_weighted(x, y, y_se);
}

}  // namespace

// ---------------------------------------------------------------------------
// ConvergenceReport serialisation

std::string ConvergenceReport::to_json() const {
  json j{{"name", name},
         {"param_name", param_name},
         {"param", param},
         {"err", err},
         {"err_se", err_se},
         {"p", p},
         {"error_exponent", error_exponent},
         {"rate", fit_to_json(rate)},
         {"monotone_within_bands", monotone_within_bands},
         {"driver_fingerprint", driver_fingerprint}};
  if (!manifest_json.empty()) j["manifest"] = json::parse(manifest_json);
  return j.dump(2);
}

std::string ConvergenceReport::to_csv() const {
  std::string out = "param,p,mean_err,band_lo,band_hi\n";
  char line[160];
  for (std::size_t i = 0; i < param.size(); ++i) {
    std::snprintf(line, sizeof(line), "%.12g,%g,%.12g,%.12g,%.12g\n", param[i], p, err[i],
                  err[i] - err_se[i], err[i] + err_se[i]);
    out += line;
  }
  return out;
}

std::string ConvergenceReport::plot_data() const {
  std::string out = "# " + param_name + " err\n";
  char line[96];
  for (std::size_t i = 0; i < param.size(); ++i) {
    std::snprintf(line, sizeof(line), "%.12g %.12g\n", param[i], err[i]);
    out += line;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Two-state chain

int ChainPath::state_at(double t) const {
  const auto it = std::upper_bound(jump_times.begin(), jump_times.end(), t);
  const std::size_t flips = static_cast<std::size_t>(it - jump_times.begin());
  return (flips % 2 == 0) ? initial_state : -initial_state;
}

double ChainPath::value_at(double t) const {
  return state_at(t) > 0 ? spec.y_plus : spec.y_minus;
}

ChainPath simulate_chain(const ChainSpec& spec, double horizon, RngStream& rng) {
  ChainPath path;
  path.spec = spec;
  path.horizon = horizon;
  path.initial_state = (rng.uniform() < spec.stationary_plus()) ? 1 : -1;
  double t = 0.0;
  int state = path.initial_state;
  while (true) {
    const double rate = (state > 0) ? spec.rate_down : spec.rate_up;
    double u = rng.uniform();
    while (u <= 0.0) u = rng.uniform();
    t += -std::log(u) / rate;
    if (t > horizon) break;
    path.jump_times.push_back(t);
    state = -state;
  }
  return path;
}

double chain_alpha_mixing(const ChainSpec& spec, double t) {
  const double mu_p = spec.stationary_plus();
  const double mu[2] = {mu_p, 1.0 - mu_p};
  const double relax = std::exp(-(spec.rate_up + spec.rate_down) * t);
  // P[a][b], a,b in {plus=0, minus=1}
  double P[2][2];
  P[0][0] = mu[0] + mu[1] * relax;
  P[0][1] = mu[1] * (1.0 - relax);
  P[1][0] = mu[0] * (1.0 - relax);
  P[1][1] = mu[1] + mu[0] * relax;

  double best = 0.0;
  for (int A = 0; A < 4; ++A) {
    for (int B = 0; B < 4; ++B) {
      double joint = 0.0, pa = 0.0, pb = 0.0;
      for (int a = 0; a < 2; ++a) {
        if (!(A & (1 << a))) continue;
        pa += mu[a];
        for (int b = 0; b < 2; ++b)
          if (B & (1 << b)) joint += mu[a] * P[a][b];
      }
      for (int b = 0; b < 2; ++b)
        if (B & (1 << b)) pb += mu[b];
      best = std::max(best, std::abs(joint - pa * pb));
    }
  }
  return best;
}

MixingCertificate mixing_certificate(const ChainSpec& spec, const std::vector<double>& t_grid,
                                     double delta) {
  MixingCertificate cert;
  cert.t_grid = t_grid;
  cert.delta = delta;
  for (double t : t_grid) cert.alpha.push_back(chain_alpha_mixing(spec, t));
  double C = 0.0;
  for (std::size_t i = 0; i < t_grid.size(); ++i)
    if (t_grid[i] > 0.0) C = std::max(C, cert.alpha[i] * std::pow(t_grid[i], delta));
  cert.envelope_C = C;
  cert.pass = true;
  for (std::size_t i = 0; i < t_grid.size(); ++i)
    if (t_grid[i] > 0.0 && cert.alpha[i] > C * std::pow(t_grid[i], -delta) * (1.0 + 1e-12))
      cert.pass = false;
  return cert;
}

std::string MixingCertificate::to_json() const {
  return json{{"t_grid", t_grid}, {"alpha", alpha},       {"delta", delta},
              {"envelope_C", envelope_C}, {"pass", pass}}
      .dump(2);
}

// ---------------------------------------------------------------------------
// No-feedback averaging

ConvergenceReport run_nofeedback(const NoFeedbackConfig& cfg) {
  if (!cfg.f) throw std::invalid_argument("run_nofeedback: coefficient f is required");
  if (!(cfg.alpha > 0.0 && cfg.alpha < cfg.H))
    throw std::invalid_argument("run_nofeedback: need 0 < alpha < H");

  const FbmEnsemble B = sample_fbm(cfg.H, cfg.grid, cfg.n_mc, 1, cfg.seed, cfg.jobs);
  double n_max = 0.0;
  for (double n : cfg.n_grid) n_max = std::max(n_max, n);
  const double horizon = n_max * cfg.grid.t1 + 1.0;

  const double mu_p = cfg.chain.stationary_plus();
  const auto fbar = [&](double x) {
    return mu_p * cfg.f(x, cfg.chain.y_plus) + (1.0 - mu_p) * cfg.f(x, cfg.chain.y_minus);
  };
  const bool has_g = static_cast<bool>(cfg.g);
  const auto gbar = [&](double x) {
    return mu_p * cfg.g(x, cfg.chain.y_plus) + (1.0 - mu_p) * cfg.g(x, cfg.chain.y_minus);
  };

  std::vector<std::vector<double>> errs(cfg.n_grid.size(), std::vector<double>(cfg.n_mc));
  parallel_for(cfg.n_mc, cfg.jobs, [&](std::size_t r) {
    RngStream chain_rng(cfg.seed, {stream::kChain, r});
    const ChainPath Y = simulate_chain(cfg.chain, horizon, chain_rng);
    const GridPath& b = B.paths[r];

    YoungOdeSpec avg;
    avg.F = scalar_matrix_coeff([&](std::size_t, double x) { return fbar(x); });
    if (has_g) avg.G = scalar_vector_coeff([&](std::size_t, double x) { return gbar(x); });
    avg.driver = b;
    avg.x0 = Eigen::VectorXd::Constant(1, cfg.x0);
    const GridPath xbar = solve_young(avg);

    for (std::size_t ni = 0; ni < cfg.n_grid.size(); ++ni) {
      const double n = cfg.n_grid[ni];
      YoungOdeSpec spec;
      spec.F = scalar_matrix_coeff([&, n](std::size_t k, double x) {
        return cfg.f(x, Y.value_at(n * cfg.grid.point(k)));
      });
      if (has_g)
        spec.G = scalar_vector_coeff([&, n](std::size_t k, double x) {
          return cfg.g(x, Y.value_at(n * cfg.grid.point(k)));
        });
      spec.driver = b;
      spec.x0 = Eigen::VectorXd::Constant(1, cfg.x0);
      const GridPath xn = solve_young(spec);
      errs[ni][r] = holder_diff_norm(xn, xbar, cfg.alpha, cfg.norm_stride);
    }
  });

  ConvergenceReport rep;
  rep.name = "nofeedback";
  rep.param_name = "n";
  rep.param = cfg.n_grid;
  rep.p = cfg.p;
  rep.error_exponent = cfg.alpha;
  for (std::size_t ni = 0; ni < cfg.n_grid.size(); ++ni) {
    const MeanReport m = lp_norm_se(errs[ni], cfg.p);
    rep.err.push_back(m.mean);
    rep.err_se.push_back(m.se);
  }
  rep.rate = safe_weighted_fit(rep.param, rep.err, rep.err_se);
  rep.monotone_within_bands = monotone_within_bands(rep.err, rep.err_se);
  rep.driver_fingerprint = fingerprint_ensemble(B);
  rep.manifest_json = json{{"name", rep.name},
                           {"H", cfg.H},
                           {"n_grid", cfg.n_grid},
                           {"n_mc", cfg.n_mc},
                           {"p", cfg.p},
                           {"alpha", cfg.alpha},
                           {"grid_n", cfg.grid.n},
                           {"t1", cfg.grid.t1},
                           {"chain_rate_up", cfg.chain.rate_up},
                           {"chain_rate_down", cfg.chain.rate_down},
                           {"x0", cfg.x0},
                           {"seed", cfg.seed}}
                          .dump();
  return rep;
}

// ---------------------------------------------------------------------------
// Periodic example

PeriodicReport run_periodic_example(const PeriodicConfig& cfg) {
  if (cfg.components.empty()) throw std::invalid_argument("run_periodic_example: no components");

  const auto f_n = [&](double n, double t, double x) {
    double acc = 0.0;
    for (const auto& c : cfg.components) acc += c.weight * c.F(n * t, x);
    return acc;
  };
  std::function<double(double)> fbar = cfg.fbar;
  if (!fbar) {
    fbar = [&cfg](double x) {
      double acc = 0.0;
      for (const auto& c : cfg.components)
        acc += c.weight / c.period *
               integrate([&](double t) { return c.F(t, x); }, 0.0, c.period, 1e-10);
      return acc;
    };
  }

  PeriodicReport rep;
  rep.n_grid = cfg.n_grid;
  for (double n : cfg.n_grid) {
    const NormReport nr = neg_holder_xdep_norm(
        [&](double t, double x) { return f_n(n, t, x) - fbar(x); }, cfg.grid, cfg.x_samples,
        cfg.kappa, 1.0, cfg.norm_stride);
    rep.coeff_norm.push_back(std::max(nr.value, 1e-300));
  }
  rep.coeff_rate = fit_loglog(cfg.n_grid, rep.coeff_norm);

  const FbmEnsemble B = sample_fbm(cfg.H, cfg.grid, cfg.n_mc, 1, cfg.seed, cfg.jobs);
  std::vector<std::vector<double>> errs(cfg.n_grid.size(), std::vector<double>(cfg.n_mc));
  parallel_for(cfg.n_mc, cfg.jobs, [&](std::size_t r) {
    const GridPath& b = B.paths[r];
    YoungOdeSpec avg;
    avg.F = scalar_matrix_coeff([&](std::size_t, double x) { return fbar(x); });
    avg.driver = b;
    avg.x0 = Eigen::VectorXd::Constant(1, cfg.x0);
    const GridPath xbar = solve_young(avg);
    for (std::size_t ni = 0; ni < cfg.n_grid.size(); ++ni) {
      const double n = cfg.n_grid[ni];
      YoungOdeSpec spec;
      spec.F = scalar_matrix_coeff(
          [&, n](std::size_t k, double x) { return f_n(n, cfg.grid.point(k), x); });
      spec.driver = b;
      spec.x0 = Eigen::VectorXd::Constant(1, cfg.x0);
      const GridPath xn = solve_young(spec);
      errs[ni][r] = holder_diff_norm(xn, xbar, cfg.alpha, cfg.norm_stride);
    }
  });

  rep.solution.name = "periodic";
  rep.solution.param_name = "n";
  rep.solution.param = cfg.n_grid;
  rep.solution.p = cfg.p;
  rep.solution.error_exponent = cfg.alpha;
  for (std::size_t ni = 0; ni < cfg.n_grid.size(); ++ni) {
    const MeanReport m = lp_norm_se(errs[ni], cfg.p);
    rep.solution.err.push_back(m.mean);
    rep.solution.err_se.push_back(m.se);
  }
  rep.solution.rate = safe_weighted_fit(rep.solution.param, rep.solution.err, rep.solution.err_se);
  rep.solution.monotone_within_bands = monotone_within_bands(rep.solution.err, rep.solution.err_se);
  rep.solution.driver_fingerprint = fingerprint_ensemble(B);
  rep.solution.manifest_json =
      json{{"name", "periodic"}, {"H", cfg.H},       {"n_grid", cfg.n_grid},
           {"n_mc", cfg.n_mc},   {"kappa", cfg.kappa}, {"seed", cfg.seed}}
          .dump();
  return rep;
}

std::string PeriodicReport::to_json() const {
  json j = json::parse(solution.to_json());
  j["coeff_norm"] = coeff_norm;
  j["coeff_rate"] = fit_to_json(coeff_rate);
  return j.dump(2);
}

// ---------------------------------------------------------------------------
// Feedback co-simulation

CoSimPath cosimulate_feedback(const FeedbackConfig& cfg, double eps, const GridPath& B,
                              std::uint64_t replica, bool store_noise) {
  if (!cfg.f) throw std::invalid_argument("cosimulate_feedback: coefficient f is required");
  const TimeGrid& grid = cfg.slow_grid;
  const double h = grid.spacing();
  const double dt_target = eps / cfg.substep_factor;
  const std::size_t n_sub = static_cast<std::size_t>(std::ceil(h / dt_target - 1e-12));
  const double dt = h / static_cast<double>(n_sub);
  FastSystem fs = cfg.fast;
  fs.epsilon = eps;
  if (dt > eps / 10.0 * (1.0 + 1e-12))
    throw std::invalid_argument("cosimulate_feedback: substep guard violated");

  RngStream rng(cfg.seed, {stream::kWiener, replica, std::bit_cast<std::uint64_t>(eps)});

  CoSimPath out;
  out.n_sub = n_sub;
  out.x = GridPath(grid, 1);
  out.y.assign(grid.points(), 0.0);
  const std::size_t m_hat = fs.V.size();
  if (store_noise) out.noise.reserve(grid.n * n_sub * m_hat);

  const bool has_g = static_cast<bool>(cfg.g);
  double x = cfg.x0;
  double y = cfg.y0;
  std::vector<double> noise(m_hat);
  out.x.at(0) = x;
  out.y[0] = y;
  for (std::size_t k = 0; k < grid.n; ++k) {
    const double db = B.at(k + 1) - B.at(k);
    double x_next = x + cfg.f(x, y) * db;
    if (has_g) x_next += cfg.g(x, y) * h;
    if (!(std::abs(x_next) < 1e8)) throw BlowUpError(grid.point(k + 1));
    const Eigen::VectorXd frozen = Eigen::VectorXd::Constant(1, x);
    for (std::size_t j = 0; j < n_sub; ++j) {
      for (auto& z : noise) {
        z = rng.normal();
        if (store_noise) out.noise.push_back(z);
      }
      y = step_frozen(fs, frozen, y, dt, noise);
    }
    x = x_next;
    out.x.at(k + 1) = x;
    out.y[k + 1] = y;
  }
  return out;
}

std::function<double(double)> averaged_slow_coefficient(
    const FeedbackConfig& cfg, std::function<double(double, double)> coeff) {
  FastSystem fs = cfg.fast;
  fs.epsilon = 0.1;  // densities do not depend on eps
  if (!cfg.fast_x_dependent) {
    auto mu = std::make_shared<InvariantDensity>(
        invariant_density(fs, Eigen::VectorXd::Constant(1, cfg.x0), cfg.density_ny));
    return [mu, coeff = std::move(coeff)](double x) {
      const double dy = mu->dy();
      double acc = 0.0;
      for (std::size_t j = 0; j < mu->n_y; ++j)
        acc += coeff(x, dy * static_cast<double>(j)) * mu->density[j] * dy;
      return acc;
    };
  }
  struct Memo {
    std::mutex mutex;
    std::map<long long, std::shared_ptr<InvariantDensity>> densities;
  };
  auto memo = std::make_shared<Memo>();
  auto cfg_fast = std::make_shared<FastSystem>(fs);
  const std::size_t n_y = cfg.density_ny;
  return [memo, cfg_fast, n_y, coeff = std::move(coeff)](double x) {
    const long long key = std::llround(x * 1e6);
    std::shared_ptr<InvariantDensity> mu;
    {
      std::lock_guard<std::mutex> lock(memo->mutex);
      auto it = memo->densities.find(key);
      if (it != memo->densities.end()) mu = it->second;
    }
    if (!mu) {
      mu = std::make_shared<InvariantDensity>(invariant_density(
          *cfg_fast, Eigen::VectorXd::Constant(1, static_cast<double>(key) * 1e-6), n_y));
      std::lock_guard<std::mutex> lock(memo->mutex);
      memo->densities.emplace(key, mu);
    }
    const double dy = mu->dy();
    double acc = 0.0;
    for (std::size_t j = 0; j < mu->n_y; ++j)
      acc += coeff(x, dy * static_cast<double>(j)) * mu->density[j] * dy;
    return acc;
  };
}

ConvergenceReport run_feedback(const FeedbackConfig& cfg) {
  const FbmEnsemble B = sample_fbm(cfg.H, cfg.slow_grid, cfg.n_mc, 1, cfg.seed, cfg.jobs);
  const auto fbar = averaged_slow_coefficient(cfg, cfg.f);
  std::function<double(double)> gbar;
  if (cfg.g) gbar = averaged_slow_coefficient(cfg, cfg.g);

  std::vector<std::vector<double>> errs(cfg.eps_grid.size(), std::vector<double>(cfg.n_mc));
  parallel_for(cfg.n_mc, cfg.jobs, [&](std::size_t r) {
    const GridPath& b = B.paths[r];
    YoungOdeSpec avg;
    avg.F = scalar_matrix_coeff([&](std::size_t, double x) { return fbar(x); });
    if (gbar) avg.G = scalar_vector_coeff([&](std::size_t, double x) { return gbar(x); });
    avg.driver = b;
    avg.x0 = Eigen::VectorXd::Constant(1, cfg.x0);
    const GridPath xbar = solve_young(avg);  // one averaged solve per driver path
    for (std::size_t ei = 0; ei < cfg.eps_grid.size(); ++ei) {
      const CoSimPath sim = cosimulate_feedback(cfg, cfg.eps_grid[ei], b, r, false);
      errs[ei][r] = holder_diff_norm(sim.x, xbar, cfg.beta_report, cfg.norm_stride);
    }
  });

  ConvergenceReport rep;
  rep.name = "feedback";
  rep.param_name = "eps";
  rep.param = cfg.eps_grid;
  rep.p = cfg.p;
  rep.error_exponent = cfg.beta_report;
  bool positive = true;
  for (std::size_t ei = 0; ei < cfg.eps_grid.size(); ++ei) {
    const MeanReport m = lp_norm_se(errs[ei], cfg.p);
    rep.err.push_back(m.mean);
    rep.err_se.push_back(m.se);
    positive = positive && m.mean > 0.0;
  }
  // replicas share the driver B across the eps grid, so the rate CI comes
  // from a paired bootstrap over replicas rather than independent bands
  if (cfg.eps_grid.size() >= 2 && positive)
    rep.rate = bootstrap_loglog_rate(rep.param, errs, cfg.p, cfg.seed ^ 0xb00511ULL);
  rep.monotone_within_bands = monotone_within_bands(rep.err, rep.err_se);
  rep.driver_fingerprint = fingerprint_ensemble(B);
  rep.manifest_json = json{{"name", rep.name},
                           {"H", cfg.H},
                           {"eps_grid", cfg.eps_grid},
                           {"n_mc", cfg.n_mc},
                           {"p", cfg.p},
                           {"beta_report", cfg.beta_report},
                           {"slow_n", cfg.slow_grid.n},
                           {"t1", cfg.slow_grid.t1},
                           {"substep_factor", cfg.substep_factor},
                           {"x0", cfg.x0},
                           {"y0", cfg.y0},
                           {"seed", cfg.seed}}
                          .dump();
  return rep;
}

// ---------------------------------------------------------------------------
// Uniform bound experiment

UniformBoundReport uniform_bound_experiment(const FeedbackConfig& cfg,
                                            const std::function<double(double, double)>& h,
                                            std::size_t n_windows) {
  const TimeGrid& grid = cfg.slow_grid;
  if ((grid.n & (grid.n - 1)) != 0)
    throw std::invalid_argument("uniform_bound_experiment: dyadic slow grid expected");
  UniformBoundReport rep;
  rep.eps_grid = cfg.eps_grid;
  std::vector<std::size_t> window_idx;
  for (std::size_t w = 0; w < n_windows; ++w) {
    window_idx.push_back(grid.n >> w);
    rep.windows.push_back((grid.t1 - grid.t0) / static_cast<double>(std::size_t{1} << w));
  }

  const FbmEnsemble B = sample_fbm(cfg.H, grid, cfg.n_mc, 1, cfg.seed, cfg.jobs);
  std::vector<std::vector<std::vector<double>>> vals(
      cfg.eps_grid.size(),
      std::vector<std::vector<double>>(n_windows, std::vector<double>(cfg.n_mc)));

  parallel_for(cfg.n_mc, cfg.jobs, [&](std::size_t r) {
    const GridPath& b = B.paths[r];
    for (std::size_t ei = 0; ei < cfg.eps_grid.size(); ++ei) {
      const CoSimPath sim = cosimulate_feedback(cfg, cfg.eps_grid[ei], b, r, false);
      double acc = 0.0;
      std::vector<double> at(n_windows, 0.0);
      for (std::size_t k = 0; k < grid.n; ++k) {
        acc += h(sim.x.at(k), sim.y[k]) * (b.at(k + 1) - b.at(k));
        for (std::size_t w = 0; w < n_windows; ++w)
          if (k + 1 == window_idx[w]) at[w] = acc;
      }
      for (std::size_t w = 0; w < n_windows; ++w) vals[ei][w][r] = at[w];
    }
  });

  rep.lp.assign(cfg.eps_grid.size(), std::vector<double>(n_windows, 0.0));
  rep.lp_se.assign(cfg.eps_grid.size(), std::vector<double>(n_windows, 0.0));
  bool positive = true;
  for (std::size_t ei = 0; ei < cfg.eps_grid.size(); ++ei)
    for (std::size_t w = 0; w < n_windows; ++w) {
      const MeanReport m = lp_norm_se(vals[ei][w], cfg.p);
      rep.lp[ei][w] = m.mean;
      rep.lp_se[ei][w] = m.se;
      positive = positive && m.mean > 0.0;
    }
  rep.raw = vals;

  if (cfg.eps_grid.size() >= 2 && positive) {
    std::vector<std::vector<double>> at_w0(cfg.eps_grid.size());
    for (std::size_t ei = 0; ei < cfg.eps_grid.size(); ++ei) at_w0[ei] = vals[ei][0];
    rep.eps_slope = bootstrap_loglog_rate(cfg.eps_grid, at_w0, cfg.p, cfg.seed ^ 0xb00512ULL);
  }
  std::size_t emin = 0;
  for (std::size_t ei = 1; ei < cfg.eps_grid.size(); ++ei)
    if (cfg.eps_grid[ei] < cfg.eps_grid[emin]) emin = ei;
  if (n_windows >= 2 && positive)
    rep.window_slope =
        bootstrap_loglog_rate(rep.windows, vals[emin], cfg.p, cfg.seed ^ 0xb00513ULL);
  rep.manifest_json = json{{"name", "uniform_bound"},
                           {"H", cfg.H},
                           {"eps_grid", cfg.eps_grid},
                           {"n_mc", cfg.n_mc},
                           {"p", cfg.p},
                           {"windows", rep.windows},
                           {"seed", cfg.seed}}
                          .dump();
  return rep;
}

std::string UniformBoundReport::to_json() const {
  json j{{"eps_grid", eps_grid}, {"windows", windows},
         {"lp", lp},             {"lp_se", lp_se},
         {"eps_slope", fit_to_json(eps_slope)}, {"window_slope", fit_to_json(window_slope)}};
  if (!manifest_json.empty()) j["manifest"] = json::parse(manifest_json);
  return j.dump(2);
}

// ---------------------------------------------------------------------------
// Sewing equals Young

SewingEquivReport sewing_equals_young_check(const FeedbackConfig& cfg,
                                            const std::function<double(double, double)>& h,
                                            double eps, std::size_t n_mc_override) {
  const TimeGrid& grid = cfg.slow_grid;
  if ((grid.n & (grid.n - 1)) != 0)
    throw std::invalid_argument("sewing_equals_young_check: dyadic slow grid expected");
  std::size_t max_level = 0;
  while ((std::size_t{1} << max_level) < grid.n) ++max_level;
  const std::size_t n_mc = n_mc_override ? n_mc_override : cfg.n_mc;

  const FbmEnsemble B = sample_fbm(cfg.H, grid, n_mc, 1, cfg.seed, cfg.jobs);
  FastSystem fs = cfg.fast;
  fs.epsilon = eps;
  const std::size_t m_hat = fs.V.size();

  std::vector<std::vector<double>> diffs(max_level + 1, std::vector<double>(n_mc));
  std::vector<std::vector<double>> changes(max_level, std::vector<double>(n_mc));

  parallel_for(n_mc, cfg.jobs, [&](std::size_t r) {
    const GridPath& b = B.paths[r];
    const CoSimPath sim = cosimulate_feedback(cfg, eps, b, r, true);
    const std::size_t n_sub = sim.n_sub;
    const double dt = grid.spacing() / static_cast<double>(n_sub);

    double young = 0.0;
    for (std::size_t k = 0; k < grid.n; ++k)
      young += h(sim.x.at(k), sim.y[k]) * (b.at(k + 1) - b.at(k));

    // A_{i,j} = sum_k h(x_i, Y^{(i)}_k) dB_k with Y^{(i)} the frozen-x flow
    // re-simulated from (t_i, y_i) under the same stored noise.
    const auto germ = [&](std::size_t i, std::size_t j) {
      const Eigen::VectorXd frozen = Eigen::VectorXd::Constant(1, sim.x.at(i));
      double yf = sim.y[i];
      double acc = 0.0;
      std::vector<double> noise(m_hat);
      for (std::size_t k = i; k < j; ++k) {
        acc += h(sim.x.at(i), yf) * (b.at(k + 1) - b.at(k));
        for (std::size_t sub = 0; sub < n_sub; ++sub) {
          for (std::size_t c = 0; c < m_hat; ++c)
            noise[c] = sim.noise[(k * n_sub + sub) * m_hat + c];
          yf = step_frozen(fs, frozen, yf, dt, noise);
        }
      }
      return acc;
    };

    double prev = 0.0;
    for (std::size_t level = 0; level <= max_level; ++level) {
      const std::size_t stride = grid.n >> level;
      double sum = 0.0;
      for (std::size_t piece = 0; piece < (std::size_t{1} << level); ++piece)
        sum += germ(piece * stride, (piece + 1) * stride);
      diffs[level][r] = std::abs(sum - young);
      if (level > 0) changes[level - 1][r] = std::abs(sum - prev);
      prev = sum;
    }
  });

  SewingEquivReport rep;
  std::vector<double> fit_dt, fit_val, fit_se;
  for (std::size_t level = 0; level <= max_level; ++level) {
    const MeanReport m = lp_norm_se(diffs[level], 2.0);
    rep.levels.push_back(static_cast<int>(level));
    rep.piece_dt.push_back((grid.t1 - grid.t0) / static_cast<double>(std::size_t{1} << level));
    rep.l2_diff.push_back(m.mean);
    rep.l2_diff_se.push_back(m.se);
    if (m.mean > 1e-14) {
      fit_dt.push_back(rep.piece_dt.back());
      fit_val.push_back(m.mean);
      fit_se.push_back(std::max(m.se, 1e-16));
    }
  }
  if (fit_dt.size() >= 2) rep.refinement = safe_weighted_fit(fit_dt, fit_val, fit_se);

  std::vector<double> ch_dt, ch_val;
  std::size_t contracting = 0, checks = 0;
  double prev_change = 0.0;
  for (std::size_t level = 0; level < max_level; ++level) {
    const MeanReport m = mean_se(changes[level]);
    const double piece = (grid.t1 - grid.t0) / static_cast<double>(std::size_t{1} << level);
    if (m.mean > 1e-14) {
      ch_dt.push_back(piece);
      ch_val.push_back(m.mean);
      if (level > 0 && prev_change > 0.0) {
        ++checks;
        if (m.mean < prev_change) ++contracting;
      }
    }
    prev_change = m.mean;
  }
  if (ch_dt.size() >= 2) rep.etabar_hat = 1.0 + fit_loglog(ch_dt, ch_val).slope;
  rep.contraction_ok = (checks == 0) || (contracting * 3 >= checks * 2);
  return rep;
}

std::string SewingEquivReport::to_json() const {
  return json{{"levels", levels},
              {"piece_dt", piece_dt},
              {"l2_diff", l2_diff},
              {"l2_diff_se", l2_diff_se},
              {"refinement", fit_to_json(refinement)},
              {"etabar_hat", etabar_hat},
              {"contraction_ok", contraction_ok}}
      .dump(2);
}

}  // namespace fbmavg
