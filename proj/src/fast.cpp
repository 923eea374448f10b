#include "fbmavg/fast.hpp"

#include <cmath>
#include <stdexcept>

#include "fbmavg/parallel.hpp"
#include "fbmavg/rng.hpp"

namespace fbmavg {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;

void require_dt(const FastSystem& sys, double dt) {
  if (!(dt > 0.0) || dt > sys.epsilon / 10.0 * (1.0 + 1e-12))
    throw std::invalid_argument("fast step requires dt <= epsilon/10");
}

// Central finite-difference derivative in y of a circle field.
double d_dy(const CircleField& f, const Eigen::VectorXd& x, double y) {
  const double h = 1e-6;
  return (f(x, y + h) - f(x, y - h)) / (2.0 * h);
}

// Cumulative integral on a uniform grid, 4th order (Simpson pairs plus a
// half-panel rule for odd indices). values has n+1 entries.
std::vector<double> cumulative_integral(const std::vector<double>& v, double h) {
  const std::size_t n = v.size() - 1;
  std::vector<double> out(n + 1, 0.0);
  for (std::size_t j = 1; j <= n; ++j) {
    if (j >= 2 && j % 2 == 0) {
      out[j] = out[j - 2] + h / 3.0 * (v[j - 2] + 4.0 * v[j - 1] + v[j]);
    } else if (j + 1 <= n) {
      out[j] = out[j - 1] + h / 12.0 * (5.0 * v[j - 1] + 8.0 * v[j] - v[j + 1]);
    } else {
      out[j] = out[j - 1] + h / 12.0 * (5.0 * v[j - 1] + 8.0 * v[j] - v[j - 1]);
    }
  }
  return out;
}

}  // namespace

double wrap_angle(double y) {
  double w = std::fmod(y, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  return w;
}

double circle_distance(double a, double b) {
  const double d = std::abs(wrap_angle(a) - wrap_angle(b));
  return std::min(d, kTwoPi - d);
}

void check_fast_system(const FastSystem& sys, const std::vector<Eigen::VectorXd>& x_probe,
                       std::size_t n_y) {
  if (sys.V.empty()) throw std::invalid_argument("fast system needs at least one diffusion field");
  for (const auto& x : x_probe) {
    for (std::size_t j = 0; j < n_y; ++j) {
      const double y = kTwoPi * static_cast<double>(j) / static_cast<double>(n_y);
      double ell = 0.0;
      for (const auto& Vk : sys.V) {
        const double v = Vk(x, y);
        ell += v * v;
        if (std::abs(Vk(x, y + kTwoPi) - v) > 1e-9)
          throw std::invalid_argument("diffusion field is not 2*pi periodic");
      }
      if (ell < sys.ellipticity - 1e-12)
        throw std::invalid_argument("ellipticity bound violated on probe grid");
      if (std::abs(sys.V0(x, y + kTwoPi) - sys.V0(x, y)) > 1e-9)
        throw std::invalid_argument("drift field is not 2*pi periodic");
    }
  }
}

double step_frozen(const FastSystem& sys, const Eigen::VectorXd& x, double y, double dt,
                   std::span<const double> noise) {
  require_dt(sys, dt);
  if (noise.size() != sys.V.size())
    throw std::invalid_argument("noise draw count must match diffusion field count");
  const double sq = std::sqrt(dt / sys.epsilon);
  const double drift_scale = dt / sys.epsilon;

  double pred = y + sys.V0(x, y) * drift_scale;
  for (std::size_t k = 0; k < sys.V.size(); ++k) pred += sys.V[k](x, y) * sq * noise[k];

  double out = y + 0.5 * (sys.V0(x, y) + sys.V0(x, pred)) * drift_scale;
  for (std::size_t k = 0; k < sys.V.size(); ++k)
    out += 0.5 * (sys.V[k](x, y) + sys.V[k](x, pred)) * sq * noise[k];
  return wrap_angle(out);
}

double step_feedback(const FastSystem& sys, const Eigen::VectorXd& x_left, double y, double dt,
                     std::span<const double> noise) {
  return step_frozen(sys, x_left, y, dt, noise);
}

double InvariantDensity::dy() const { return kTwoPi / static_cast<double>(n_y); }

double InvariantDensity::value_at(double y) const {
  const double pos = wrap_angle(y) / dy();
  const std::size_t j = static_cast<std::size_t>(pos) % n_y;
  const double frac = pos - std::floor(pos);
  return (1.0 - frac) * density[j] + frac * density[(j + 1) % n_y];
}

InvariantDensity invariant_density_occupation(const FastSystem& sys, const Eigen::VectorXd& x,
                                              std::size_t n_y, std::uint64_t seed,
                                              std::size_t n_steps) {
  InvariantDensity mu;
  mu.x = x;
  mu.n_y = n_y;
  mu.density.assign(n_y, 0.0);
  RngStream rng(seed, {stream::kFastInit});
  const double dt = sys.default_dt();
  double y = rng.uniform() * kTwoPi;
  std::vector<double> noise(sys.V.size());
  const std::size_t burn = n_steps / 10;
  std::size_t counted = 0;
  for (std::size_t s = 0; s < n_steps; ++s) {
    for (auto& z : noise) z = rng.normal();
    y = step_frozen(sys, x, y, dt, noise);
    if (s >= burn) {
      const std::size_t j =
          static_cast<std::size_t>(y / kTwoPi * static_cast<double>(n_y)) % n_y;
      mu.density[j] += 1.0;
      ++counted;
    }
  }
  const double norm = static_cast<double>(counted) * mu.dy();
  for (auto& d : mu.density) d /= norm;
  return mu;
}

InvariantDensity invariant_density(const FastSystem& sys, const Eigen::VectorXd& x,
                                   std::size_t n_y, std::uint64_t seed,
                                   std::size_t occupation_steps) {
  if (sys.V.empty()) throw std::invalid_argument("fast system needs a diffusion field");
  {
    // ellipticity gate at this x
    double min_ell = 1e300;
    for (std::size_t j = 0; j < 128; ++j) {
      const double y = kTwoPi * static_cast<double>(j) / 128.0;
      double e = 0.0;
      for (const auto& Vk : sys.V) e += Vk(x, y) * Vk(x, y);
      min_ell = std::min(min_ell, e);
    }
    if (!(min_ell > 0.0)) throw std::invalid_argument("non-elliptic fast input");
  }
  if (sys.V.size() > 1) return invariant_density_occupation(sys, x, n_y, seed, occupation_steps);
  if (n_y % 2 != 0) throw std::invalid_argument("invariant_density: n_y must be even");

  // Ito form: drift b = V0/eps + V V'/(2 eps), diffusion a = V^2/eps.
  // Stationary periodic Fokker-Planck with constant current:
  //   rho(y) ~ e^{Phi(y)}/a(y) * ( (I1 - I(y)) + e^{-Phi(2pi)} I(y) ),
  // Phi(y) = int_0^y 2 b/a, I(y) = int_0^y e^{-Phi}. The epsilons cancel in
  // 2 b/a, which is the asserted eps-independence of mu^x.
  const auto& V = sys.V[0];
  InvariantDensity mu;
  mu.x = x;
  mu.n_y = n_y;
  mu.density.assign(n_y, 0.0);
  const double h = mu.dy();

  std::vector<double> phi(n_y + 1);
  std::vector<double> a(n_y + 1);
  for (std::size_t j = 0; j <= n_y; ++j) {
    const double y = h * static_cast<double>(j);
    const double v = V(x, y);
    const double av = v * v / sys.epsilon;
    const double b = sys.V0(x, y) / sys.epsilon + v * d_dy(V, x, y) / (2.0 * sys.epsilon);
    phi[j] = 2.0 * b / av;
    a[j] = av;
  }
  const std::vector<double> Phi = cumulative_integral(phi, h);
  const double phi_total = Phi[n_y];

  std::vector<double> raw(n_y);
  if (std::abs(phi_total) < 1e-9) {
    for (std::size_t j = 0; j < n_y; ++j) raw[j] = std::exp(Phi[j]) / a[j];
  } else {
    std::vector<double> em(n_y + 1);
    for (std::size_t j = 0; j <= n_y; ++j) em[j] = std::exp(-Phi[j]);
    const std::vector<double> I = cumulative_integral(em, h);
    const double wrap = std::exp(-phi_total);
    for (std::size_t j = 0; j < n_y; ++j)
      raw[j] = std::exp(Phi[j]) / a[j] * ((I[n_y] - I[j]) + wrap * I[j]);
  }
  double total = 0.0;
  for (double v : raw) total += v * h;
  for (std::size_t j = 0; j < n_y; ++j) mu.density[j] = raw[j] / total;
  return mu;
}

double averaged_coefficient(const CircleField& f, const FastSystem& /*sys*/,
                            const Eigen::VectorXd& x, const InvariantDensity& mu) {
  double acc = 0.0;
  const double h = mu.dy();
  for (std::size_t j = 0; j < mu.n_y; ++j)
    acc += f(x, h * static_cast<double>(j)) * mu.density[j] * h;
  return acc;
}

double averaged_coefficient(const CircleField& f, const FastSystem& sys, const Eigen::VectorXd& x,
                            std::size_t n_y) {
  return averaged_coefficient(f, sys, x, invariant_density(sys, x, n_y));
}

SemigroupEstimate semigroup_apply(const FastSystem& sys, const Eigen::VectorXd& x,
                                  const std::function<double(double)>& F,
                                  const std::vector<double>& t_grid, std::size_t n_mc,
                                  std::size_t n_y_eval, std::uint64_t seed, int jobs) {
  SemigroupEstimate est;
  est.times = t_grid;
  est.y_grid.resize(n_y_eval);
  for (std::size_t i = 0; i < n_y_eval; ++i)
    est.y_grid[i] = kTwoPi * static_cast<double>(i) / static_cast<double>(n_y_eval);
  const double dt = sys.default_dt();

  // accumulate F-values per (y0, time, replica)
  std::vector<std::vector<std::vector<double>>> samples(
      n_y_eval, std::vector<std::vector<double>>(t_grid.size(), std::vector<double>(n_mc)));

  parallel_for(n_y_eval * n_mc, jobs, [&](std::size_t task) {
    const std::size_t yi = task / n_mc;
    const std::size_t rep = task % n_mc;
    RngStream rng(seed, {stream::kWiener, yi, rep});
    std::vector<double> noise(sys.V.size());
    double y = est.y_grid[yi];
    double t = 0.0;
    std::size_t next_t = 0;
    while (next_t < t_grid.size()) {
      while (next_t < t_grid.size() && t >= t_grid[next_t] - 1e-12) {
        samples[yi][next_t][rep] = F(y);
        ++next_t;
      }
      if (next_t >= t_grid.size()) break;
      const double step = std::min(dt, t_grid[next_t] - t);
      for (auto& z : noise) z = rng.normal();
      y = step_frozen(sys, x, y, step, noise);
      t += step;
    }
  });

  est.values.assign(t_grid.size(), std::vector<double>(n_y_eval, 0.0));
  est.bands.assign(t_grid.size(), std::vector<double>(n_y_eval, 0.0));
  est.osc.resize(t_grid.size());
  est.osc_band.resize(t_grid.size());
  for (std::size_t ti = 0; ti < t_grid.size(); ++ti) {
    double lo = 1e300, hi = -1e300, band_at_lo = 0.0, band_at_hi = 0.0;
    for (std::size_t yi = 0; yi < n_y_eval; ++yi) {
      const MeanReport m = mean_se(samples[yi][ti]);
      est.values[ti][yi] = m.mean;
      est.bands[ti][yi] = m.se;
      if (m.mean < lo) {
        lo = m.mean;
        band_at_lo = m.se;
      }
      if (m.mean > hi) {
        hi = m.mean;
        band_at_hi = m.se;
      }
    }
    est.osc[ti] = hi - lo;
    est.osc_band[ti] = band_at_lo + band_at_hi;
  }
  return est;
}

ErgodicityReport ergodicity_diagnostics(const FastSystem& sys, const Eigen::VectorXd& x,
                                        const std::function<double(double)>& F,
                                        const std::vector<double>& t_grid, std::size_t n_mc,
                                        std::size_t n_y_eval, std::uint64_t seed, int jobs) {
  {
    double lo = 1e300, hi = -1e300;
    for (std::size_t i = 0; i < 64; ++i) {
      const double v = F(kTwoPi * static_cast<double>(i) / 64.0);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (!(hi > lo)) throw std::invalid_argument("ergodicity diagnostics require non-constant F");
  }
  ErgodicityReport rep;
  rep.semigroup = semigroup_apply(sys, x, F, t_grid, n_mc, n_y_eval, seed, jobs);
  std::vector<double> ts, oscs;
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    // truncate the fit window at the MC floor
    if (rep.semigroup.osc[i] > 3.0 * rep.semigroup.osc_band[i] && rep.semigroup.osc[i] > 0.0) {
      ts.push_back(t_grid[i]);
      oscs.push_back(rep.semigroup.osc[i]);
    }
  }
  rep.fit_points = ts.size();
  if (ts.size() >= 2) {
    std::vector<double> logo(oscs.size());
    for (std::size_t i = 0; i < oscs.size(); ++i) logo[i] = std::log(oscs[i]);
    rep.decay = fit_line(ts, logo);  // slope is -c/eps
  }
  return rep;
}

XContinuityReport x_continuity_check(const FastSystem& sys, const Eigen::VectorXd& x,
                                     const Eigen::VectorXd& xbar,
                                     const std::function<double(double)>& F,
                                     const std::vector<double>& t_grid, std::size_t n_mc,
                                     std::size_t n_y_eval, std::uint64_t seed, int jobs) {
  XContinuityReport rep;
  rep.times = t_grid;
  rep.sup_diff.assign(t_grid.size(), 0.0);
  rep.band.assign(t_grid.size(), 0.0);
  const double dt = sys.default_dt();

  std::vector<std::vector<std::vector<double>>> diffs(
      n_y_eval, std::vector<std::vector<double>>(t_grid.size(), std::vector<double>(n_mc)));

  parallel_for(n_y_eval * n_mc, jobs, [&](std::size_t task) {
    const std::size_t yi = task / n_mc;
    const std::size_t rep_i = task % n_mc;
    // common random numbers couple the two frozen flows
    RngStream rng(seed, {stream::kWiener, yi, rep_i});
    std::vector<double> noise(sys.V.size());
    double y1 = kTwoPi * static_cast<double>(yi) / static_cast<double>(n_y_eval);
    double y2 = y1;
    double t = 0.0;
    std::size_t next_t = 0;
    while (next_t < t_grid.size()) {
      while (next_t < t_grid.size() && t >= t_grid[next_t] - 1e-12) {
        diffs[yi][next_t][rep_i] = F(y1) - F(y2);
        ++next_t;
      }
      if (next_t >= t_grid.size()) break;
      const double step = std::min(dt, t_grid[next_t] - t);
      for (auto& z : noise) z = rng.normal();
      y1 = step_frozen(sys, x, y1, step, noise);
      y2 = step_frozen(sys, xbar, y2, step, noise);
      t += step;
    }
  });

  for (std::size_t ti = 0; ti < t_grid.size(); ++ti) {
    double sup = 0.0, band = 0.0;
    for (std::size_t yi = 0; yi < n_y_eval; ++yi) {
      const MeanReport m = mean_se(diffs[yi][ti]);
      if (std::abs(m.mean) > sup) {
        sup = std::abs(m.mean);
        band = m.se;
      }
    }
    rep.sup_diff[ti] = sup;
    rep.band[ti] = band;
  }
  return rep;
}

ErgodicAverageReport ergodic_average_check(FastSystem sys, const Eigen::VectorXd& x,
                                           const CircleField& f, const std::vector<double>& t_grid,
                                           const std::vector<double>& eps_grid, double p,
                                           std::size_t n_mc, std::uint64_t seed, int jobs) {
  ErgodicAverageReport rep;
  rep.eps_grid = eps_grid;
  rep.t_grid = t_grid;
  rep.lp_norm.assign(eps_grid.size(), std::vector<double>(t_grid.size(), 0.0));
  rep.lp_se.assign(eps_grid.size(), std::vector<double>(t_grid.size(), 0.0));

  double t_max = 0.0;
  for (double t : t_grid) t_max = std::max(t_max, t);

  for (std::size_t ei = 0; ei < eps_grid.size(); ++ei) {
    sys.epsilon = eps_grid[ei];
    const double fbar = averaged_coefficient(f, sys, x);
    const double dt = sys.default_dt();
    std::vector<std::vector<double>> integ(t_grid.size(), std::vector<double>(n_mc));
    parallel_for(n_mc, jobs, [&](std::size_t rep_i) {
      RngStream rng(seed, {stream::kWiener, ei, rep_i});
      std::vector<double> noise(sys.V.size());
      double y = 0.0;
      double t = 0.0, acc = 0.0;
      std::size_t next_t = 0;
      while (next_t < t_grid.size() && t < t_max + 1e-12) {
        while (next_t < t_grid.size() && t >= t_grid[next_t] - 1e-12) {
          integ[next_t][rep_i] = acc;
          ++next_t;
        }
        if (next_t >= t_grid.size()) break;
        const double step = std::min(dt, t_grid[next_t] - t);
        acc += (f(x, y) - fbar) * step;  // left-point rule
        for (auto& z : noise) z = rng.normal();
        y = step_frozen(sys, x, y, step, noise);
        t += step;
      }
      while (next_t < t_grid.size()) {
        integ[next_t][rep_i] = acc;
        ++next_t;
      }
    });
    for (std::size_t ti = 0; ti < t_grid.size(); ++ti) {
      const MeanReport m = lp_norm_se(integ[ti], p);
      rep.lp_norm[ei][ti] = m.mean;
      rep.lp_se[ei][ti] = m.se;
    }
  }

  std::vector<double> at_tmax(eps_grid.size()), se_tmax(eps_grid.size());
  bool positive = true;
  for (std::size_t ei = 0; ei < eps_grid.size(); ++ei) {
    at_tmax[ei] = rep.lp_norm[ei][t_grid.size() - 1];
    se_tmax[ei] = rep.lp_se[ei][t_grid.size() - 1];
    positive = positive && at_tmax[ei] > 0.0;
  }
  if (eps_grid.size() >= 2 && positive)
    rep.eps_slope = fit_loglog_weighted(eps_grid, at_tmax, se_tmax);
  std::size_t emin_i = 0;
  for (std::size_t ei = 1; ei < eps_grid.size(); ++ei)
    if (eps_grid[ei] < eps_grid[emin_i]) emin_i = ei;
  positive = true;
  for (double v : rep.lp_norm[emin_i]) positive = positive && v > 0.0;
  if (t_grid.size() >= 2 && positive)
    rep.t_slope = fit_loglog_weighted(t_grid, rep.lp_norm[emin_i], rep.lp_se[emin_i]);
  return rep;
}

FlowDeviationReport flow_deviation_check(FastSystem sys, const GridPath& x_path, double eps,
                                         double s, const std::vector<double>& dt_grid, double p,
                                         double y0, std::size_t n_mc, std::uint64_t seed,
                                         int jobs) {
  sys.epsilon = eps;
  if (x_path.dims() != 1)
    throw std::invalid_argument("flow_deviation_check expects a scalar slow path");
  for (double d : dt_grid)
    if (d > eps) throw std::invalid_argument("flow deviation window must satisfy |t-s| <= c*eps");

  FlowDeviationReport rep;
  rep.dt_grid = dt_grid;
  rep.lp_sup.assign(dt_grid.size(), 0.0);
  rep.lp_se.assign(dt_grid.size(), 0.0);

  const double dt = sys.default_dt() / 2.0;  // resolve within the window
  double window = 0.0;
  for (double d : dt_grid) window = std::max(window, d);

  const TimeGrid& g = x_path.grid();
  const auto x_at = [&](double t) {
    const double pos = (t - g.t0) / (g.t1 - g.t0) * static_cast<double>(g.n);
    const std::size_t k = std::min(static_cast<std::size_t>(std::max(pos, 0.0)), g.n - 1);
    const double frac = std::min(std::max(pos - static_cast<double>(k), 0.0), 1.0);
    return (1.0 - frac) * x_path.at(k) + frac * x_path.at(k + 1);
  };
  const Eigen::VectorXd xs = Eigen::VectorXd::Constant(1, x_at(s));

  std::vector<std::vector<double>> sup(dt_grid.size(), std::vector<double>(n_mc));
  parallel_for(n_mc, jobs, [&](std::size_t rep_i) {
    RngStream rng(seed, {stream::kWiener, rep_i});
    std::vector<double> noise(sys.V.size());
    double yf = y0, yz = y0;  // feedback and frozen copies, same noise
    double t = s;
    double running_sup = 0.0;
    std::vector<double> sup_at(dt_grid.size(), 0.0);
    std::size_t next = 0;
    while (t < s + window - 1e-15) {
      const double step = std::min(dt, s + window - t);
      for (auto& z : noise) z = rng.normal();
      const Eigen::VectorXd xl = Eigen::VectorXd::Constant(1, x_at(t));
      yf = step_feedback(sys, xl, yf, step, noise);
      yz = step_frozen(sys, xs, yz, step, noise);
      t += step;
      running_sup = std::max(running_sup, circle_distance(yf, yz));
      while (next < dt_grid.size() && t >= s + dt_grid[next] - 1e-12) {
        sup_at[next] = running_sup;
        ++next;
      }
    }
    while (next < dt_grid.size()) {
      sup_at[next] = running_sup;
      ++next;
    }
    for (std::size_t di = 0; di < dt_grid.size(); ++di) sup[di][rep_i] = sup_at[di];
  });

  for (std::size_t di = 0; di < dt_grid.size(); ++di) {
    const MeanReport m = lp_norm_se(sup[di], p);
    rep.lp_sup[di] = m.mean;
    rep.lp_se[di] = m.se;
  }
  std::vector<double> pos_dt, pos_norm, pos_se;
  for (std::size_t di = 0; di < dt_grid.size(); ++di)
    if (rep.lp_sup[di] > 0.0) {
      pos_dt.push_back(dt_grid[di]);
      pos_norm.push_back(rep.lp_sup[di]);
      pos_se.push_back(rep.lp_se[di]);
    }
  if (pos_dt.size() >= 2) rep.slope = fit_loglog_weighted(pos_dt, pos_norm, pos_se);
  return rep;
}

}  // namespace fbmavg
