#include "fbmavg/fit.hpp"

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace fbmavg {

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("fit_line: need >= 2 points");
  const std::size_t n = x.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_line: degenerate abscissae");
  LineFit f;
  f.n = n;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    ss_res += r * r;
  }
  f.r2 = (syy > 0.0) ? 1.0 - ss_res / syy : 1.0;
  if (n > 2) f.slope_se = std::sqrt(ss_res / (static_cast<double>(n) - 2.0) / sxx);
  return f;
}

namespace {
std::vector<double> logged(const std::vector<double>& v, const char* what) {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!(v[i] > 0.0)) throw std::invalid_argument(std::string("fit_loglog: nonpositive ") + what);
    out[i] = std::log(v[i]);
  }
  return out;
}
}  // namespace

LineFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
  return fit_line(logged(x, "x"), logged(y, "y"));
}

LineFit fit_loglog_weighted(const std::vector<double>& x, const std::vector<double>& y,
                            const std::vector<double>& y_se) {
  if (x.size() != y.size() || y.size() != y_se.size() || x.size() < 2)
    throw std::invalid_argument("fit_loglog_weighted: size mismatch");
  const std::vector<double> lx = logged(x, "x");
  const std::vector<double> ly = logged(y, "y");
  const std::size_t n = x.size();
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    // sigma of log y by the delta method; floor keeps the weights finite
    const double sig = std::max(y_se[i] / y[i], 1e-12);
    w[i] = 1.0 / (sig * sig);
  }
  double sw = 0.0, swx = 0.0, swy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sw += w[i];
    swx += w[i] * lx[i];
    swy += w[i] * ly[i];
  }
  const double mx = swx / sw, my = swy / sw;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += w[i] * (lx[i] - mx) * (lx[i] - mx);
    sxy += w[i] * (lx[i] - mx) * (ly[i] - my);
    syy += w[i] * (ly[i] - my) * (ly[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_loglog_weighted: degenerate abscissae");
  LineFit f;
  f.n = n;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.slope_se = std::sqrt(1.0 / sxx);  // known-variance GLS
  double ss_res = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = ly[i] - (f.intercept + f.slope * lx[i]);
    ss_res += w[i] * r * r;
  }
  f.r2 = (syy > 0.0) ? 1.0 - ss_res / syy : 1.0;
  return f;
}

namespace {

double pooled_slope(const std::vector<double>& lx,
                    const std::vector<std::vector<double>>& samples, double p,
                    const std::vector<std::size_t>& pick) {
  const std::size_t npts = lx.size();
  double mx = 0.0, my = 0.0;
  std::vector<double> ly(npts);
  for (std::size_t i = 0; i < npts; ++i) {
    double acc = 0.0;
    for (std::size_t r : pick) acc += std::pow(std::abs(samples[i][r]), p);
    ly[i] = std::log(std::pow(acc / static_cast<double>(pick.size()), 1.0 / p));
    mx += lx[i];
    my += ly[i];
  }
  mx /= static_cast<double>(npts);
  my /= static_cast<double>(npts);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < npts; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  return sxy / sxx;
}

LineFit bootstrap_core(const std::vector<double>& x,
                       const std::vector<std::vector<double>>& a,
                       const std::vector<std::vector<double>>* b, double p, std::uint64_t seed,
                       std::size_t n_boot) {
  if (x.size() < 2 || a.size() != x.size())
    throw std::invalid_argument("bootstrap rate: need >= 2 points");
  const std::size_t n_rep = a[0].size();
  for (const auto& col : a)
    if (col.size() != n_rep) throw std::invalid_argument("bootstrap rate: ragged samples");
  std::vector<double> lx(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0)) throw std::invalid_argument("bootstrap rate: nonpositive abscissa");
    lx[i] = std::log(x[i]);
  }
  std::vector<std::size_t> all(n_rep);
  for (std::size_t r = 0; r < n_rep; ++r) all[r] = r;
  const double point = pooled_slope(lx, a, p, all) -
                       (b ? pooled_slope(lx, *b, p, all) : 0.0);

  // deterministic resampling stream (splitmix64)
  std::uint64_t state = seed ^ 0x5851f42d4c957f2dULL;
  auto next_index = [&state, n_rep]() {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return static_cast<std::size_t>((z ^ (z >> 31)) % n_rep);
  };
  std::vector<double> slopes(n_boot);
  std::vector<std::size_t> pick(n_rep);
  for (std::size_t bi = 0; bi < n_boot; ++bi) {
    for (std::size_t r = 0; r < n_rep; ++r) pick[r] = next_index();
    slopes[bi] = pooled_slope(lx, a, p, pick) - (b ? pooled_slope(lx, *b, p, pick) : 0.0);
  }
  double mean = 0.0;
  for (double s : slopes) mean += s;
  mean /= static_cast<double>(n_boot);
  double var = 0.0;
  for (double s : slopes) var += (s - mean) * (s - mean);
  var /= static_cast<double>(n_boot - 1);

  LineFit f;
  f.n = x.size();
  f.slope = point;
  f.slope_se = std::sqrt(var);
  f.r2 = 1.0;  // not meaningful for the bootstrap; kept at the neutral value
  return f;
}

}  // namespace

LineFit bootstrap_loglog_rate(const std::vector<double>& x,
                              const std::vector<std::vector<double>>& samples_per_point, double p,
                              std::uint64_t seed, std::size_t n_boot) {
  return bootstrap_core(x, samples_per_point, nullptr, p, seed, n_boot);
}

LineFit bootstrap_rate_difference(const std::vector<double>& x,
                                  const std::vector<std::vector<double>>& a,
                                  const std::vector<std::vector<double>>& b, double p,
                                  std::uint64_t seed, std::size_t n_boot) {
  return bootstrap_core(x, a, &b, p, seed, n_boot);
}

MeanReport mean_se(const std::vector<double>& values) {
  if (values.empty()) throw std::invalid_argument("mean_se: empty sample");
  MeanReport r;
  r.n = values.size();
  double s = 0.0;
  for (double v : values) s += v;
  r.mean = s / static_cast<double>(r.n);
  if (r.n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - r.mean) * (v - r.mean);
    r.se = std::sqrt(ss / (static_cast<double>(r.n) - 1.0) / static_cast<double>(r.n));
  }
  return r;
}

MeanReport lp_norm_se(const std::vector<double>& values, double p) {
  if (values.empty()) throw std::invalid_argument("lp_norm_se: empty sample");
  if (!(p >= 1.0)) throw std::invalid_argument("lp_norm_se: p >= 1 required");
  std::vector<double> powed(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) powed[i] = std::pow(std::abs(values[i]), p);
  const MeanReport m = mean_se(powed);
  MeanReport r;
  r.n = m.n;
  r.mean = std::pow(m.mean, 1.0 / p);
  // d/dm m^{1/p} = m^{1/p-1}/p
  r.se = (m.mean > 0.0) ? m.se * std::pow(m.mean, 1.0 / p - 1.0) / p : 0.0;
  return r;
}

}  // namespace fbmavg
