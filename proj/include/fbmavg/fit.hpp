#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace fbmavg {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  double slope_se = 0.0;  // standard error of the slope
  std::size_t n = 0;

  double ci_halfwidth() const { return 1.96 * slope_se; }
  double slope_lo() const { return slope - ci_halfwidth(); }
  double slope_hi() const { return slope + ci_halfwidth(); }
};

// Ordinary least squares of y against x; slope_se from residual variance.
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

// OLS on (log x, log y). All entries must be positive.
LineFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y);

// Weighted fit of log y against log x where each y_i carries a standard
// error; slope_se is propagated from the per-point errors (delta method),
// which is better behaved than residual-based errors on short grids.
LineFit fit_loglog_weighted(const std::vector<double>& x, const std::vector<double>& y,
                            const std::vector<double>& y_se);

// Paired bootstrap of a log-log rate: samples_per_point[i][r] is the replica
// r value at abscissa x[i], with replica r coupled across points (shared
// driver paths). Resampling whole replicas preserves the coupling, which the
// independent-point error propagation cannot. slope/intercept come from OLS
// on the full-sample pooled L^p norms; slope_se is the bootstrap spread.
LineFit bootstrap_loglog_rate(const std::vector<double>& x,
                              const std::vector<std::vector<double>>& samples_per_point, double p,
                              std::uint64_t seed, std::size_t n_boot = 400);

// Same resampling applied to the slope difference of two paired sample sets
// (e.g. a treatment and its control sharing all randomness).
LineFit bootstrap_rate_difference(const std::vector<double>& x,
                                  const std::vector<std::vector<double>>& a,
                                  const std::vector<std::vector<double>>& b, double p,
                                  std::uint64_t seed, std::size_t n_boot = 400);

struct MeanReport {
  double mean = 0.0;
  double se = 0.0;  // standard error of the mean
  std::size_t n = 0;
};

MeanReport mean_se(const std::vector<double>& values);

// L^p Monte Carlo norm (E |v|^p)^{1/p} with a delta-method standard error.
MeanReport lp_norm_se(const std::vector<double>& values, double p);

}  // namespace fbmavg
