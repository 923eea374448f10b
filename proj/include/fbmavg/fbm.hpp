#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "fbmavg/gridpath.hpp"

namespace fbmavg {

// Constants of the closed-form mixed derivative of the covariance of the
// future part of fBm (see d2R_closed): c1 = H - 1/2, c3 = (H-1/2)(H-3/2),
// c2 = -c3 * Integral_0^inf u^{H-1/2} (1+u)^{H-5/2} du, the integral being
// Beta(H+1/2, 2-2H). c2 is evaluated by quadrature and cached here.
struct KernelConstants {
  double H;
  double c1;
  double c2;
  double c3;
  explicit KernelConstants(double hurst);
};

// R(r,s) = Integral_0^{r^s} (r-v)^{H-1/2} (s-v)^{H-1/2} dv, the covariance of
// the conditional remainder process started at 0. Endpoint singularity is
// removed by the substitution v = m (1 - xi^{1/(H+1/2)}).
double covariance_R(double r, double s, double H);

// Mixed derivative d^2 R / dr ds via the three-term closed form
//   c1 r^{H-1/2} s^{H-3/2} + c2 (s-r)^{2H-2} + c3 * tail(r, s-r), r < s,
// with the c2/c3 pair evaluated in a cancellation-safe grouping. Symmetric
// in (r,s); throws on r == s.
double d2R_closed(double r, double s, double H);
double d2R_closed(double r, double s, const KernelConstants& kc);

// Independent route for tests: d2R = (H-1/2)^2 Integral_0^{r^s} ((r-v)(s-v))^{H-3/2} dv.
double d2R_integral_form(double r, double s, double H);

// Precomputed quadratic form h -> |Integral Integral d2R(r,s) h(r) h(s)| on a
// grid, with h treated as left-point piecewise constant per cell. The
// (s-r)^{2H-2} singular part is integrated exactly cellwise through its
// second primitive; the remaining smooth part by cellwise Gauss points.
class RkhsForm {
 public:
  RkhsForm(double H, const TimeGrid& grid);
  // signed value of the double integral for cell values h (size grid.n)
  double quadratic_cells(const std::vector<double>& h_cells) const;
  // |.|_rkhs of a scalar grid path (uses left-point values); returns sqrt(|Q|)
  double norm(const GridPath& h) const;
  double quadratic(const GridPath& h) const;

 private:
  std::size_t n_;
  std::vector<double> weights_;  // row-major n x n, symmetric
};

// Convenience wrapper; builds the form on each call.
double rkhs_norm(const GridPath& h, double H);

// ---------------------------------------------------------------------------
// Sampling

struct FbmEnsemble {
  double H = 0.5;
  TimeGrid grid;
  std::size_t dims = 1;
  std::uint64_t seed = 0;
  std::vector<GridPath> paths;  // each dims-dimensional, B_{t0} = 0
};

// Exact-in-law fBm via circulant embedding of the fGn autocovariance
// gamma(k) = (|k+1|^{2H} - 2|k|^{2H} + |k-1|^{2H}) / 2, cumulated to paths.
// Deterministic given seed and independent of the parallelism degree.
FbmEnsemble sample_fbm(double H, const TimeGrid& grid, std::size_t n_paths, std::size_t dims,
                       std::uint64_t seed, int jobs = 1);

// fGn autocovariance at integer lag for unit spacing.
double fgn_autocovariance(double H, std::size_t lag);

void save_ensemble(const FbmEnsemble& ens, const std::string& directory);
FbmEnsemble load_ensemble(const std::string& directory);

// ---------------------------------------------------------------------------
// Conditioning (exact discrete Gaussian conditioning on the grid)

struct ConditionalSplit {
  std::size_t u_index = 0;
  double u = 0.0;
  GridPath bar;    // E(B_t - B_u | past) on [u, t1]
  GridPath tilde;  // (B_t - B_u) - bar, starts at 0
  bool regularized = false;  // jitter was needed on the past covariance
};

// Conditional law of (B_t)_{t > u} given the sampled values on (t0, u].
struct ConditionalLaw {
  std::size_t u_index = 0;
  TimeGrid future_grid;           // [u, t1]
  GridPath bar;                   // conditional mean of B_t - B_u on [u, t1]
  Eigen::MatrixXd cov;            // Schur complement at points t_{u+1}..t_n
  Eigen::MatrixXd cov_cholesky;   // lower factor used for sampling
  bool regularized = false;
};

ConditionalSplit conditional_split(const GridPath& path, double H, std::size_t u_index);
ConditionalLaw conditional_law(const GridPath& path, double H, std::size_t u_index);

// Fresh draws of the centered future part (tilde B^u) from the conditional
// law; index k of the draw is mapped to a dedicated RNG stream of `seed`.
std::vector<GridPath> sample_conditional_future(const ConditionalLaw& law, std::size_t n_samples,
                                                std::uint64_t seed);

// Integral of a scalar integrand F (given on the post-u grid) against the
// conditioned decomposition: Riemann-Stieltjes against the smooth bar part
// (integration by parts through its finite-difference derivative) plus
// left-point Riemann-Stieltjes against the sampled tilde part.
double mixed_integral(const GridPath& F, const ConditionalSplit& split);

}  // namespace fbmavg
