#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "fbmavg/fit.hpp"
#include "fbmavg/gridpath.hpp"

namespace fbmavg {

// Two-parameter germ A_{s,t} evaluated at grid index pairs i < j.
struct Germ {
  std::size_t dims = 1;
  std::function<void(std::size_t i, std::size_t j, double* out)> eval;
  double declared_eta = 0.0;     // exponent of ||A_{s,t}||, 0 when unknown
  double declared_etabar = 0.0;  // exponent of the defect, 0 when unknown

  static Germ scalar(std::function<double(std::size_t, std::size_t)> f) {
    Germ g;
    g.dims = 1;
    g.eval = [f = std::move(f)](std::size_t i, std::size_t j, double* out) { *out = f(i, j); };
    return g;
  }
};

struct SewingResult {
  GridPath integral;  // t -> I_{0,t}, finest-level cumulative sums
  std::size_t levels_used = 0;
  // (level, max over shared points of |Riemann sum change from level-1|)
  std::vector<std::pair<int, double>> defect_profile;
  bool contracting = true;  // false flags a germ that may violate etabar > 1
};

// Dyadic Riemann-sum limit of a germ: grid.n must equal 2^max_level. The
// integral path is the finest-level cumulative sum (additive by
// construction); the profile records per-level changes.
SewingResult sew(const Germ& germ, const TimeGrid& grid, std::size_t max_level);

// Left-point Young integral of scalar f against scalar g on a common grid:
// the finest-level sewing sum of the germ f_s (g_t - g_s).
GridPath young_integral(const GridPath& f, const GridPath& g);

// Largest ratio |I_{s,t} - f_s (g_t-g_s)| / (|f|_a |g|_b |t-s|^{a+b}) over
// dyadic pairs; used to fit/validate the Young remainder constant.
double young_remainder_ratio(const GridPath& f, const GridPath& g, double alpha, double beta);

struct SuTriple {
  std::size_t s, u, t;
};

struct DefectNorms {
  double p = 2.0;
  LineFit eta_fit;     // log ||A_{s,t}||_p against log |t-s|
  LineFit etabar_fit;  // log ||E(dA_{sut}|F_s)||_p against log |t-s|
  std::vector<double> dt;          // |t-s| per triple group
  std::vector<double> a_norm;      // ||A||_p per group
  std::vector<double> delta_norm;  // conditional defect norm per group
  std::size_t n_outer = 0, n_inner = 0;
  bool inner_noise_warning = false;  // inner MC too noisy; slope se widened
  std::string to_json() const;
};

// Two-level Monte Carlo estimate of the stochastic-sewing norms.
// delta_eval(o, r, {s,u,t}): defect dA_{sut} on outer draw o with all
// post-s randomness resampled under inner index r. a_eval(o, i, j): A_{i,j}
// on outer draw o.
DefectNorms conditional_defect_norms(
    const std::function<double(std::size_t, std::size_t, const SuTriple&)>& delta_eval,
    const std::function<double(std::size_t, std::size_t, std::size_t)>& a_eval,
    const std::vector<SuTriple>& triples, const TimeGrid& grid, double p, std::size_t n_outer,
    std::size_t n_inner, int jobs = 1);

struct ComposeResult {
  SewingResult sewn;
  bool exponent_warning = false;  // gamma * alpha <= kappa
};

// Sews the germ X_{s,t} = fhat(t, x_s) - fhat(s, x_s) for fhat the time
// primitive of f; the result path is the primitive of r -> f(r, x_r).
ComposeResult compose_neg_holder(const std::function<double(double, double)>& f_hat,
                                 const GridPath& x, double kappa, double gamma,
                                 double declared_alpha);

}  // namespace fbmavg
