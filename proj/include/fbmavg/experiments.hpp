#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "fbmavg/fast.hpp"
#include "fbmavg/fbm.hpp"
#include "fbmavg/fit.hpp"
#include "fbmavg/gridpath.hpp"

namespace fbmavg {

// ---------------------------------------------------------------------------
// Reports

struct ConvergenceReport {
  std::string name;
  std::string param_name;       // "n" or "eps"
  std::vector<double> param;
  std::vector<double> err;      // L^p error per parameter point
  std::vector<double> err_se;   // MC band (standard error)
  double p = 2.0;
  double error_exponent = 0.5;  // Hoelder exponent of the error norm
  LineFit rate;                 // log err against log param
  bool monotone_within_bands = false;
  std::string driver_fingerprint;  // hash of the shared driver ensemble
  std::string manifest_json;       // config echo (reproducibility manifest)

  std::string to_json() const;
  std::string to_csv() const;       // param, p, mean_err, band_lo, band_hi
  std::string plot_data() const;    // gnuplot two-column
};

// ---------------------------------------------------------------------------
// Finite-state fast process (no-feedback route)

struct ChainSpec {
  double rate_up = 2.0;    // minus -> plus jump rate
  double rate_down = 2.0;  // plus -> minus jump rate
  double y_plus = 1.0;
  double y_minus = -1.0;

  double stationary_plus() const { return rate_up / (rate_up + rate_down); }
  double mean() const {
    return stationary_plus() * y_plus + (1.0 - stationary_plus()) * y_minus;
  }
};

// One realisation as jump times; exact (event-driven), stationary launch.
struct ChainPath {
  ChainSpec spec;
  double horizon = 0.0;
  int initial_state = 1;  // +1 / -1
  std::vector<double> jump_times;

  int state_at(double t) const;
  double value_at(double t) const;
};

class RngStream;
ChainPath simulate_chain(const ChainSpec& spec, double horizon, RngStream& rng);

// Exact strong mixing coefficient alpha(y_0, y_t) by maximising over all
// event pairs of the two-point law (finite enumeration).
double chain_alpha_mixing(const ChainSpec& spec, double t);

struct MixingCertificate {
  std::vector<double> t_grid;
  std::vector<double> alpha;
  double delta = 1.0;      // asserted polynomial envelope exponent
  double envelope_C = 0.0; // smallest C with alpha(t) <= C t^-delta on the grid
  bool pass = false;
  std::string to_json() const;
};

MixingCertificate mixing_certificate(const ChainSpec& spec, const std::vector<double>& t_grid,
                                     double delta);

// ---------------------------------------------------------------------------
// Averaging without feedback (chain-driven coefficients)

struct NoFeedbackConfig {
  double H = 0.75;
  TimeGrid grid{0.0, 1.0, 1024};
  std::vector<double> n_grid{4, 16, 64, 256};
  std::size_t n_mc = 256;
  double p = 2.0;
  double alpha = 0.5;  // error Hoelder exponent (< H)
  std::size_t norm_stride = 4;
  ChainSpec chain;
  std::function<double(double, double)> f;  // f(x, y) against dB
  std::function<double(double, double)> g;  // g(x, y) against dt (may be null)
  double x0 = 1.0;
  std::uint64_t seed = 1;
  int jobs = 1;
};

ConvergenceReport run_nofeedback(const NoFeedbackConfig& cfg);

// ---------------------------------------------------------------------------
// Deterministic periodic averaging

struct PeriodicComponent {
  double weight = 1.0;
  double period = 6.283185307179586476925286766559;
  std::function<double(double, double)> F;  // F(t, x), periodic in t
};

struct PeriodicConfig {
  double H = 0.75;
  TimeGrid grid{0.0, 1.0, 1024};
  std::vector<double> n_grid{1, 4, 16, 64};
  std::size_t n_mc = 64;
  double p = 2.0;
  double kappa = 0.3;  // |f_n - fbar|_{-kappa,1} decay exponent under test
  double alpha = 0.5;
  std::size_t norm_stride = 4;
  std::vector<PeriodicComponent> components;
  std::function<double(double)> fbar;  // exact period average; null -> quadrature
  std::vector<double> x_samples{-1.0, -0.3, 0.4, 1.1};
  double x0 = 1.0;
  std::uint64_t seed = 1;
  int jobs = 1;
};

struct PeriodicReport {
  ConvergenceReport solution;
  std::vector<double> n_grid;
  std::vector<double> coeff_norm;  // |f_n - fbar|_{-kappa,1} on the sample set
  LineFit coeff_rate;
  std::string to_json() const;
};

PeriodicReport run_periodic_example(const PeriodicConfig& cfg);

// ---------------------------------------------------------------------------
// Averaging with feedback (the main theorem at desk scale)

struct FeedbackConfig {
  double H = 0.75;
  TimeGrid slow_grid{0.0, 1.0, 512};
  std::vector<double> eps_grid{0.2, 0.1, 0.05, 0.025};
  std::size_t n_mc = 128;
  double p = 2.0;
  double beta_report = 0.6;  // error norm exponent, default 0.8 * H
  double substep_factor = 20.0;  // fast dt = eps / substep_factor
  std::size_t norm_stride = 2;
  std::function<double(double, double)> f;  // f(x, y)
  std::function<double(double, double)> g;  // g(x, y), may be null
  FastSystem fast;            // epsilon is overwritten per grid point
  bool fast_x_dependent = false;  // V-fields depend on x (per-x densities)
  std::size_t density_ny = 1024;
  double x0 = 1.0;
  double y0 = 0.0;
  std::uint64_t seed = 1;
  int jobs = 1;
};

// Nested co-simulation of the slow/fast pair for one driver path; the slow
// state is frozen within each slow step while the fast variable substeps.
struct CoSimPath {
  GridPath x;                      // slow solution on the slow grid
  std::vector<double> y;           // fast state at slow grid points
  std::size_t n_sub = 1;           // substeps per slow step
  std::vector<double> noise;       // stored normal draws (when requested)
};

CoSimPath cosimulate_feedback(const FeedbackConfig& cfg, double eps, const GridPath& B,
                              std::uint64_t replica, bool store_noise);

// mu^x-average of a slow coefficient; a single density is reused when the
// fast fields do not depend on x.
std::function<double(double)> averaged_slow_coefficient(
    const FeedbackConfig& cfg, std::function<double(double, double)> coeff);

ConvergenceReport run_feedback(const FeedbackConfig& cfg);

// ---------------------------------------------------------------------------
// Uniform bound of the centered integral (Theorem-level diagnostic)

struct UniformBoundReport {
  std::vector<double> eps_grid;
  std::vector<double> windows;              // |t - s|
  std::vector<std::vector<double>> lp;      // [eps][window]
  std::vector<std::vector<double>> lp_se;
  // raw[eps][window][replica]; replicas are coupled across the grid
  std::vector<std::vector<std::vector<double>>> raw;
  LineFit eps_slope;     // at the largest window (paired bootstrap CI)
  LineFit window_slope;  // at the smallest eps
  std::string manifest_json;
  std::string to_json() const;
};

// L^p norm of int_s^t h(x_r, y_r^eps) dB_r over dyadic windows (0, T 2^-k).
// h is used as given; center it beforehand for the decay claim.
UniformBoundReport uniform_bound_experiment(const FeedbackConfig& cfg,
                                            const std::function<double(double, double)>& h,
                                            std::size_t n_windows = 4);

// ---------------------------------------------------------------------------
// Sewing-equals-Young diagnostic at fixed eps

struct SewingEquivReport {
  std::vector<int> levels;
  std::vector<double> piece_dt;      // T 2^-level
  std::vector<double> l2_diff;       // L^2 of |S_level - Young|
  std::vector<double> l2_diff_se;
  LineFit refinement;                // log diff against log piece_dt
  double etabar_hat = 0.0;           // 1 + slope of level-change profile
  bool contraction_ok = false;
  std::string to_json() const;
};

SewingEquivReport sewing_equals_young_check(const FeedbackConfig& cfg,
                                            const std::function<double(double, double)>& h,
                                            double eps, std::size_t n_mc_override = 0);

}  // namespace fbmavg
