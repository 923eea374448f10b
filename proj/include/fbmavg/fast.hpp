#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "fbmavg/fit.hpp"
#include "fbmavg/gridpath.hpp"

namespace fbmavg {

// scalar field on R^d x S^1
using CircleField = std::function<double(const Eigen::VectorXd&, double)>;

// Fast diffusion on the circle: dY = (1/eps) V0 dt + (1/sqrt(eps)) V o dW.
struct FastSystem {
  CircleField V0;
  std::vector<CircleField> V;  // Stratonovich diffusion fields
  double epsilon = 0.1;
  double ellipticity = 0.0;  // declared lower bound on sum V_k^2

  double default_dt() const { return epsilon / 20.0; }
};

double wrap_angle(double y);                    // into [0, 2*pi)
double circle_distance(double a, double b);     // geodesic distance, <= pi

// Verifies 2*pi periodicity and the ellipticity bound on a dense (x,y) grid.
void check_fast_system(const FastSystem& sys, const std::vector<Eigen::VectorXd>& x_probe,
                       std::size_t n_y = 256);

// One Heun (Stratonovich-consistent) step; noise holds V.size() standard
// normals. dt must satisfy dt <= eps/10.
double step_frozen(const FastSystem& sys, const Eigen::VectorXd& x, double y, double dt,
                   std::span<const double> noise);
// Same step with x supplied at the interval's left endpoint.
double step_feedback(const FastSystem& sys, const Eigen::VectorXd& x_left, double y, double dt,
                     std::span<const double> noise);

struct InvariantDensity {
  Eigen::VectorXd x;            // frozen slow state
  std::size_t n_y = 0;          // grid points y_j = 2*pi*j/n_y
  std::vector<double> density;  // nonnegative, sums (x dy) to 1
  double dy() const;
  double value_at(double y) const;  // linear interpolation, periodic
};

// m_hat = 1: exact periodic Fokker-Planck reduction with constant
// probability current; otherwise long-run occupation histogram.
InvariantDensity invariant_density(const FastSystem& sys, const Eigen::VectorXd& x,
                                   std::size_t n_y = 2048, std::uint64_t seed = 1,
                                   std::size_t occupation_steps = 2'000'000);

// Occupation-measure route regardless of m_hat (oracle for the closed form).
InvariantDensity invariant_density_occupation(const FastSystem& sys, const Eigen::VectorXd& x,
                                              std::size_t n_y, std::uint64_t seed,
                                              std::size_t n_steps);

double averaged_coefficient(const CircleField& f, const FastSystem& sys, const Eigen::VectorXd& x,
                            const InvariantDensity& mu);
double averaged_coefficient(const CircleField& f, const FastSystem& sys, const Eigen::VectorXd& x,
                            std::size_t n_y = 2048);

struct SemigroupEstimate {
  std::vector<double> times;
  std::vector<double> y_grid;
  std::vector<std::vector<double>> values;  // [time][y]
  std::vector<std::vector<double>> bands;   // standard errors
  std::vector<double> osc;                  // oscillation per time
  std::vector<double> osc_band;
};

SemigroupEstimate semigroup_apply(const FastSystem& sys, const Eigen::VectorXd& x,
                                  const std::function<double(double)>& F,
                                  const std::vector<double>& t_grid, std::size_t n_mc,
                                  std::size_t n_y_eval, std::uint64_t seed, int jobs = 1);

struct ErgodicityReport {
  SemigroupEstimate semigroup;
  LineFit decay;           // log osc against t, slope ~ -c/eps
  std::size_t fit_points;  // after truncation at the MC floor
};

ErgodicityReport ergodicity_diagnostics(const FastSystem& sys, const Eigen::VectorXd& x,
                                        const std::function<double(double)>& F,
                                        const std::vector<double>& t_grid, std::size_t n_mc,
                                        std::size_t n_y_eval, std::uint64_t seed, int jobs = 1);

struct XContinuityReport {
  std::vector<double> times;
  std::vector<double> sup_diff;  // sup_y |P_t^x F - P_t^xbar F| (coupled MC)
  std::vector<double> band;
};

XContinuityReport x_continuity_check(const FastSystem& sys, const Eigen::VectorXd& x,
                                     const Eigen::VectorXd& xbar,
                                     const std::function<double(double)>& F,
                                     const std::vector<double>& t_grid, std::size_t n_mc,
                                     std::size_t n_y_eval, std::uint64_t seed, int jobs = 1);

struct ErgodicAverageReport {
  std::vector<double> eps_grid;
  std::vector<double> t_grid;
  // lp_norm[i][j]: L^p norm of int_0^{t_j} (F(y_r) - Fbar) dr at eps_i
  std::vector<std::vector<double>> lp_norm;
  std::vector<std::vector<double>> lp_se;
  LineFit eps_slope;  // at the largest t
  LineFit t_slope;    // at the smallest eps
};

ErgodicAverageReport ergodic_average_check(FastSystem sys, const Eigen::VectorXd& x,
                                           const CircleField& f, const std::vector<double>& t_grid,
                                           const std::vector<double>& eps_grid, double p,
                                           std::size_t n_mc, std::uint64_t seed, int jobs = 1);

struct FlowDeviationReport {
  std::vector<double> dt_grid;  // |t - s|
  std::vector<double> lp_sup;   // L^p of sup_u rho(y_u, Y_{s,u})
  std::vector<double> lp_se;
  LineFit slope;  // log lp against log |t-s|
};

// Couples the feedback flow along x_path with the flow frozen at x_s using
// identical noise; x_path is interpolated at substep left endpoints.
FlowDeviationReport flow_deviation_check(FastSystem sys, const GridPath& x_path, double eps,
                                         double s, const std::vector<double>& dt_grid, double p,
                                         double y0, std::size_t n_mc, std::uint64_t seed,
                                         int jobs = 1);

}  // namespace fbmavg
