#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>

#include "fbmavg/gridpath.hpp"

namespace fbmavg {

// Coefficient against a driver: fills a d x m matrix at (step k, state z).
using MatrixCoeff =
    std::function<void(std::size_t, const Eigen::VectorXd&, Eigen::MatrixXd&)>;
// Drift coefficient: fills a d-vector at (step k, state z).
using VectorCoeff = std::function<void(std::size_t, const Eigen::VectorXd&, Eigen::VectorXd&)>;

struct BlowUpError : std::runtime_error {
  double time;
  explicit BlowUpError(double t)
      : std::runtime_error("solution blow-up at t = " + std::to_string(t)), time(t) {}
};

struct YoungOdeSpec {
  MatrixCoeff F;              // against the driver; null means zero
  VectorCoeff G;              // dt drift; null means zero
  GridPath driver;            // m-dimensional, beta-Hoelder with beta > 1/2
  Eigen::VectorXd x0;
  const GridPath* forcing = nullptr;  // optional additive Z path (d-dim)
  double blowup_bound = 1e8;
};

// Explicit left-point scheme z_{k+1} = z_k + F(z_k) db_k + G(z_k) h + dZ_k.
GridPath solve_young(const YoungOdeSpec& spec);

struct MixedSdeSpec {
  MatrixCoeff F;      // against B (Young part)
  MatrixCoeff sigma;  // against W (Ito part); null means zero
  VectorCoeff G;
  GridPath B;
  GridPath W;  // ignored when sigma is null
  Eigen::VectorXd z0;
  double blowup_bound = 1e8;
};

// Euler-Maruyama for the Ito part, left-point Young for the B part. With
// sigma null this reproduces solve_young (same scheme path, bitwise).
GridPath solve_mixed(const MixedSdeSpec& spec);

// ---------------------------------------------------------------------------
// Deterministic stability / composition checks (fitted-constant methodology:
// fit C on a calibration family, assert on a disjoint validation family).

struct StabilityCase {
  std::function<double(double)> F;  // scalar coefficient z -> F(z)
  GridPath driver;                  // scalar
  GridPath Z;                       // scalar forcing
  GridPath Zbar;
  double x0 = 0.0;
  double alpha = 0.4;
  double beta = 0.6;
};

struct CheckVerdict {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;  // lhs / rhs
  double fitted_C = 0.0;
  bool pass = false;
  std::string to_json() const;
};

// |z - zbar|_alpha for the two Young equations z = Z + int F(z) db.
double residual_stability_lhs(const StabilityCase& c);

// Bound shape exp(|b|_beta^{1/beta} + |Z|_alpha^{1/alpha} + |Zbar|_alpha^{1/alpha}) * |Z-Zbar|_alpha
// evaluated with multiplier C both outside and inside the exponential.
double residual_stability_rhs(const StabilityCase& c, double C);

// Smallest C (by bisection, since the bound is increasing in C) making
// lhs <= rhs across the calibration family.
double fit_stability_constant(const std::vector<StabilityCase>& calibration);

CheckVerdict residual_stability_check(const StabilityCase& c, double fitted_C);

struct CompositionCase {
  std::function<double(double)> F;
  double dF_inf = 1.0;   // bound on |F'|
  double d2F_inf = 1.0;  // bound on |F''|
  GridPath x;
  GridPath y;
  double alpha = 0.4;
};

double composition_lhs(const CompositionCase& c);   // |F(x)-F(y)|_alpha
double composition_shape(const CompositionCase& c); // |F'| |x-y|_a + |F''| |x-y|_inf (|x|_a+|y|_a)
double fit_composition_constant(const std::vector<CompositionCase>& calibration);
CheckVerdict composition_bound_check(const CompositionCase& c, double fitted_C);

}  // namespace fbmavg
