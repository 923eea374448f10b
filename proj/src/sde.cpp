#include "fbmavg/sde.hpp"

#include <cmath>
#include <sstream>

#include "fbmavg/norms.hpp"

namespace fbmavg {

namespace {

GridPath solve_driven(const MatrixCoeff& F, const VectorCoeff& G, const GridPath& B,
                      const MatrixCoeff& sigma, const GridPath* W, const GridPath* forcing,
                      const Eigen::VectorXd& z0, double blowup_bound) {
  const TimeGrid& grid = B.grid();
  const std::size_t d = static_cast<std::size_t>(z0.size());
  const std::size_t m = B.dims();
  if (forcing && !(forcing->grid() == grid))
    throw std::invalid_argument("solver: forcing grid mismatch");
  if (forcing && forcing->dims() != d)
    throw std::invalid_argument("solver: forcing dimension mismatch");
  if (sigma && W && !(W->grid() == grid))
    throw std::invalid_argument("solver: W grid mismatch");

  const double h = grid.spacing();
  GridPath out(grid, d);
  Eigen::VectorXd z = z0;
  Eigen::MatrixXd f(d, m);
  Eigen::MatrixXd s;
  Eigen::VectorXd g(d);
  if (sigma && W) s.resize(d, W->dims());

  for (std::size_t dd = 0; dd < d; ++dd) out.at(0, dd) = z(static_cast<Eigen::Index>(dd));
  for (std::size_t k = 0; k < grid.n; ++k) {
    Eigen::VectorXd incr = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
    if (F) {
      F(k, z, f);
      for (std::size_t c = 0; c < m; ++c)
        incr += f.col(static_cast<Eigen::Index>(c)) * (B.at(k + 1, c) - B.at(k, c));
    }
    if (sigma && W) {
      sigma(k, z, s);
      for (std::size_t c = 0; c < W->dims(); ++c)
        incr += s.col(static_cast<Eigen::Index>(c)) * (W->at(k + 1, c) - W->at(k, c));
    }
    if (G) {
      G(k, z, g);
      incr += g * h;
    }
    if (forcing)
      for (std::size_t dd = 0; dd < d; ++dd)
        incr(static_cast<Eigen::Index>(dd)) += forcing->at(k + 1, dd) - forcing->at(k, dd);
    z += incr;
    if (!(z.lpNorm<Eigen::Infinity>() < blowup_bound)) throw BlowUpError(grid.point(k + 1));
    for (std::size_t dd = 0; dd < d; ++dd) out.at(k + 1, dd) = z(static_cast<Eigen::Index>(dd));
  }
  return out;
}

}  // namespace

GridPath solve_young(const YoungOdeSpec& spec) {
  return solve_driven(spec.F, spec.G, spec.driver, nullptr, nullptr, spec.forcing, spec.x0,
                      spec.blowup_bound);
}

GridPath solve_mixed(const MixedSdeSpec& spec) {
  return solve_driven(spec.F, spec.G, spec.B, spec.sigma, spec.sigma ? &spec.W : nullptr, nullptr,
                      spec.z0, spec.blowup_bound);
}

// ---------------------------------------------------------------------------

namespace {

MatrixCoeff scalar_coeff(const std::function<double(double)>& F) {
  return [&F](std::size_t, const Eigen::VectorXd& z, Eigen::MatrixXd& out) { out(0, 0) = F(z(0)); };
}

GridPath solve_case(const StabilityCase& c, const GridPath& Z) {
  YoungOdeSpec spec;
  spec.F = scalar_coeff(c.F);
  spec.driver = c.driver;
  spec.x0 = Eigen::VectorXd::Constant(1, c.x0);
  spec.forcing = &Z;
  return solve_young(spec);
}

}  // namespace

double residual_stability_lhs(const StabilityCase& c) {
  const GridPath z = solve_case(c, c.Z);
  const GridPath zbar = solve_case(c, c.Zbar);
  GridPath diff(z.grid(), 1);
  for (std::size_t k = 0; k < z.points(); ++k) diff.at(k) = z.at(k) - zbar.at(k);
  return holder_seminorm(diff, c.alpha).value;
}

double residual_stability_rhs(const StabilityCase& c, double C) {
  const double nb = holder_seminorm(c.driver, c.beta).value;
  const double nz = holder_seminorm(c.Z, c.alpha).value;
  const double nzb = holder_seminorm(c.Zbar, c.alpha).value;
  GridPath dz(c.Z.grid(), 1);
  for (std::size_t k = 0; k < c.Z.points(); ++k) dz.at(k) = c.Z.at(k) - c.Zbar.at(k);
  const double dn = holder_seminorm(dz, c.alpha).value;
  const double e = std::pow(nb, 1.0 / c.beta) + std::pow(nz, 1.0 / c.alpha) +
                   std::pow(nzb, 1.0 / c.alpha);
  return C * std::exp(C * e) * dn;
}

double fit_stability_constant(const std::vector<StabilityCase>& calibration) {
  double C = 0.0;
  for (const auto& c : calibration) {
    const double lhs = residual_stability_lhs(c);
    if (lhs == 0.0) continue;
    double lo = 1e-8, hi = 1.0;
    while (residual_stability_rhs(c, hi) < lhs) {
      hi *= 2.0;
      if (hi > 1e6) throw std::runtime_error("stability constant fit diverged");
    }
    for (int it = 0; it < 80; ++it) {
      const double mid = 0.5 * (lo + hi);
      (residual_stability_rhs(c, mid) < lhs ? lo : hi) = mid;
    }
    C = std::max(C, hi);
  }
  return C;
}

CheckVerdict residual_stability_check(const StabilityCase& c, double fitted_C) {
  CheckVerdict v;
  v.name = "residual_stability";
  v.fitted_C = fitted_C;
  v.lhs = residual_stability_lhs(c);
  v.rhs = residual_stability_rhs(c, fitted_C);
  v.ratio = (v.rhs > 0.0) ? v.lhs / v.rhs : (v.lhs == 0.0 ? 0.0 : INFINITY);
  v.pass = v.ratio <= 1.0;
  return v;
}

double composition_lhs(const CompositionCase& c) {
  GridPath diff(c.x.grid(), 1);
  for (std::size_t k = 0; k < c.x.points(); ++k) diff.at(k) = c.F(c.x.at(k)) - c.F(c.y.at(k));
  return holder_seminorm(diff, c.alpha).value;
}

double composition_shape(const CompositionCase& c) {
  GridPath diff(c.x.grid(), 1);
  double sup = 0.0;
  for (std::size_t k = 0; k < c.x.points(); ++k) {
    diff.at(k) = c.x.at(k) - c.y.at(k);
    sup = std::max(sup, std::abs(diff.at(k)));
  }
  const double da = holder_seminorm(diff, c.alpha).value;
  const double xa = holder_seminorm(c.x, c.alpha).value;
  const double ya = holder_seminorm(c.y, c.alpha).value;
  return c.dF_inf * da + c.d2F_inf * sup * (xa + ya);
}

double fit_composition_constant(const std::vector<CompositionCase>& calibration) {
  double C = 0.0;
  for (const auto& c : calibration) {
    const double shape = composition_shape(c);
    if (shape > 0.0) C = std::max(C, composition_lhs(c) / shape);
  }
  return C;
}

CheckVerdict composition_bound_check(const CompositionCase& c, double fitted_C) {
  CheckVerdict v;
  v.name = "composition_bound";
  v.fitted_C = fitted_C;
  v.lhs = composition_lhs(c);
  v.rhs = fitted_C * composition_shape(c);
  v.ratio = (v.rhs > 0.0) ? v.lhs / v.rhs : (v.lhs == 0.0 ? 0.0 : INFINITY);
  v.pass = v.ratio <= 1.0;
  return v;
}

std::string CheckVerdict::to_json() const {
  std::ostringstream os;
  os.precision(12);
  os << "{\"name\":\"" << name << "\",\"lhs\":" << lhs << ",\"rhs\":" << rhs
     << ",\"fitted_C\":" << fitted_C << ",\"pass\":" << (pass ? "true" : "false") << "}";
  return os.str();
}

}  // namespace fbmavg
