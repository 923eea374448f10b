#include <Eigen/Cholesky>
#include <cmath>
#include <stdexcept>

#include "fbmavg/fbm.hpp"
#include "fbmavg/rng.hpp"

namespace fbmavg {

namespace {

constexpr double kJitter = 1e-12;

double fbm_cov(double s, double t, double twoH) {
  return 0.5 * (std::pow(s, twoH) + std::pow(t, twoH) - std::pow(std::abs(t - s), twoH));
}

struct Kriging {
  std::size_t u_index;
  double u;
  Eigen::LLT<Eigen::MatrixXd> past_llt;
  Eigen::VectorXd past_values;
  Eigen::VectorXd weights;  // Sigma_PP^{-1} B_P
  double twoH;
  bool regularized = false;
};

Kriging build_kriging(const GridPath& path, double H, std::size_t u_index) {
  if (path.dims() != 1) throw std::invalid_argument("conditioning expects a scalar path");
  if (!(H > 0.0 && H < 1.0)) throw std::invalid_argument("H must lie in (0,1)");
  const TimeGrid& grid = path.grid();
  if (u_index == 0 || u_index >= grid.n)
    throw std::invalid_argument("split time must lie strictly inside the grid");
  if (std::abs(grid.t0) > 1e-14)
    throw std::invalid_argument("conditioning assumes the path starts at time 0");

  Kriging k;
  k.u_index = u_index;
  k.u = grid.point(u_index);
  k.twoH = 2.0 * H;

  // Past = grid values on (0, u]; B at time 0 vanishes and carries no info.
  const Eigen::Index np = static_cast<Eigen::Index>(u_index);
  Eigen::MatrixXd cov(np, np);
  for (Eigen::Index i = 0; i < np; ++i)
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double v = fbm_cov(grid.point(i + 1), grid.point(j + 1), k.twoH);
      cov(i, j) = v;
      cov(j, i) = v;
    }
  k.past_values.resize(np);
  for (Eigen::Index i = 0; i < np; ++i) k.past_values(i) = path.at(static_cast<std::size_t>(i) + 1);

  k.past_llt.compute(cov);
  if (k.past_llt.info() != Eigen::Success) {
    cov.diagonal().array() += kJitter;
    k.past_llt.compute(cov);
    k.regularized = true;
    if (k.past_llt.info() != Eigen::Success)
      throw std::runtime_error("past covariance is numerically singular even after jitter");
  }
  k.weights = k.past_llt.solve(k.past_values);
  return k;
}

// Conditional mean of B_t - B_u given the past grid values.
double conditional_mean_minus_bu(const Kriging& k, const TimeGrid& grid, double t) {
  const Eigen::Index np = k.weights.size();
  Eigen::VectorXd cross(np);
  for (Eigen::Index i = 0; i < np; ++i)
    cross(i) = fbm_cov(t, grid.point(static_cast<std::size_t>(i) + 1), k.twoH);
  const double bu = k.past_values(static_cast<Eigen::Index>(k.u_index) - 1);
  return cross.dot(k.weights) - bu;
}

}  // namespace

ConditionalSplit conditional_split(const GridPath& path, double H, std::size_t u_index) {
  const Kriging k = build_kriging(path, H, u_index);
  const TimeGrid& grid = path.grid();
  const std::size_t nf = grid.n - u_index;
  TimeGrid future(k.u, grid.t1, nf);

  ConditionalSplit split;
  split.u_index = u_index;
  split.u = k.u;
  split.regularized = k.regularized;
  split.bar = GridPath(future, 1);
  split.tilde = GridPath(future, 1);
  const double bu = path.at(u_index);
  split.bar.at(0) = 0.0;
  split.tilde.at(0) = 0.0;
  for (std::size_t j = 1; j <= nf; ++j) {
    const double t = grid.point(u_index + j);
    const double bar = conditional_mean_minus_bu(k, grid, t);
    split.bar.at(j) = bar;
    split.tilde.at(j) = (path.at(u_index + j) - bu) - bar;
  }
  return split;
}

ConditionalLaw conditional_law(const GridPath& path, double H, std::size_t u_index) {
  const Kriging k = build_kriging(path, H, u_index);
  const TimeGrid& grid = path.grid();
  const std::size_t nf = grid.n - u_index;
  TimeGrid future(k.u, grid.t1, nf);

  ConditionalLaw law;
  law.u_index = u_index;
  law.future_grid = future;
  law.regularized = k.regularized;
  law.bar = GridPath(future, 1);
  law.bar.at(0) = 0.0;
  for (std::size_t j = 1; j <= nf; ++j)
    law.bar.at(j) = conditional_mean_minus_bu(k, grid, grid.point(u_index + j));

  const Eigen::Index np = k.weights.size();
  const Eigen::Index m = static_cast<Eigen::Index>(nf);
  Eigen::MatrixXd cross(m, np);  // Cov(B_future, B_past)
  for (Eigen::Index a = 0; a < m; ++a) {
    const double t = grid.point(u_index + static_cast<std::size_t>(a) + 1);
    for (Eigen::Index i = 0; i < np; ++i)
      cross(a, i) = fbm_cov(t, grid.point(static_cast<std::size_t>(i) + 1), k.twoH);
  }
  Eigen::MatrixXd ff(m, m);
  for (Eigen::Index a = 0; a < m; ++a)
    for (Eigen::Index b = 0; b <= a; ++b) {
      const double v = fbm_cov(grid.point(u_index + static_cast<std::size_t>(a) + 1),
                               grid.point(u_index + static_cast<std::size_t>(b) + 1), k.twoH);
      ff(a, b) = v;
      ff(b, a) = v;
    }
  law.cov = ff - cross * k.past_llt.solve(cross.transpose());
  law.cov = 0.5 * (law.cov + law.cov.transpose().eval());

  Eigen::LLT<Eigen::MatrixXd> llt(law.cov);
  if (llt.info() != Eigen::Success) {
    Eigen::MatrixXd reg = law.cov;
    reg.diagonal().array() += kJitter;
    llt.compute(reg);
    law.regularized = true;
    if (llt.info() != Eigen::Success)
      throw std::runtime_error("conditional covariance is numerically singular even after jitter");
  }
  law.cov_cholesky = llt.matrixL();
  return law;
}

std::vector<GridPath> sample_conditional_future(const ConditionalLaw& law, std::size_t n_samples,
                                                std::uint64_t seed) {
  const std::size_t nf = law.future_grid.n;
  std::vector<GridPath> draws;
  draws.reserve(n_samples);
  Eigen::VectorXd z(static_cast<Eigen::Index>(nf));
  for (std::size_t s = 0; s < n_samples; ++s) {
    RngStream rng(seed, {stream::kConditional, s});
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.normal();
    const Eigen::VectorXd tilde = law.cov_cholesky * z;
    GridPath p(law.future_grid, 1);
    p.at(0) = 0.0;
    for (std::size_t j = 0; j < nf; ++j) p.at(j + 1) = tilde(static_cast<Eigen::Index>(j));
    draws.push_back(std::move(p));
  }
  return draws;
}

double mixed_integral(const GridPath& F, const ConditionalSplit& split) {
  if (F.dims() != 1) throw std::invalid_argument("mixed_integral: scalar integrand expected");
  if (!(F.grid() == split.bar.grid())) throw std::invalid_argument("mismatched grids");
  const std::size_t m = F.points();
  const double h = F.grid().spacing();

  // Riemann-Stieltjes against the smooth bar part, via its finite-difference
  // derivative and the trapezoid rule (telescopes exactly for F == 1).
  std::vector<double> dbar(m);
  dbar[0] = (split.bar.at(1) - split.bar.at(0)) / h;
  dbar[m - 1] = (split.bar.at(m - 1) - split.bar.at(m - 2)) / h;
  for (std::size_t k = 1; k + 1 < m; ++k)
    dbar[k] = (split.bar.at(k + 1) - split.bar.at(k - 1)) / (2.0 * h);
  double i1 = 0.0;
  for (std::size_t k = 0; k + 1 < m; ++k)
    i1 += 0.5 * h * (F.at(k) * dbar[k] + F.at(k + 1) * dbar[k + 1]);

  // Left-point Riemann-Stieltjes against the sampled tilde part.
  double i2 = 0.0;
  for (std::size_t k = 0; k + 1 < m; ++k)
    i2 += F.at(k) * (split.tilde.at(k + 1) - split.tilde.at(k));

  return i1 + i2;
}

}  // namespace fbmavg
