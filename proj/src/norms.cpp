#include "fbmavg/norms.hpp"

#include <cmath>
#include <stdexcept>

namespace fbmavg {

namespace {

void require_pairable(std::size_t points) {
  if (points < 2) throw std::invalid_argument("degenerate path");
}

// Shared pair scan: maximise weight(i,j) * |t_j - t_i|^expo over i < j.
NormReport pair_scan(const TimeGrid& grid, double expo,
                     const std::function<double(std::size_t, std::size_t)>& amplitude,
                     std::size_t stride) {
  require_pairable(grid.points());
  if (stride < 1) stride = 1;
  NormReport rep;
  rep.attain_s = 0;
  rep.attain_t = stride;
  const std::size_t m = grid.points();
  for (std::size_t i = 0; i < m; i += stride) {
    for (std::size_t j = i + stride; j < m; j += stride) {
      const double dt = grid.point(j) - grid.point(i);
      const double v = amplitude(i, j) * std::pow(dt, expo);
      if (v > rep.value) {
        rep.value = v;
        rep.attain_s = i;
        rep.attain_t = j;
      }
    }
  }
  return rep;
}

}  // namespace

NormReport holder_seminorm(const GridPath& path, double alpha, std::size_t stride) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0,1)");
  return pair_scan(
      path.grid(), -alpha,
      [&path](std::size_t i, std::size_t j) { return path.increment_norm(i, j); }, stride);
}

NormReport neg_holder_norm_of_primitive(const TimeGrid& grid, const std::vector<double>& primitive,
                                        double kappa, std::size_t stride) {
  if (!(kappa > 0.0 && kappa < 1.0)) throw std::invalid_argument("kappa must lie in (0,1)");
  if (primitive.size() != grid.points())
    throw std::invalid_argument("primitive size does not match grid");
  return pair_scan(
      grid, kappa - 1.0,
      [&primitive](std::size_t i, std::size_t j) { return std::abs(primitive[j] - primitive[i]); },
      stride);
}

NormReport neg_holder_norm(const GridPath& integrand, double kappa, std::size_t stride) {
  if (integrand.dims() != 1) throw std::invalid_argument("neg_holder_norm: scalar integrand expected");
  require_pairable(integrand.points());
  return neg_holder_norm_of_primitive(integrand.grid(), trapezoid_primitive(integrand), kappa,
                                      stride);
}

NormReport neg_holder_xdep_norm(const std::function<double(double, double)>& f,
                                const TimeGrid& grid, const std::vector<double>& x_samples,
                                double kappa, double gamma, std::size_t stride) {
  if (x_samples.size() < 2) throw std::invalid_argument("x sample set needs at least 2 points");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must lie in (0,1]");

  const std::size_t m = grid.points();
  std::vector<std::vector<double>> samples(x_samples.size(), std::vector<double>(m));
  for (std::size_t xi = 0; xi < x_samples.size(); ++xi)
    for (std::size_t k = 0; k < m; ++k) samples[xi][k] = f(grid.point(k), x_samples[xi]);

  NormReport best;
  for (std::size_t xi = 0; xi < x_samples.size(); ++xi) {
    GridPath p(grid, samples[xi]);
    NormReport r = neg_holder_norm(p, kappa, stride);
    if (r.value > best.value) best = r;
  }
  for (std::size_t xi = 0; xi < x_samples.size(); ++xi) {
    for (std::size_t xj = xi + 1; xj < x_samples.size(); ++xj) {
      const double dx = std::abs(x_samples[xj] - x_samples[xi]);
      if (dx == 0.0) continue;
      std::vector<double> diff(m);
      for (std::size_t k = 0; k < m; ++k) diff[k] = samples[xi][k] - samples[xj][k];
      GridPath p(grid, diff);
      NormReport r = neg_holder_norm(p, kappa, stride);
      r.value /= std::pow(dx, gamma);
      if (r.value > best.value) best = r;
    }
  }
  return best;
}

OscLip osc_lip_norms(const std::vector<double>& samples, double dy, bool periodic) {
  if (samples.size() < 2) throw std::invalid_argument("degenerate sample set");
  if (!(dy > 0.0)) throw std::invalid_argument("dy must be positive");
  OscLip out;
  double lo = samples[0], hi = samples[0];
  for (double v : samples) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  out.osc = hi - lo;
  for (std::size_t k = 0; k + 1 < samples.size(); ++k)
    out.lip = std::max(out.lip, std::abs(samples[k + 1] - samples[k]) / dy);
  if (periodic)
    out.lip = std::max(out.lip, std::abs(samples.front() - samples.back()) / dy);
  return out;
}

}  // namespace fbmavg
