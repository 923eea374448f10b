#include "fbmavg/sewing.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

#include "fbmavg/norms.hpp"
#include "fbmavg/parallel.hpp"

namespace fbmavg {

SewingResult sew(const Germ& germ, const TimeGrid& grid, std::size_t max_level) {
  if (!germ.eval) throw std::invalid_argument("sew: germ has no evaluator");
  if (grid.n != (std::size_t{1} << max_level))
    throw std::invalid_argument("sew: grid must have 2^max_level intervals");
  const std::size_t dims = germ.dims;

  // Riemann sums at the points of each dyadic level; level l has 2^l pieces.
  std::vector<std::vector<double>> prev;  // cumulative sums at level points
  SewingResult res;
  res.levels_used = max_level + 1;

  std::vector<double> a(dims);
  for (std::size_t level = 0; level <= max_level; ++level) {
    const std::size_t pieces = std::size_t{1} << level;
    const std::size_t stride = grid.n >> level;
    std::vector<std::vector<double>> cum(pieces + 1, std::vector<double>(dims, 0.0));
    for (std::size_t k = 0; k < pieces; ++k) {
      germ.eval(k * stride, (k + 1) * stride, a.data());
      for (std::size_t d = 0; d < dims; ++d) cum[k + 1][d] = cum[k][d] + a[d];
    }
    if (level > 0) {
      double change = 0.0;
      for (std::size_t k = 0; k < prev.size(); ++k) {
        double norm2 = 0.0;
        for (std::size_t d = 0; d < dims; ++d) {
          const double diff = cum[2 * k][d] - prev[k][d];
          norm2 += diff * diff;
        }
        change = std::max(change, std::sqrt(norm2));
      }
      res.defect_profile.emplace_back(static_cast<int>(level), change);
    }
    prev = std::move(cum);
  }

  // Finest-level cumulative path (I additivity holds exactly by summation).
  res.integral = GridPath(grid, dims);
  for (std::size_t k = 0; k + 1 <= grid.n; ++k) {
    germ.eval(k, k + 1, a.data());
    for (std::size_t d = 0; d < dims; ++d)
      res.integral.at(k + 1, d) = res.integral.at(k, d) + a[d];
  }

  // Geometric contraction of the per-level changes above the rounding floor
  // set by the integral's own magnitude.
  double mag = 0.0;
  for (double v : res.integral.data()) mag = std::max(mag, std::abs(v));
  const double floor = 1e-12 * (1.0 + mag);
  std::size_t grow = 0, checks = 0;
  for (std::size_t k = 1; k < res.defect_profile.size(); ++k) {
    const double a0 = res.defect_profile[k - 1].second;
    const double a1 = res.defect_profile[k].second;
    if (a0 < floor || a1 < floor) continue;
    ++checks;
    if (a1 > 0.98 * a0) ++grow;
  }
  res.contracting = (checks == 0) || (grow * 3 <= checks);
  return res;
}

GridPath young_integral(const GridPath& f, const GridPath& g) {
  if (!(f.grid() == g.grid())) throw std::invalid_argument("young_integral: grid mismatch");
  if (f.dims() != 1 || g.dims() != 1)
    throw std::invalid_argument("young_integral: scalar paths expected");
  GridPath out(f.grid(), 1);
  for (std::size_t k = 0; k + 1 < f.points(); ++k)
    out.at(k + 1) = out.at(k) + f.at(k) * (g.at(k + 1) - g.at(k));
  return out;
}

double young_remainder_ratio(const GridPath& f, const GridPath& g, double alpha, double beta) {
  const GridPath I = young_integral(f, g);
  NormReport fa = holder_seminorm(f, alpha);
  NormReport gb = holder_seminorm(g, beta);
  const double denom_scale = fa.value * gb.value;
  if (denom_scale == 0.0) return 0.0;
  const std::size_t n = f.grid().n;
  if ((n & (n - 1)) != 0) throw std::invalid_argument("young_remainder_ratio: dyadic grid expected");
  double worst = 0.0;
  for (std::size_t span = n; span >= 1; span /= 2) {
    for (std::size_t i = 0; i + span <= n; i += span) {
      const std::size_t j = i + span;
      const double rem =
          std::abs(I.at(j) - I.at(i) - f.at(i) * (g.at(j) - g.at(i)));
      const double dt = f.grid().point(j) - f.grid().point(i);
      worst = std::max(worst, rem / (denom_scale * std::pow(dt, alpha + beta)));
    }
    if (span == 1) break;
  }
  return worst;
}

DefectNorms conditional_defect_norms(
    const std::function<double(std::size_t, std::size_t, const SuTriple&)>& delta_eval,
    const std::function<double(std::size_t, std::size_t, std::size_t)>& a_eval,
    const std::vector<SuTriple>& triples, const TimeGrid& grid, double p, std::size_t n_outer,
    std::size_t n_inner, int jobs) {
  if (triples.empty()) throw std::invalid_argument("conditional_defect_norms: no triples");
  DefectNorms out;
  out.p = p;
  out.n_outer = n_outer;
  out.n_inner = n_inner;

  // Group triples by |t-s| so each group yields one point of the fit.
  std::map<double, std::vector<std::size_t>> groups;
  for (std::size_t k = 0; k < triples.size(); ++k) {
    const double dt = grid.point(triples[k].t) - grid.point(triples[k].s);
    groups[dt].push_back(k);
  }

  std::vector<double> dts, anorms, dnorms;
  double noise_ratio_acc = 0.0;
  std::size_t noise_terms = 0;
  for (const auto& [dt, idxs] : groups) {
    std::vector<double> inner_means(n_outer * idxs.size());
    std::vector<double> inner_ses(n_outer * idxs.size());
    std::vector<double> a_vals(n_outer * idxs.size());
    parallel_for(n_outer, jobs, [&](std::size_t o) {
      for (std::size_t q = 0; q < idxs.size(); ++q) {
        const SuTriple& tr = triples[idxs[q]];
        std::vector<double> ds(n_inner);
        for (std::size_t r = 0; r < n_inner; ++r) ds[r] = delta_eval(o, r, tr);
        const MeanReport m = mean_se(ds);
        inner_means[o * idxs.size() + q] = m.mean;
        inner_ses[o * idxs.size() + q] = m.se;
        a_vals[o * idxs.size() + q] = a_eval(o, tr.s, tr.t);
      }
    });
    const MeanReport dn = lp_norm_se(inner_means, p);
    const MeanReport an = lp_norm_se(a_vals, p);
    dts.push_back(dt);
    dnorms.push_back(std::max(dn.mean, 1e-300));
    anorms.push_back(std::max(an.mean, 1e-300));
    // noise diagnostic: average inner se against the estimated defect level
    double se_acc = 0.0;
    for (double se : inner_ses) se_acc += se;
    se_acc /= static_cast<double>(inner_ses.size());
    if (dn.mean > 0.0) {
      noise_ratio_acc += se_acc / dn.mean;
      ++noise_terms;
    }
  }
  out.dt = dts;
  out.a_norm = anorms;
  out.delta_norm = dnorms;
  out.eta_fit = fit_loglog(dts, anorms);
  out.etabar_fit = fit_loglog(dts, dnorms);
  const double noise_ratio = noise_terms ? noise_ratio_acc / static_cast<double>(noise_terms) : 0.0;
  if (noise_ratio > 0.5) {
    out.inner_noise_warning = true;
    out.etabar_fit.slope_se *= (1.0 + noise_ratio);
  }
  return out;
}

std::string DefectNorms::to_json() const {
  std::ostringstream os;
  os.precision(12);
  os << "{\"p\":" << p << ",\"eta_fit\":{\"C\":" << std::exp(eta_fit.intercept)
     << ",\"eta\":" << eta_fit.slope << ",\"r2\":" << eta_fit.r2 << "}"
     << ",\"etabar_fit\":{\"C\":" << std::exp(etabar_fit.intercept)
     << ",\"etabar\":" << etabar_fit.slope << ",\"r2\":" << etabar_fit.r2 << "}"
     << ",\"n_outer\":" << n_outer << ",\"n_inner\":" << n_inner
     << ",\"inner_noise_warning\":" << (inner_noise_warning ? "true" : "false") << "}";
  return os.str();
}

ComposeResult compose_neg_holder(const std::function<double(double, double)>& f_hat,
                                 const GridPath& x, double kappa, double gamma,
                                 double declared_alpha) {
  if (x.dims() != 1) throw std::invalid_argument("compose_neg_holder: scalar x expected");
  const std::size_t n = x.grid().n;
  if ((n & (n - 1)) != 0)
    throw std::invalid_argument("compose_neg_holder: dyadic grid expected");
  std::size_t max_level = 0;
  while ((std::size_t{1} << max_level) < n) ++max_level;

  ComposeResult res;
  res.exponent_warning = !(gamma * declared_alpha > kappa);
  const TimeGrid& grid = x.grid();
  Germ germ = Germ::scalar([&f_hat, &x, &grid](std::size_t i, std::size_t j) {
    return f_hat(grid.point(j), x.at(i)) - f_hat(grid.point(i), x.at(i));
  });
  res.sewn = sew(germ, grid, max_level);
  return res;
}

}  // namespace fbmavg
