#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "fbmavg/gridpath.hpp"

namespace fbmavg {

struct NormReport {
  double value = 0.0;
  std::size_t attain_s = 0;  // grid index s of the maximising pair, s < t
  std::size_t attain_t = 0;
};

// Homogeneous Hoelder semi-norm sup_{s<t} |x_t - x_s| / |t-s|^alpha over all
// grid pairs. `stride` > 1 subsamples the pair set (coarse mode for long
// paths); stride = 1 is the exact O(n^2) scan.
NormReport holder_seminorm(const GridPath& path, double alpha, std::size_t stride = 1);

// Negative Hoelder norm |h|_{-kappa} = sup_{s<t} |t-s|^{kappa-1} |H(t)-H(s)|
// with H the trapezoid primitive of the scalar integrand h.
NormReport neg_holder_norm(const GridPath& integrand, double kappa, std::size_t stride = 1);

// Same, starting from an already accumulated primitive sampled on `grid`.
NormReport neg_holder_norm_of_primitive(const TimeGrid& grid, const std::vector<double>& primitive,
                                        double kappa, std::size_t stride = 1);

// |f|_{-kappa,gamma} lower bound over a finite x sample set:
// max( sup_x |f(.,x)|_{-kappa},  sup_{x != y} |f(.,x)-f(.,y)|_{-kappa} / |x-y|^gamma ).
// The true norm takes the sup over all of R^d; this is the computable
// restriction to the supplied samples.
NormReport neg_holder_xdep_norm(const std::function<double(double, double)>& f,
                                const TimeGrid& grid, const std::vector<double>& x_samples,
                                double kappa, double gamma, std::size_t stride = 1);

struct OscLip {
  double osc = 0.0;
  double lip = 0.0;
};

// Oscillation (max - min) and max adjacent difference quotient of samples on
// a 1-D grid with spacing `dy`; `periodic` also closes the last-first pair.
OscLip osc_lip_norms(const std::vector<double>& samples, double dy, bool periodic);

}  // namespace fbmavg
