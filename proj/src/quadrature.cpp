#include "fbmavg/quadrature.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace fbmavg {

double integrate(const std::function<double(double)>& f, double a, double b, double rel_tol,
                 int max_depth) {
  using boost::math::quadrature::gauss_kronrod;
  return gauss_kronrod<double, 15>::integrate(f, a, b, max_depth, rel_tol);
}

}  // namespace fbmavg
