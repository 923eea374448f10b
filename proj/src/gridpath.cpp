#include "fbmavg/gridpath.hpp"

#include <cmath>

namespace fbmavg {

bool GridPath::all_finite() const {
  for (double v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

double GridPath::increment_norm(std::size_t i, std::size_t j) const {
  double s = 0.0;
  for (std::size_t d = 0; d < dims_; ++d) {
    const double diff = at(j, d) - at(i, d);
    s += diff * diff;
  }
  return std::sqrt(s);
}

std::vector<double> trapezoid_primitive(const GridPath& path) {
  if (path.dims() != 1) throw std::invalid_argument("trapezoid_primitive: scalar path expected");
  const std::size_t m = path.points();
  const double h = path.grid().spacing();
  std::vector<double> out(m, 0.0);
  for (std::size_t k = 1; k < m; ++k)
    out[k] = out[k - 1] + 0.5 * h * (path.at(k - 1) + path.at(k));
  return out;
}

}  // namespace fbmavg
