#pragma once

#include <functional>

namespace fbmavg {

// Adaptive Gauss-Kronrod integration of f over [a, b] to the given relative
// tolerance. Integrands are expected to be continuous; endpoint-singular
// kernels are mapped to smooth form by the callers before integrating.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol = 1e-10, int max_depth = 15);

}  // namespace fbmavg
