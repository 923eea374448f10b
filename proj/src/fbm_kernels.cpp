#include <array>
#include <cmath>
#include <stdexcept>

#include "fbmavg/fbm.hpp"
#include "fbmavg/quadrature.hpp"

namespace fbmavg {

namespace {

void require_hurst_rough(double H) {
  if (!(H > 0.5 && H < 1.0)) throw std::invalid_argument("H must lie in (1/2, 1)");
}

// 32-point Gauss-Legendre nodes/weights on [0,1].
struct Gauss32 {
  std::array<double, 32> x{};
  std::array<double, 32> w{};
  Gauss32() {
    // nodes/weights on [-1,1] for n=32 (symmetric halves)
    static const double xs[16] = {
        0.0483076656877383162348126, 0.1444719615827964934851864, 0.2392873622521370745446032,
        0.3318686022821276497799168, 0.4213512761306353453641194, 0.5068999089322293900237475,
        0.5877157572407623290407455, 0.6630442669302152009751152, 0.7321821187402896803874267,
        0.7944837959679424069630973, 0.8493676137325699701336930, 0.8963211557660521239653072,
        0.9349060759377396891709191, 0.9647622555875064307738119, 0.9856115115452683354001750,
        0.9972638618494815635449811};
    static const double ws[16] = {
        0.0965400885147278005667648, 0.0956387200792748594190820, 0.0938443990808045656391802,
        0.0911738786957638847128686, 0.0876520930044038111427715, 0.0833119242269467552221991,
        0.0781938957870703064717409, 0.0723457941088485062253994, 0.0658222227763618468376501,
        0.0586840934785355471452836, 0.0509980592623761761961632, 0.0428358980222266806568786,
        0.0342738629130214331026877, 0.0253920653092620594557526, 0.0162743947309056706051706,
        0.0070186100094700966004071};
    for (int i = 0; i < 16; ++i) {
      x[2 * i] = 0.5 * (1.0 - xs[i]);
      x[2 * i + 1] = 0.5 * (1.0 + xs[i]);
      w[2 * i] = 0.5 * ws[i];
      w[2 * i + 1] = 0.5 * ws[i];
    }
  }
};
const Gauss32& gauss32() {
  static const Gauss32 g;
  return g;
}

// J0 = Integral_0^inf u^{H-1/2}(1+u)^{H-5/2} du = Beta(H+1/2, 2-2H), by
// quadrature after splitting at u=1 and removing both endpoint singularities.
double beta_integral(double H) {
  const double q = 1.0 / (H + 0.5);
  const double p = 1.0 / (2.0 - 2.0 * H);
  const double lower = integrate(
      [&](double xi) { return std::pow(1.0 + std::pow(xi, q), H - 2.5) / (H + 0.5); }, 0.0, 1.0,
      1e-12);
  const double upper = integrate(
      [&](double xi) { return std::pow(1.0 + std::pow(xi, p), H - 2.5) / (2.0 - 2.0 * H); }, 0.0,
      1.0, 1e-12);
  return lower + upper;
}

// K(a) = Integral_0^a z^{H-1/2} (1+z)^{H-5/2} dz, smooth evaluation for a <= 1.
double lower_incomplete(double a, double H) {
  if (a == 0.0) return 0.0;
  const double q = 1.0 / (H + 0.5);
  const auto& g = gauss32();
  double acc = 0.0;
  for (int i = 0; i < 32; ++i)
    acc += g.w[i] * std::pow(1.0 + a * std::pow(g.x[i], q), H - 2.5);
  return std::pow(a, H + 0.5) * q * acc;
}

// J(a) = Integral_a^inf z^{H-1/2} (1+z)^{H-5/2} dz, smooth evaluation for a >= 1.
double upper_incomplete(double a, double H) {
  const double p = 1.0 / (2.0 - 2.0 * H);
  const auto& g = gauss32();
  double acc = 0.0;
  for (int i = 0; i < 32; ++i) acc += g.w[i] * std::pow(std::pow(g.x[i], p) + a, H - 2.5);
  return std::pow(a, H + 0.5) * p * acc;
}

// tail(r, d) = Integral_r^inf v^{H-1/2} (d+v)^{H-5/2} dv = d^{2H-2} J(r/d).
double tail_integral(double r, double d, const KernelConstants& kc) {
  const double a = r / d;
  if (a > 1.0) return std::pow(d, 2.0 * kc.H - 2.0) * upper_incomplete(a, kc.H);
  const double J0 = -kc.c2 / kc.c3;
  return std::pow(d, 2.0 * kc.H - 2.0) * (J0 - lower_incomplete(a, kc.H));
}

// c2 (s-r)^{2H-2} + c3 tail(r, s-r) without cancellation between the terms.
double singular_pair(double r, double d, const KernelConstants& kc) {
  const double a = r / d;
  if (a > 1.0)
    return std::pow(d, 2.0 * kc.H - 2.0) * (kc.c2 + kc.c3 * upper_incomplete(a, kc.H));
  return -kc.c3 * std::pow(d, 2.0 * kc.H - 2.0) * lower_incomplete(a, kc.H);
}

}  // namespace

KernelConstants::KernelConstants(double hurst) : H(hurst) {
  require_hurst_rough(H);
  c1 = H - 0.5;
  c3 = (H - 0.5) * (H - 1.5);
  c2 = -c3 * beta_integral(H);
}

double covariance_R(double r, double s, double H) {
  if (!(r > 0.0 && s > 0.0)) throw std::invalid_argument("covariance_R requires r, s > 0");
  if (!(H > 0.0 && H < 1.0)) throw std::invalid_argument("H must lie in (0,1)");
  const double m = std::min(r, s);
  const double gap = std::abs(s - r);
  if (H == 0.5) return m;  // kernel is identically 1
  const double q = 1.0 / (H + 0.5);
  const double val = integrate(
      [&](double xi) { return std::pow(gap + m * std::pow(xi, q), H - 0.5); }, 0.0, 1.0, 1e-11);
  return q * std::pow(m, H + 0.5) * val;
}

double d2R_closed(double r, double s, const KernelConstants& kc) {
  if (!(r > 0.0 && s > 0.0)) throw std::invalid_argument("d2R_closed requires r, s > 0");
  if (r == s) throw std::domain_error("on-diagonal singularity");
  const double lo = std::min(r, s), hi = std::max(r, s);
  const double d = hi - lo;
  return kc.c1 * std::pow(lo, kc.H - 0.5) * std::pow(hi, kc.H - 1.5) + singular_pair(lo, d, kc);
}

double d2R_closed(double r, double s, double H) { return d2R_closed(r, s, KernelConstants(H)); }

double d2R_integral_form(double r, double s, double H) {
  require_hurst_rough(H);
  if (r == s) throw std::domain_error("on-diagonal singularity");
  const double lo = std::min(r, s), hi = std::max(r, s);
  const double d = hi - lo;
  // Integral_0^lo ((lo-v)(hi-v))^{H-3/2} dv, substituting lo - v = d z:
  // d^{2H-2} Integral_0^{lo/d} (z(1+z))^{H-3/2} dz; z-singularity removed by
  // z = xi^{1/(H-1/2)}.
  const double a = lo / d;
  const double e = 1.0 / (H - 0.5);
  const double cap = std::pow(a, H - 0.5);
  const double val = integrate(
      [&](double xi) {
        const double z = std::pow(xi, e);
        return e * std::pow(1.0 + z, H - 1.5);
      },
      0.0, cap, 1e-10);
  return (H - 0.5) * (H - 0.5) * std::pow(d, 2.0 * H - 2.0) * val;
}

RkhsForm::RkhsForm(double H, const TimeGrid& grid) : n_(grid.n), weights_(grid.n * grid.n, 0.0) {
  const KernelConstants kc(H);
  const double twoH = 2.0 * H;
  const auto psi = [&](double x) {
    // second primitive of |x|^{2H-2}
    return std::pow(std::abs(x), twoH) / (twoH * (twoH - 1.0));
  };
  // 3-point Gauss nodes/weights on [0,1] for the smooth remainder
  static const double gx3[3] = {0.1127016653792583, 0.5, 0.8872983346207417};
  static const double gw3[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};

  const double h = grid.spacing();
  const auto smooth_part = [&](double rr, double ss) {
    const double lo = std::min(rr, ss), hi = std::max(rr, ss);
    if (hi - lo < 1e-13 * hi)  // continuous across the diagonal
      return std::pow(lo, twoH - 2.0) * (kc.c1 + kc.c3 / (2.0 - twoH));
    return kc.c1 * std::pow(lo, H - 0.5) * std::pow(hi, H - 1.5) +
           kc.c3 * tail_integral(lo, hi - lo, kc);
  };

  for (std::size_t i = 0; i < n_; ++i) {
    const double ri0 = grid.point(i);
    for (std::size_t j = i; j < n_; ++j) {
      const double sj0 = grid.point(j);
      // exact cellwise integral of c2 |s-r|^{2H-2}
      const double di = grid.point(j + 1) - ri0;
      double w = kc.c2 * (psi(di) - psi(sj0 - ri0) - psi(grid.point(j + 1) - grid.point(i + 1)) +
                          psi(sj0 - grid.point(i + 1)));
      // smooth remainder: midpoint far from diagonal/axes, 3x3 Gauss nearby
      if (j - i >= 3 && i > 0) {
        w += h * h * smooth_part(ri0 + 0.5 * h, sj0 + 0.5 * h);
      } else {
        double acc = 0.0;
        for (int a = 0; a < 3; ++a)
          for (int b = 0; b < 3; ++b)
            acc += gw3[a] * gw3[b] * smooth_part(ri0 + gx3[a] * h, sj0 + gx3[b] * h);
        w += h * h * acc;
      }
      weights_[i * n_ + j] = w;
      weights_[j * n_ + i] = w;
    }
  }
}

double RkhsForm::quadratic_cells(const std::vector<double>& h_cells) const {
  if (h_cells.size() != n_) throw std::invalid_argument("RkhsForm: cell count mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < n_; ++i) {
    const double* row = weights_.data() + i * n_;
    double inner = 0.0;
    for (std::size_t j = 0; j < n_; ++j) inner += row[j] * h_cells[j];
    acc += h_cells[i] * inner;
  }
  return acc;
}

double RkhsForm::quadratic(const GridPath& h) const {
  if (h.dims() != 1) throw std::invalid_argument("RkhsForm: scalar path expected");
  if (h.grid().n != n_) throw std::invalid_argument("RkhsForm: grid mismatch");
  std::vector<double> cells(n_);
  for (std::size_t i = 0; i < n_; ++i) cells[i] = h.at(i);
  return quadratic_cells(cells);
}

double RkhsForm::norm(const GridPath& h) const { return std::sqrt(std::abs(quadratic(h))); }

double rkhs_norm(const GridPath& h, double H) { return RkhsForm(H, h.grid()).norm(h); }

}  // namespace fbmavg
