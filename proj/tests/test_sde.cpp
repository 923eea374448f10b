#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "fbmavg/fbm.hpp"
#include "fbmavg/fit.hpp"
#include "fbmavg/norms.hpp"
#include "fbmavg/rng.hpp"
#include "fbmavg/sde.hpp"

using namespace fbmavg;

namespace {

GridPath sampled(const TimeGrid& grid, double (*fn)(double)) {
  GridPath p(grid, 1);
  for (std::size_t k = 0; k < p.points(); ++k) p.at(k) = fn(grid.point(k));
  return p;
}

MatrixCoeff scalar_F(double (*fn)(double)) {
  return [fn](std::size_t, const Eigen::VectorXd& z, Eigen::MatrixXd& out) { out(0, 0) = fn(z(0)); };
}

}  // namespace

TEST_CASE("solve_young: pure forcing reproduces x0 + Z exactly") {
  TimeGrid g(0.0, 1.0, 64);
  const GridPath Z = sampled(g, [](double t) { return std::sin(3.0 * t); });
  YoungOdeSpec spec;
  spec.driver = GridPath(g, 1);  // zero driver
  spec.x0 = Eigen::VectorXd::Constant(1, 2.0);
  spec.forcing = &Z;
  const GridPath z = solve_young(spec);
  for (std::size_t k = 0; k <= 64; ++k)
    CHECK(z.at(k) == doctest::Approx(2.0 + Z.at(k) - Z.at(0)).epsilon(1e-15));
}

TEST_CASE("solve_young: exact on affine coefficients with piecewise-linear driver") {
  // dz = (2 z + 1) db with b piecewise linear: the left-point scheme is the
  // exact Riemann-Stieltjes solution of the discretised equation
  TimeGrid g(0.0, 1.0, 32);
  GridPath b(g, 1);
  for (std::size_t k = 0; k <= 32; ++k) b.at(k) = (k % 2 == 0) ? 0.01 * k : 0.015 * k;
  YoungOdeSpec spec;
  spec.F = [](std::size_t, const Eigen::VectorXd& z, Eigen::MatrixXd& out) {
    out(0, 0) = 2.0 * z(0) + 1.0;
  };
  spec.driver = b;
  spec.x0 = Eigen::VectorXd::Constant(1, 0.5);
  const GridPath z = solve_young(spec);
  double ref = 0.5;
  for (std::size_t k = 0; k < 32; ++k) ref += (2.0 * ref + 1.0) * (b.at(k + 1) - b.at(k));
  CHECK(std::abs(z.at(32) - ref) <= 1e-12);
}

TEST_CASE("solve_young: smooth exponential closed form") {
  // dz = z db, b = sin: z = x0 exp(b_t - b_0); first order in h
  for (std::size_t lvl : {12, 20}) {
    TimeGrid g(0.0, 1.0, std::size_t{1} << lvl);
    const GridPath b = sampled(g, [](double t) { return std::sin(t); });
    YoungOdeSpec spec;
    spec.F = scalar_F(+[](double z) { return z; });
    spec.driver = b;
    spec.x0 = Eigen::VectorXd::Constant(1, 1.0);
    const GridPath z = solve_young(spec);
    double worst = 0.0;
    for (std::size_t k = 0; k <= g.n; ++k)
      worst = std::max(worst, std::abs(z.at(k) - std::exp(b.at(k) - b.at(0))));
    if (lvl == 12)
      CHECK(worst <= 1.2 * std::exp(1.0) * 0.5 * g.spacing() * 0.73);  // first-order envelope
    else
      CHECK(worst <= 1e-6);  // stated tolerance at refined resolution
  }
}

TEST_CASE("solve_young: pathwise exponential for dz = z dB") {
  const double H = 0.75;
  const std::size_t n = 1 << 14;
  FbmEnsemble ens = sample_fbm(H, TimeGrid(0.0, 1.0, n), 24, 1, 51, 2);
  for (const auto& b : ens.paths) {
    YoungOdeSpec spec;
    spec.F = scalar_F(+[](double z) { return z; });
    spec.driver = b;
    spec.x0 = Eigen::VectorXd::Constant(1, 1.0);
    const GridPath z = solve_young(spec);
    const double expect = std::exp(b.at(n));
    CHECK(std::abs(z.at(n) - expect) / expect <= 1e-2);
  }
}

TEST_CASE("solve_young: refinement self-convergence at order >= 2 beta - 1") {
  const double H = 0.75;
  const std::size_t n = 1 << 14;
  FbmEnsemble ens = sample_fbm(H, TimeGrid(0.0, 1.0, n), 8, 1, 52, 2);
  std::vector<double> hs, errs;
  for (std::size_t lvl : {10, 11, 12, 13}) {
    const std::size_t stride = n >> lvl;
    double acc = 0.0;
    for (const auto& b : ens.paths) {
      auto solve_at = [&](std::size_t strd) {
        TimeGrid g(0.0, 1.0, n / strd);
        GridPath sub(g, 1);
        for (std::size_t k = 0; k <= n / strd; ++k) sub.at(k) = b.at(k * strd);
        YoungOdeSpec spec;
        spec.F = scalar_F(+[](double z) { return std::sin(z); });
        spec.driver = sub;
        spec.x0 = Eigen::VectorXd::Constant(1, 0.4);
        return solve_young(spec);
      };
      const GridPath za = solve_at(stride);
      const GridPath zb = solve_at(stride / 2);  // coupled noise: same path subsampled
      double diff = 0.0;
      for (std::size_t k = 0; k <= n / stride; ++k)
        diff = std::max(diff, std::abs(za.at(k) - zb.at(2 * k)));
      acc += diff;
    }
    hs.push_back(static_cast<double>(stride) / n);
    errs.push_back(acc / 8.0);
  }
  // 2 beta - 1 with beta slightly below H = 0.75 gives ~0.5
  CHECK(fit_loglog(hs, errs).slope >= 2.0 * 0.7 - 1.0 - 0.1);
}

TEST_CASE("solve_young: blow-up guard reports the blow-up time") {
  TimeGrid g(0.0, 1.0, 64);
  const GridPath b = sampled(g, [](double t) { return t; });
  YoungOdeSpec spec;
  spec.F = scalar_F(+[](double z) { return z * z; });  // superlinear
  spec.driver = b;
  spec.x0 = Eigen::VectorXd::Constant(1, 80.0);
  spec.blowup_bound = 1e6;
  CHECK_THROWS_AS((void)solve_young(spec), BlowUpError);
}

TEST_CASE("solve_mixed: sigma == 0 matches solve_young bitwise") {
  const double H = 0.75;
  const std::size_t n = 1 << 10;
  FbmEnsemble ens = sample_fbm(H, TimeGrid(0.0, 1.0, n), 4, 1, 53, 1);
  for (const auto& b : ens.paths) {
    YoungOdeSpec ys;
    ys.F = scalar_F(+[](double z) { return std::cos(z); });
    ys.G = [](std::size_t, const Eigen::VectorXd& z, Eigen::VectorXd& out) { out(0) = -0.3 * z(0); };
    ys.driver = b;
    ys.x0 = Eigen::VectorXd::Constant(1, 1.0);
    MixedSdeSpec ms;
    ms.F = ys.F;
    ms.G = ys.G;
    ms.B = b;
    ms.z0 = ys.x0;
    CHECK(solve_young(ys).data() == solve_mixed(ms).data());
  }
}

TEST_CASE("solve_mixed: driver reproduction with identity coefficient") {
  TimeGrid g(0.0, 1.0, 128);
  const GridPath b = sampled(g, [](double t) { return std::sin(5.0 * t); });
  MixedSdeSpec ms;
  ms.F = scalar_F(+[](double) { return 1.0; });
  ms.B = b;
  ms.z0 = Eigen::VectorXd::Constant(1, 0.25);
  const GridPath z = solve_mixed(ms);
  for (std::size_t k = 0; k <= 128; ++k)
    CHECK(z.at(k) == doctest::Approx(0.25 + b.at(k) - b.at(0)).epsilon(1e-15));
}

TEST_CASE("solve_mixed: geometric Brownian motion keeps its mean") {
  // dz = z dW (Ito): E z_1 = z0
  const std::size_t n = 512, N = 4000;
  TimeGrid g(0.0, 1.0, n);
  std::vector<double> finals(N);
  for (std::size_t i = 0; i < N; ++i) {
    RngStream rng(60, {stream::kWiener, i});
    GridPath W(g, 1);
    for (std::size_t k = 0; k < n; ++k)
      W.at(k + 1) = W.at(k) + std::sqrt(g.spacing()) * rng.normal();
    MixedSdeSpec ms;
    ms.sigma = scalar_F(+[](double z) { return z; });
    ms.B = GridPath(g, 1);
    ms.W = W;
    ms.z0 = Eigen::VectorXd::Constant(1, 1.0);
    finals[i] = solve_mixed(ms).at(n);
  }
  const MeanReport m = mean_se(finals);
  CHECK(std::abs(m.mean - 1.0) <= 3.0 * m.se);
}

TEST_CASE("solve_mixed: a priori bound with one fitted constant over 256 paths") {
  // ||z||_{alpha,p} <= C (1 + || |B|_beta^{1/beta} ||_p), Theorem-level check
  const double H = 0.75, alpha = 0.45, beta = 0.7;
  const std::size_t n = 1 << 10, N = 256;
  TimeGrid g(0.0, 1.0, n);
  FbmEnsemble ens = sample_fbm(H, g, N, 1, 61, 2);
  std::vector<double> znorm(N), bnorm(N);
  for (std::size_t i = 0; i < N; ++i) {
    RngStream rng(62, {stream::kWiener, i});
    GridPath W(g, 1);
    for (std::size_t k = 0; k < n; ++k)
      W.at(k + 1) = W.at(k) + std::sqrt(g.spacing()) * rng.normal();
    MixedSdeSpec ms;
    ms.F = scalar_F(+[](double z) { return std::cos(z); });
    ms.sigma = scalar_F(+[](double z) { return 0.5 / (1.0 + z * z); });
    ms.G = [](std::size_t, const Eigen::VectorXd& z, Eigen::VectorXd& out) {
      out(0) = -0.2 * std::sin(z(0));
    };
    ms.B = ens.paths[i];
    ms.W = W;
    ms.z0 = Eigen::VectorXd::Constant(1, 0.3);
    const GridPath z = solve_mixed(ms);
    znorm[i] = holder_seminorm(z, alpha, 4).value;
    bnorm[i] = std::pow(holder_seminorm(ens.paths[i], beta, 4).value, 1.0 / beta);
  }
  const double p = 4.0;
  const double lhs = lp_norm_se(znorm, p).mean;
  const double rhs = 1.0 + lp_norm_se(bnorm, p).mean;
  const double C = lhs / rhs;  // fitted on this family
  CHECK(C < 10.0);
  // validation family: fresh driver seeds, same constant
  FbmEnsemble ens2 = sample_fbm(H, g, N, 1, 63, 2);
  std::vector<double> znorm2(N), bnorm2(N);
  for (std::size_t i = 0; i < N; ++i) {
    RngStream rng(64, {stream::kWiener, i});
    GridPath W(g, 1);
    for (std::size_t k = 0; k < n; ++k)
      W.at(k + 1) = W.at(k) + std::sqrt(g.spacing()) * rng.normal();
    MixedSdeSpec ms;
    ms.F = scalar_F(+[](double z) { return std::cos(z); });
    ms.sigma = scalar_F(+[](double z) { return 0.5 / (1.0 + z * z); });
    ms.G = [](std::size_t, const Eigen::VectorXd& z, Eigen::VectorXd& out) {
      out(0) = -0.2 * std::sin(z(0));
    };
    ms.B = ens2.paths[i];
    ms.W = W;
    ms.z0 = Eigen::VectorXd::Constant(1, 0.3);
    const GridPath z = solve_mixed(ms);
    znorm2[i] = holder_seminorm(z, alpha, 4).value;
    bnorm2[i] = std::pow(holder_seminorm(ens2.paths[i], beta, 4).value, 1.0 / beta);
  }
  CHECK(lp_norm_se(znorm2, p).mean <= 1.25 * C * (1.0 + lp_norm_se(bnorm2, p).mean));
}

TEST_CASE("solve_mixed: strong self-convergence of order >= 1/2") {
  const double H = 0.75;
  const std::size_t n = 1 << 12, N = 64;
  TimeGrid g(0.0, 1.0, n);
  FbmEnsemble ens = sample_fbm(H, g, N, 1, 65, 2);
  std::vector<double> hs, errs;
  for (std::size_t lvl : {8, 9, 10, 11}) {
    const std::size_t stride = n >> lvl;
    std::vector<double> diffs(N);
    for (std::size_t i = 0; i < N; ++i) {
      RngStream rng(66, {stream::kWiener, i});
      GridPath W(g, 1);
      for (std::size_t k = 0; k < n; ++k)
        W.at(k + 1) = W.at(k) + std::sqrt(g.spacing()) * rng.normal();
      auto solve_at = [&](std::size_t strd) {
        TimeGrid sub(0.0, 1.0, n / strd);
        GridPath Bs(sub, 1), Ws(sub, 1);
        for (std::size_t k = 0; k <= n / strd; ++k) {
          Bs.at(k) = ens.paths[i].at(k * strd);
          Ws.at(k) = W.at(k * strd);
        }
        MixedSdeSpec ms;
        ms.F = scalar_F(+[](double z) { return std::cos(z); });
        ms.sigma = scalar_F(+[](double z) { return 0.4 + 0.2 * std::sin(z); });
        ms.B = Bs;
        ms.W = Ws;
        ms.z0 = Eigen::VectorXd::Constant(1, 0.3);
        return solve_mixed(ms);
      };
      const GridPath za = solve_at(stride), zb = solve_at(stride / 2);
      double d = 0.0;
      for (std::size_t k = 0; k <= n / stride; ++k)
        d = std::max(d, std::abs(za.at(k) - zb.at(2 * k)));
      diffs[i] = d;
    }
    hs.push_back(static_cast<double>(stride) / n);
    errs.push_back(lp_norm_se(diffs, 2.0).mean);
  }
  const LineFit fit = fit_loglog(hs, errs);
  CHECK(fit.slope >= 0.5 - std::max(0.1, fit.ci_halfwidth()));
}

TEST_CASE("time reversal returns to the initial state at the Young order") {
  const double H = 0.75;
  const std::size_t n = 1 << 12;
  FbmEnsemble ens = sample_fbm(H, TimeGrid(0.0, 1.0, n), 4, 1, 67, 1);
  for (const auto& b : ens.paths) {
    YoungOdeSpec fwd;
    fwd.F = scalar_F(+[](double z) { return std::sin(z) + 1.5; });
    fwd.driver = b;
    fwd.x0 = Eigen::VectorXd::Constant(1, 0.7);
    const GridPath z = solve_young(fwd);

    GridPath rb(b.grid(), 1);
    for (std::size_t k = 0; k <= n; ++k) rb.at(k) = b.at(n - k);
    YoungOdeSpec bwd = fwd;
    bwd.driver = rb;
    bwd.x0 = Eigen::VectorXd::Constant(1, z.at(n));
    const GridPath w = solve_young(bwd);
    // O(h^{2 beta - 1}) with beta < H
    CHECK(std::abs(w.at(n) - 0.7) <= 5.0 * std::pow(1.0 / n, 2.0 * 0.7 - 1.0));
  }
}

TEST_CASE("residual stability: identical forcings give zero deviation") {
  TimeGrid g(0.0, 1.0, 512);
  StabilityCase c;
  c.F = [](double z) { return std::sin(z); };
  c.driver = sampled(g, [](double t) { return std::sin(4.0 * t); });
  c.Z = sampled(g, [](double t) { return 0.2 * std::cos(2.0 * t); });
  c.Zbar = c.Z;
  CHECK(residual_stability_lhs(c) == 0.0);
}

TEST_CASE("residual stability: constant shifts satisfy the fitted bound, slope 1") {
  const double H = 0.75;
  const std::size_t n = 1 << 10;
  TimeGrid g(0.0, 1.0, n);
  FbmEnsemble ens = sample_fbm(H, g, 8, 1, 68, 1);

  auto make_case = [&](const GridPath& b, double shift, double freq) {
    StabilityCase c;
    c.F = [](double z) { return std::sin(z); };
    c.driver = b;
    c.Z = GridPath(g, 1);
    for (std::size_t k = 0; k <= n; ++k) c.Z.at(k) = 0.3 * std::cos(freq * g.point(k));
    c.Zbar = c.Z;
    for (std::size_t k = 0; k <= n; ++k) c.Zbar.at(k) += shift * std::sin(freq * g.point(k) + 0.3);
    c.alpha = 0.45;
    c.beta = 0.7;
    return c;
  };

  // calibration on paths 0..3, validation on 4..7
  std::vector<StabilityCase> calib;
  for (int i = 0; i < 4; ++i) calib.push_back(make_case(ens.paths[i], 0.05, 2.0 + i));
  const double C = fit_stability_constant(calib);
  CHECK(C > 0.0);

  for (int i = 4; i < 8; ++i) {
    for (double shift : {1e-3, 1e-2, 1e-1}) {
      const CheckVerdict v = residual_stability_check(make_case(ens.paths[i], shift, 3.5), 1.75 * C);
      CHECK(v.pass);
      CHECK(v.to_json().find("\"pass\":true") != std::string::npos);
    }
  }

  // lhs -> 0 linearly in |Z - Zbar|_alpha
  std::vector<double> dz, lhs;
  for (double shift : {1e-3, 3e-3, 1e-2, 3e-2, 1e-1}) {
    StabilityCase c = make_case(ens.paths[4], shift, 3.5);
    GridPath diff(g, 1);
    for (std::size_t k = 0; k <= n; ++k) diff.at(k) = c.Z.at(k) - c.Zbar.at(k);
    dz.push_back(holder_seminorm(diff, c.alpha).value);
    lhs.push_back(residual_stability_lhs(c));
  }
  CHECK(std::abs(fit_loglog(dz, lhs).slope - 1.0) <= 0.1);
}

TEST_CASE("composition bound: trivial and linear cases") {
  TimeGrid g(0.0, 1.0, 256);
  CompositionCase c;
  c.F = [](double z) { return 2.0 * z; };
  c.dF_inf = 2.0;
  c.d2F_inf = 0.0;
  c.x = sampled(g, [](double t) { return std::sin(6.0 * t); });
  c.y = c.x;
  CHECK(composition_lhs(c) == 0.0);

  for (std::size_t k = 0; k <= 256; ++k) c.y.at(k) = c.x.at(k) + 0.1 * std::cos(3.0 * g.point(k));
  // linear F: |F(x)-F(y)|_alpha = 2 |x-y|_alpha exactly, second term absent
  GridPath diff(g, 1);
  for (std::size_t k = 0; k <= 256; ++k) diff.at(k) = c.x.at(k) - c.y.at(k);
  CHECK(composition_lhs(c) ==
        doctest::Approx(2.0 * holder_seminorm(diff, c.alpha).value).epsilon(1e-12));
}

TEST_CASE("composition bound: F = sin over random fBm pairs with one constant") {
  const double H = 0.75;
  TimeGrid g(0.0, 1.0, 256);
  FbmEnsemble ens = sample_fbm(H, g, 200, 1, 69, 2);
  auto make_case = [&](const GridPath& x, const GridPath& y) {
    CompositionCase c;
    c.F = [](double z) { return std::sin(z); };
    c.dF_inf = 1.0;
    c.d2F_inf = 1.0;
    c.x = x;
    c.y = y;
    return c;
  };
  std::vector<CompositionCase> calib;
  for (int i = 0; i < 50; ++i) calib.push_back(make_case(ens.paths[2 * i], ens.paths[2 * i + 1]));
  const double C = fit_composition_constant(calib);
  for (int i = 50; i < 100; ++i) {
    const CheckVerdict v =
        composition_bound_check(make_case(ens.paths[2 * i], ens.paths[2 * i + 1]), 1.5 * C);
    CHECK(v.pass);
  }
}
