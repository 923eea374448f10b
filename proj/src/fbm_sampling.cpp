#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "fbmavg/fbm.hpp"
#include "fbmavg/fft.hpp"
#include "fbmavg/io.hpp"
#include "fbmavg/parallel.hpp"
#include "fbmavg/rng.hpp"
#include "json.hpp"

namespace fbmavg {

double fgn_autocovariance(double H, std::size_t lag) {
  const double k = static_cast<double>(lag);
  const double twoH = 2.0 * H;
  return 0.5 * (std::pow(k + 1.0, twoH) - 2.0 * std::pow(k, twoH) +
                std::pow(std::abs(k - 1.0), twoH));
}

namespace {

std::size_t next_pow2(std::size_t n) {
  std::size_t m = 1;
  while (m < n) m <<= 1;
  return m;
}

// Eigenvalues of the circulant embedding of the fGn covariance on m lags.
std::vector<double> circulant_eigenvalues(double H, std::size_t m) {
  const std::size_t M = 2 * m;
  std::vector<std::complex<double>> c(M);
  for (std::size_t j = 0; j <= m; ++j) c[j] = fgn_autocovariance(H, j);
  for (std::size_t j = m + 1; j < M; ++j) c[j] = c[M - j];
  fft_pow2(c, -1);
  std::vector<double> lambda(M);
  double max_l = 0.0;
  for (std::size_t k = 0; k < M; ++k) {
    lambda[k] = c[k].real();
    max_l = std::max(max_l, lambda[k]);
  }
  for (std::size_t k = 0; k < M; ++k) {
    if (lambda[k] < -1e-8 * max_l)
      throw std::logic_error("circulant embedding not nonnegative definite");
    lambda[k] = std::max(lambda[k], 0.0);
  }
  return lambda;
}

}  // namespace

FbmEnsemble sample_fbm(double H, const TimeGrid& grid, std::size_t n_paths, std::size_t dims,
                       std::uint64_t seed, int jobs) {
  if (!(H > 0.0 && H < 1.0)) throw std::invalid_argument("H must lie in (0,1)");
  if (n_paths == 0 || dims == 0) throw std::invalid_argument("need n_paths, dims >= 1");

  const std::size_t n = grid.n;
  const std::size_t m = next_pow2(n);
  const std::size_t M = 2 * m;
  const std::vector<double> lambda = circulant_eigenvalues(H, m);
  std::vector<double> amp(M);
  for (std::size_t k = 0; k < M; ++k) amp[k] = std::sqrt(lambda[k] / static_cast<double>(M));

  const double scale = std::pow(grid.spacing(), H);  // self-similarity: unit-lag fGn -> spacing h

  FbmEnsemble ens;
  ens.H = H;
  ens.grid = grid;
  ens.dims = dims;
  ens.seed = seed;
  ens.paths.assign(n_paths, GridPath(grid, dims));

  // One complex normal vector yields two independent fGn samples (real and
  // imaginary parts). Scalar component index = path * dims + d.
  const std::size_t total = n_paths * dims;
  const std::size_t pairs = (total + 1) / 2;

  parallel_for(pairs, jobs, [&](std::size_t pair) {
    RngStream rng(seed, {stream::kDriverB, pair});
    std::vector<std::complex<double>> z(M);
    for (std::size_t k = 0; k < M; ++k)
      z[k] = amp[k] * std::complex<double>(rng.normal(), rng.normal());
    fft_pow2(z, -1);
    for (int half = 0; half < 2; ++half) {
      const std::size_t comp = 2 * pair + static_cast<std::size_t>(half);
      if (comp >= total) break;
      GridPath& path = ens.paths[comp / dims];
      const std::size_t d = comp % dims;
      double acc = 0.0;
      path.at(0, d) = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        const double incr = (half == 0) ? z[k].real() : z[k].imag();
        acc += scale * incr;
        path.at(k + 1, d) = acc;
      }
    }
  });
  return ens;
}

void save_ensemble(const FbmEnsemble& ens, const std::string& directory) {
  namespace fs = std::filesystem;
  fs::create_directories(directory);
  nlohmann::json manifest{{"H", ens.H},         {"n", ens.grid.n},   {"n_paths", ens.paths.size()},
                          {"dims", ens.dims},   {"seed", ens.seed},  {"t0", ens.grid.t0},
                          {"t1", ens.grid.t1}};
  std::ofstream(directory + "/manifest.json") << manifest.dump(2) << "\n";
  for (std::size_t i = 0; i < ens.paths.size(); ++i)
    write_binary(ens.paths[i], directory + "/path_" + std::to_string(i) + ".gpth");
}

FbmEnsemble load_ensemble(const std::string& directory) {
  std::ifstream in(directory + "/manifest.json");
  if (!in) throw std::runtime_error("cannot open ensemble manifest in " + directory);
  nlohmann::json manifest = nlohmann::json::parse(in);
  FbmEnsemble ens;
  ens.H = manifest.at("H").get<double>();
  ens.dims = manifest.at("dims").get<std::size_t>();
  ens.seed = manifest.at("seed").get<std::uint64_t>();
  ens.grid = TimeGrid(manifest.at("t0").get<double>(), manifest.at("t1").get<double>(),
                      manifest.at("n").get<std::size_t>());
  const std::size_t n_paths = manifest.at("n_paths").get<std::size_t>();
  ens.paths.reserve(n_paths);
  for (std::size_t i = 0; i < n_paths; ++i)
    ens.paths.push_back(read_binary(directory + "/path_" + std::to_string(i) + ".gpth"));
  return ens;
}

}  // namespace fbmavg
