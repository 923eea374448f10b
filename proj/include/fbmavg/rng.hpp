#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace fbmavg {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Named sub-stream ids so that (seed, purpose, index...) always maps to the
// same stream regardless of evaluation order or parallelism degree.
namespace stream {
constexpr std::uint64_t kDriverB = 0x11;
constexpr std::uint64_t kWiener = 0x22;
constexpr std::uint64_t kFastInit = 0x33;
constexpr std::uint64_t kChain = 0x44;
constexpr std::uint64_t kConditional = 0x55;
constexpr std::uint64_t kMisc = 0x66;
}  // namespace stream

// A deterministic random stream identified by (seed, id path). Streams with
// distinct id paths are statistically independent for Monte Carlo purposes.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::initializer_list<std::uint64_t> ids = {}) {
    std::uint64_t s = splitmix64(seed);
    for (std::uint64_t id : ids) s = splitmix64(s ^ splitmix64(id));
    std::seed_seq seq{static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(s >> 32),
                      static_cast<std::uint32_t>(splitmix64(s)),
                      static_cast<std::uint32_t>(splitmix64(s) >> 32)};
    gen_.seed(seq);
  }

  std::uint64_t next_u64() { return gen_(); }

  // Uniform on [0,1), 53-bit resolution.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller (implementation-independent, bit-stable
  // for a fixed libm).
  double normal() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    cached_ = r * std::sin(a);
    have_cached_ = true;
    return r * std::cos(a);
  }

 private:
  std::mt19937_64 gen_;
  double cached_ = 0.0;
  bool have_cached_ = false;
};

}  // namespace fbmavg
