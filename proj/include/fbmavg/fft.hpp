#pragma once

#include <complex>
#include <vector>

namespace fbmavg {

// In-place radix-2 complex FFT. Size must be a power of two.
// sign = -1: forward (e^{-2*pi*i*jk/N}), sign = +1: inverse without the 1/N factor.
void fft_pow2(std::vector<std::complex<double>>& a, int sign);

}  // namespace fbmavg
