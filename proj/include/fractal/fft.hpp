#pragma once

#include <complex>
#include <cstddef>
#include <span>

namespace fractal {

// In-place iterative radix-2 FFT. The length must be a power of two (the
// circulant embedding always is). Hand-rolled rather than linked: the
// transform has to be bit-stable across worker counts and machines, and a
// fixed butterfly order guarantees that where planned libraries do not.
void fft_radix2(std::span<std::complex<double>> data, bool inverse = false);

bool is_power_of_two(std::size_t n);

// Smallest power of two >= n.
std::size_t next_power_of_two(std::size_t n);

}  // namespace fractal
