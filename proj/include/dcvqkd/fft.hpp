#pragma once

#include <complex>
#include <span>
#include <vector>

namespace dcvqkd::fft {

/// Forward DFT, X_k = sum_n x_n exp(-2 pi i k n / N), unnormalized.
std::vector<std::complex<double>> forward(std::span<const std::complex<double>> x);

/// Inverse DFT including the 1/N factor, so inverse(forward(x)) == x.
std::vector<std::complex<double>> inverse(std::span<const std::complex<double>> x);

/// Angular frequency 2 pi f_k (rad/s) of each forward() bin for spacing dt,
/// in the usual wrap-around order (0, 1, ..., N/2 - 1, -N/2, ..., -1) / (N dt).
std::vector<double> angular_frequencies(std::size_t n, double dt);

/// Smallest size >= n whose only prime factors are 2, 3 and 5.
std::size_t good_size(std::size_t n);

} // namespace dcvqkd::fft
