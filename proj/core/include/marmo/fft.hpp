// Copyright 2026 Marmokit Contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace marmo::fft {

/// Smallest power of two >= n (n >= 1).
std::size_t next_pow2(std::size_t n);

/// In-place iterative radix-2 transform. a.size() must be a power of two.
/// The inverse transform includes the 1/N scaling.
void transform(std::vector<std::complex<double>>& a, bool inverse = false);

/// Autocorrelation of x normalized by lag 0, for lags 0..n-1.
/// Uses the biased estimator with the global series mean:
///   acf[k] = sum_i (x[i]-m)(x[i+k]-m) / sum_i (x[i]-m)^2
/// Computed via FFT with zero padding, so no circular wrap-around.
std::vector<double> autocorrelation(std::span<const double> x);

/// One-sided magnitude spectrum of x zero-padded to n_dft points
/// (n_dft/2 + 1 values). n_dft must be a power of two and >= x.size().
std::vector<double> magnitude_spectrum(std::span<const double> x, std::size_t n_dft);

} // namespace marmo::fft
