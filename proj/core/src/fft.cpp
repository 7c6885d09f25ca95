// Copyright 2026 Marmokit Contributors
// SPDX-License-Identifier: Apache-2.0

#include "marmo/fft.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace marmo::fft {

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

void transform(std::vector<std::complex<double>>& a, bool inverse) {
    const std::size_t n = a.size();
    if (n == 0 || (n & (n - 1)) != 0) {
        throw std::invalid_argument("fft::transform: size must be a power of two");
    }
    // bit-reversal permutation
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = 2.0 * std::numbers::pi / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
        const std::complex<double> wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const std::complex<double> u = a[i + k];
                const std::complex<double> v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
    if (inverse) {
        const double inv_n = 1.0 / static_cast<double>(n);
        for (auto& c : a) c *= inv_n;
    }
}

std::vector<double> autocorrelation(std::span<const double> x) {
    const std::size_t n = x.size();
    if (n == 0) return {};
    double m = 0.0;
    for (double v : x) m += v;
    m /= static_cast<double>(n);

    const std::size_t n_fft = next_pow2(n) << 1;
    std::vector<std::complex<double>> buf(n_fft, {0.0, 0.0});
    for (std::size_t i = 0; i < n; ++i) buf[i] = std::complex<double>(x[i] - m, 0.0);
    transform(buf, false);
    for (auto& c : buf) c = std::complex<double>(std::norm(c), 0.0);
    transform(buf, true);

    std::vector<double> acf(n);
    const double c0 = buf[0].real();
    if (c0 <= 0.0) {
        // constant series: define acf[0]=1, rest 0
        acf.assign(n, 0.0);
        acf[0] = 1.0;
        return acf;
    }
    for (std::size_t k = 0; k < n; ++k) acf[k] = buf[k].real() / c0;
    return acf;
}

std::vector<double> magnitude_spectrum(std::span<const double> x, std::size_t n_dft) {
    if (n_dft == 0 || (n_dft & (n_dft - 1)) != 0 || n_dft < x.size()) {
        throw std::invalid_argument("fft::magnitude_spectrum: bad n_dft");
    }
    std::vector<std::complex<double>> buf(n_dft, {0.0, 0.0});
    for (std::size_t i = 0; i < x.size(); ++i) buf[i] = std::complex<double>(x[i], 0.0);
    transform(buf, false);
    std::vector<double> mag(n_dft / 2 + 1);
    for (std::size_t k = 0; k < mag.size(); ++k) mag[k] = std::abs(buf[k]);
    return mag;
}

} // namespace marmo::fft
