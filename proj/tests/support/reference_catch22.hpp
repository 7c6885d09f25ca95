// Independent brute-force implementation of the 24 features, written
// directly from the pinned definitions (see core/src/catch24.cpp header
// comment). Used as the oracle for the production extractor: direct O(n^2)
// autocorrelations, naive DFTs, and literal definition-by-definition code
// instead of the FFT-accelerated production path.

#pragma once

#include <array>
#include <span>
#include <vector>

namespace reference {

struct RefFeatures {
    std::array<double, 24> values{};
    std::array<bool, 24> nan_mask{};
};

RefFeatures compute_reference_catch24(std::span<const double> series);

// brute-force biased autocorrelation with the global mean, lags 0..n-1
std::vector<double> acf_brute(std::span<const double> x);

} // namespace reference
