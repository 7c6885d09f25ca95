// Copyright 2026 Marmokit Contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "marmo/wav.hpp"

namespace marmo::catch24 {

inline constexpr int kNumFeatures = 24;

/// Segments shorter than this are rejected; several of the canonical
/// characteristics are meaningless on very short series.
inline constexpr std::size_t kMinSeriesLength = 32;

/// Feature order is frozen: the 22 canonical time-series characteristics
/// in their published order, then raw-series mean, then raw-series
/// population standard deviation.
const std::array<std::string_view, kNumFeatures>& feature_names();

struct SeriesStats {
    double mean = 0.0;
    double stddev = 0.0; // population (divide by n)
    std::size_t n = 0;
};

SeriesStats series_stats(std::span<const double> x);

struct ZScoreResult {
    std::vector<double> values;
    bool degenerate = false; // constant input; values forced to zero
};

/// Centers to mean 0 and scales to population standard deviation 1.
/// Constant input yields all zeros with the degenerate flag set.
/// Throws DataError for series shorter than two samples.
ZScoreResult zscore_series(std::span<const double> x);

struct FeatureVector {
    std::array<double, kNumFeatures> values{};
    std::array<bool, kNumFeatures> nan_mask{}; // true = undefined, imputed 0
};

/// The 24-dimensional feature vector of a segment. The 22 canonical
/// characteristics are computed on the z-scored series, except the two
/// outlier-inclusion features which follow their canonical definition on
/// the unnormalized series; the last two entries are the raw mean and raw
/// population standard deviation. Undefined features are imputed to 0 and
/// flagged in nan_mask. Throws DataError for series shorter than
/// kMinSeriesLength or containing non-finite samples.
FeatureVector compute_catch24(std::span<const double> series);
FeatureVector compute_catch24(const Waveform& w);

} // namespace marmo::catch24
