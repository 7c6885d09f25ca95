// Copyright 2026 Marmokit Contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "marmo/nnet.hpp"

namespace marmo::analysis {

/// First-layer filters of a trained waveform model: n_filters rows of
/// kernel taps, plus the audio rate they operate at.
struct FilterBank {
    std::vector<std::vector<double>> filters;
    int sample_rate = 0;
};

/// Extracts the first conv layer of a waveform model.
/// Throws DataError for feature models.
FilterBank first_layer_filters(const nnet::Model& model);

/// One-sided magnitude spectrum of the taps zero-padded to n_dft points
/// (n_dft/2 + 1 values). Throws DataError for empty filters or taps longer
/// than n_dft.
std::vector<double> filter_response(std::span<const double> taps, int n_dft = 2048);

/// Sum over filters of each magnitude spectrum divided by its own L2 norm
/// (norm taken over the one-sided magnitude vector). freq_hz spans
/// [0, sample_rate/2]. Throws NumericError for a zero-energy filter
/// (reported with its index).
struct CumulativeResponse {
    std::vector<double> magnitude;
    std::vector<double> freq_hz;
};
CumulativeResponse cumulative_response(const FilterBank& bank, int n_dft = 2048);

/// Layer-probe score grid: one row per task, one column per layer (0..12),
/// plus a per-row min-max normalization to [0, 1]. Constant rows normalize
/// to all zeros and are flagged.
struct LayerMatrix {
    std::vector<std::string> task_names;
    std::vector<std::vector<double>> raw_uar;
    std::vector<std::vector<double>> normalized;
    std::vector<std::uint8_t> constant_row;

    std::size_t n_layers() const { return raw_uar.empty() ? 0 : raw_uar.front().size(); }
};

LayerMatrix normalize_layer_matrix(std::vector<std::string> task_names,
                                   std::vector<std::vector<double>> raw_uar);

/// CSV with columns freq_hz,magnitude (one row per DFT bin).
void export_response_csv(const CumulativeResponse& r, const std::string& path);
/// CSV with one row per task: task,layer0,...,layerN for raw and normalized.
void export_layer_matrix_csv(const LayerMatrix& m, const std::string& path);

/// Simple SVG renderings of the same data (line plot / heat map).
void export_response_svg(const CumulativeResponse& r, const std::string& path);
void export_layer_matrix_svg(const LayerMatrix& m, const std::string& path);

} // namespace marmo::analysis
