// Copyright 2026 Marmokit Contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace marmo {

/// Frame-level embedding sequence (N x D, row-major float32 on disk).
/// layer_index 0 is the convolutional encoder output; 1..12 are the
/// transformer layers of the upstream model.
struct EmbeddingSequence {
    std::vector<float> frames; // n_frames * dim, row-major
    std::size_t n_frames = 0;
    std::size_t dim = 0;
    int layer_index = -1;

    float at(std::size_t frame, std::size_t d) const { return frames[frame * dim + d]; }
};

/// Utterance-level pooled vector: [per-dim mean | per-dim population std],
/// length 2 * dim.
struct PooledEmbedding {
    std::vector<double> values;
    int source_layer = -1;
};

/// Binary embedding file layout (little-endian):
///   magic "EMB1" | u32 n_frames | u32 dim | n_frames*dim float32 row-major
/// The layer index is recovered from the `<segment>.layer<k>.emb` filename
/// when present. Throws DataError on bad magic, truncated payloads, or
/// non-finite values.
EmbeddingSequence load_embeddings(const std::string& path);

void write_embeddings(const std::string& path, const EmbeddingSequence& e);

/// Canonical per-segment-per-layer filename: `<segment_id>.layer<k>.emb`.
std::string embedding_filename(const std::string& segment_id, int layer);

/// Mean and population standard deviation over the frame axis, concatenated.
/// A single frame yields a zero std half. Throws DataError on an empty
/// sequence.
PooledEmbedding pool_stats(const EmbeddingSequence& e);

} // namespace marmo
