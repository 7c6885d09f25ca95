// Copyright 2026 Marmokit Contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace marmo {

/// Mono waveform. Samples are real-valued; decoding 16-bit PCM yields
/// values in [-1, 1] (divide by 32768).
struct Waveform {
    std::vector<double> samples;
    int sample_rate = 0;

    std::size_t size() const { return samples.size(); }
    double duration_s() const {
        return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
    }
    bool operator==(const Waveform&) const = default;
};

struct WavInfo {
    int source_channels = 0;
    int bits_per_sample = 0;
    bool ieee_float = false;
};

/// Reads a RIFF WAV file (PCM 16-bit or IEEE float 32-bit, any rate).
/// Multichannel input keeps channel 0 only; the caller can inspect
/// info->source_channels to warn about dropped channels.
/// Throws DataError on unreadable files, unsupported encodings, or
/// zero-length audio.
Waveform read_wav(const std::string& path, WavInfo* info = nullptr);

/// Writes mono 16-bit PCM. Samples are clamped to [-1, 1] and quantized
/// by round(x * 32768).
void write_wav16(const std::string& path, const Waveform& w);

/// Cuts [start_s, end_s) out of w. The result has
/// round((end_s - start_s) * sample_rate) samples starting at
/// round(start_s * sample_rate).
/// Throws DataError for inverted or out-of-range intervals.
Waveform slice_segment(const Waveform& w, double start_s, double end_s);

} // namespace marmo
