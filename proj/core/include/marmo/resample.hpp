// Copyright 2026 Marmokit Contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "marmo/wav.hpp"

namespace marmo {

/// Windowed-sinc polyphase downsampler configuration.
///
/// filter_taps counts sinc taps per output sample measured at the target
/// rate, so for a conversion ratio r = source/target each output sample
/// sums over about filter_taps * r input samples. The low-pass cutoff sits
/// at cutoff_fraction of the target Nyquist. Defaults give ~70 dB stopband
/// rejection with a flat passband up to ~0.85 of the target Nyquist.
struct ResampleSpec {
    int target_rate = 16000;
    int filter_taps = 64;
    double cutoff_fraction = 0.9;
};

/// Resamples w to spec.target_rate. Output length is
/// round(n_in * target / source), so duration is preserved to within one
/// output sample. Equal-rate conversion returns the input sample-for-sample.
/// Upsampling is unsupported and throws DataError, as does a degenerate
/// input of fewer than two samples.
Waveform resample(const Waveform& w, const ResampleSpec& spec);

} // namespace marmo
