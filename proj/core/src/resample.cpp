// Copyright 2026 Marmokit Contributors
// SPDX-License-Identifier: Apache-2.0

#include "marmo/resample.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

#include "marmo/errors.hpp"

namespace marmo {

namespace {

// Kaiser window beta for ~70 dB stopband: 0.1102 * (A - 8.7)
constexpr double kKaiserBeta = 6.7553;

double bessel_i0(double x) {
    // power series; converges quickly for the argument range used here
    double sum = 1.0, term = 1.0;
    const double half_x = x / 2.0;
    for (int k = 1; k < 64; ++k) {
        term *= (half_x / k) * (half_x / k);
        sum += term;
        if (term < sum * 1e-18) break;
    }
    return sum;
}

double kaiser(double t) { // t in [-1, 1]
    const double arg = 1.0 - t * t;
    if (arg <= 0.0) return 0.0;
    return bessel_i0(kKaiserBeta * std::sqrt(arg)) / bessel_i0(kKaiserBeta);
}

double sinc(double x) {
    if (x == 0.0) return 1.0;
    const double px = std::numbers::pi * x;
    return std::sin(px) / px;
}

} // namespace

Waveform resample(const Waveform& w, const ResampleSpec& spec) {
    if (w.sample_rate <= 0) throw DataError("resample: input has no sample rate");
    if (spec.target_rate <= 0) throw DataError("resample: target rate must be positive");
    if (spec.target_rate == w.sample_rate) return w;
    if (spec.target_rate > w.sample_rate) {
        throw DataError("resample: upsampling is unsupported (source " +
                        std::to_string(w.sample_rate) + " Hz, target " +
                        std::to_string(spec.target_rate) + " Hz)");
    }
    if (w.samples.size() < 2) throw DataError("resample: input shorter than two samples");
    if (spec.filter_taps < 8) throw DataError("resample: filter_taps too small");
    if (!(spec.cutoff_fraction > 0.0) || spec.cutoff_fraction > 1.0) {
        throw DataError("resample: cutoff_fraction must be in (0, 1]");
    }

    const long g = std::gcd(w.sample_rate, spec.target_rate);
    const long up = spec.target_rate / g;   // L
    const long down = w.sample_rate / g;    // M
    const double ratio = static_cast<double>(down) / static_cast<double>(up); // > 1

    // prototype low-pass, designed in input-sample units
    const double cutoff = spec.cutoff_fraction * 0.5 / ratio; // cycles per input sample
    const double half_width = 0.5 * spec.filter_taps * ratio; // input samples per side
    const long half = static_cast<long>(std::ceil(half_width));
    const long taps_per_phase = 2 * half + 1;

    // per-phase tap tables; phase p covers fractional offset p/up.
    // Taps are normalized to unit DC gain per phase.
    std::vector<std::vector<double>> phase_taps(static_cast<std::size_t>(up));
    for (long p = 0; p < up; ++p) {
        auto& taps = phase_taps[static_cast<std::size_t>(p)];
        taps.resize(static_cast<std::size_t>(taps_per_phase));
        const double frac = static_cast<double>(p) / static_cast<double>(up);
        double sum = 0.0;
        for (long j = -half; j <= half; ++j) {
            const double u = static_cast<double>(j) - frac; // input-sample offset from ideal time
            const double t = 2.0 * cutoff * sinc(2.0 * cutoff * u) * kaiser(u / half_width);
            taps[static_cast<std::size_t>(j + half)] = t;
            sum += t;
        }
        if (sum > 0.0) {
            for (auto& t : taps) t /= sum;
        }
    }

    const auto n_in = static_cast<long long>(w.samples.size());
    const auto n_out = static_cast<long long>(
        std::llround(static_cast<double>(n_in) * up / static_cast<double>(down)));

    Waveform out;
    out.sample_rate = spec.target_rate;
    out.samples.resize(static_cast<std::size_t>(n_out));
    for (long long m = 0; m < n_out; ++m) {
        const long long pos = m * down;           // input time = pos / up
        const long long n0 = pos / up;
        const long phase = static_cast<long>(pos % up);
        const auto& taps = phase_taps[static_cast<std::size_t>(phase)];
        double acc = 0.0;
        const long long lo = n0 - half;
        for (long j = 0; j < taps_per_phase; ++j) {
            const long long i = lo + j;
            if (i < 0 || i >= n_in) continue; // zero padding outside the signal
            acc += w.samples[static_cast<std::size_t>(i)] * taps[static_cast<std::size_t>(j)];
        }
        out.samples[static_cast<std::size_t>(m)] = acc;
    }
    return out;
}

} // namespace marmo
