// Copyright 2026 Marmokit Contributors
// SPDX-License-Identifier: Apache-2.0

#include "marmo/wav.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "marmo/errors.hpp"

namespace marmo {

namespace {

constexpr uint16_t kFormatPcm = 1;
constexpr uint16_t kFormatIeeeFloat = 3;

uint32_t read_u32(const unsigned char* p) {
    return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
           (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

uint16_t read_u16(const unsigned char* p) {
    return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

void put_u32(std::string& out, uint32_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
    out.push_back(static_cast<char>((v >> 16) & 0xff));
    out.push_back(static_cast<char>((v >> 24) & 0xff));
}

void put_u16(std::string& out, uint16_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
}

} // namespace

Waveform read_wav(const std::string& path, WavInfo* info) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open WAV file: " + path);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw DataError("read failure on WAV file: " + path);
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
    const std::size_t n = bytes.size();

    if (n < 12 || std::memcmp(p, "RIFF", 4) != 0 || std::memcmp(p + 8, "WAVE", 4) != 0) {
        throw DataError("not a RIFF/WAVE file: " + path);
    }

    uint16_t format = 0, channels = 0, bits = 0;
    uint32_t rate = 0;
    const unsigned char* data = nullptr;
    std::size_t data_len = 0;
    bool have_fmt = false;

    // chunk walk; tolerate extra chunks like LIST or fact
    std::size_t pos = 12;
    while (pos + 8 <= n) {
        const char* id = bytes.data() + pos;
        const uint32_t len = read_u32(p + pos + 4);
        const std::size_t body = pos + 8;
        if (body + len > n) {
            // truncated chunk; only fatal if we still need it
            if (std::memcmp(id, "data", 4) == 0) throw DataError("truncated data chunk: " + path);
            break;
        }
        if (std::memcmp(id, "fmt ", 4) == 0) {
            if (len < 16) throw DataError("malformed fmt chunk: " + path);
            format = read_u16(p + body);
            channels = read_u16(p + body + 2);
            rate = read_u32(p + body + 4);
            bits = read_u16(p + body + 14);
            have_fmt = true;
        } else if (std::memcmp(id, "data", 4) == 0) {
            data = p + body;
            data_len = len;
        }
        pos = body + len + (len & 1); // chunks are word-aligned
    }

    if (!have_fmt || data == nullptr) throw DataError("missing fmt or data chunk: " + path);
    if (channels < 1) throw DataError("zero channels: " + path);
    if (rate == 0) throw DataError("zero sample rate: " + path);

    const bool pcm16 = (format == kFormatPcm && bits == 16);
    const bool f32 = (format == kFormatIeeeFloat && bits == 32);
    if (!pcm16 && !f32) {
        throw DataError("unsupported WAV encoding (want PCM16 or float32): " + path);
    }

    const std::size_t bytes_per_sample = bits / 8;
    const std::size_t frame_bytes = bytes_per_sample * channels;
    const std::size_t frames = data_len / frame_bytes;
    if (frames == 0) throw DataError("zero-length audio: " + path);

    Waveform w;
    w.sample_rate = static_cast<int>(rate);
    w.samples.resize(frames);
    if (pcm16) {
        for (std::size_t i = 0; i < frames; ++i) {
            const unsigned char* sp = data + i * frame_bytes;
            const int16_t v = static_cast<int16_t>(sp[0] | (sp[1] << 8));
            w.samples[i] = static_cast<double>(v) / 32768.0;
        }
    } else {
        for (std::size_t i = 0; i < frames; ++i) {
            const unsigned char* sp = data + i * frame_bytes;
            uint32_t u = read_u32(sp);
            float f = std::bit_cast<float>(u);
            if (!std::isfinite(f)) throw DataError("non-finite sample in WAV: " + path);
            w.samples[i] = static_cast<double>(f);
        }
    }

    if (info) {
        info->source_channels = channels;
        info->bits_per_sample = bits;
        info->ieee_float = f32;
    }
    return w;
}

void write_wav16(const std::string& path, const Waveform& w) {
    if (w.samples.empty()) throw DataError("refusing to write empty waveform: " + path);
    if (w.sample_rate <= 0) throw DataError("invalid sample rate for WAV write: " + path);

    const uint32_t data_len = static_cast<uint32_t>(w.samples.size() * 2);
    std::string out;
    out.reserve(44 + data_len);
    out += "RIFF";
    put_u32(out, 36 + data_len);
    out += "WAVE";
    out += "fmt ";
    put_u32(out, 16);
    put_u16(out, kFormatPcm);
    put_u16(out, 1); // mono
    put_u32(out, static_cast<uint32_t>(w.sample_rate));
    put_u32(out, static_cast<uint32_t>(w.sample_rate) * 2);
    put_u16(out, 2);  // block align
    put_u16(out, 16); // bits
    out += "data";
    put_u32(out, data_len);
    for (double x : w.samples) {
        double v = std::clamp(x, -1.0, 1.0);
        long q = std::lround(v * 32768.0);
        q = std::clamp(q, -32768L, 32767L);
        put_u16(out, static_cast<uint16_t>(static_cast<int16_t>(q)));
    }

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw DataError("cannot open for write: " + path);
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw DataError("write failure: " + path);
}

Waveform slice_segment(const Waveform& w, double start_s, double end_s) {
    if (w.sample_rate <= 0 || w.samples.empty()) throw DataError("slice of empty waveform");
    if (!(start_s >= 0.0) || !(end_s > start_s)) {
        throw DataError("invalid slice interval [" + std::to_string(start_s) + ", " +
                        std::to_string(end_s) + ")");
    }
    const double sr = static_cast<double>(w.sample_rate);
    const auto n = static_cast<long long>(w.samples.size());
    const long long start = std::llround(start_s * sr);
    long long count = std::llround((end_s - start_s) * sr);
    if (start >= n) throw DataError("slice start beyond end of audio");
    // allow one sample of slack: resampling preserves duration only to
    // within one output sample, so segment end times may overshoot by that
    if (end_s * sr > static_cast<double>(n) + 1.0) {
        throw DataError("slice end beyond end of audio");
    }
    if (start + count > n) count = n - start; // rounding collision at the boundary
    if (count <= 0) throw DataError("slice shorter than one sample");

    Waveform out;
    out.sample_rate = w.sample_rate;
    out.samples.assign(w.samples.begin() + start, w.samples.begin() + start + count);
    return out;
}

} // namespace marmo
