// Copyright 2026 Marmokit Contributors
// SPDX-License-Identifier: Apache-2.0

#include "marmo/embeddings.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "marmo/errors.hpp"

namespace marmo {

namespace {

constexpr char kMagic[4] = {'E', 'M', 'B', '1'};

uint32_t read_u32le(const unsigned char* p) {
    return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
           (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

int layer_from_path(const std::string& path) {
    const auto pos = path.rfind(".layer");
    if (pos == std::string::npos) return -1;
    const auto start = pos + 6;
    auto end = start;
    while (end < path.size() && std::isdigit(static_cast<unsigned char>(path[end]))) ++end;
    if (end == start) return -1;
    return std::stoi(path.substr(start, end - start));
}

} // namespace

EmbeddingSequence load_embeddings(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open embedding file: " + path);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (bytes.size() < 12) throw DataError("truncated embedding header: " + path);
    if (std::memcmp(bytes.data(), kMagic, 4) != 0) {
        throw DataError("bad magic in embedding file: " + path);
    }
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
    const uint32_t n_frames = read_u32le(p + 4);
    const uint32_t dim = read_u32le(p + 8);
    if (n_frames == 0 || dim == 0) throw DataError("empty embedding matrix: " + path);

    const std::size_t want = static_cast<std::size_t>(n_frames) * dim * 4;
    if (bytes.size() - 12 < want) throw DataError("truncated embedding payload: " + path);

    EmbeddingSequence e;
    e.n_frames = n_frames;
    e.dim = dim;
    e.layer_index = layer_from_path(path);
    e.frames.resize(static_cast<std::size_t>(n_frames) * dim);
    for (std::size_t i = 0; i < e.frames.size(); ++i) {
        const uint32_t u = read_u32le(p + 12 + i * 4);
        const float f = std::bit_cast<float>(u);
        if (!std::isfinite(f)) {
            throw DataError("non-finite value in embedding file: " + path);
        }
        e.frames[i] = f;
    }
    return e;
}

void write_embeddings(const std::string& path, const EmbeddingSequence& e) {
    if (e.n_frames == 0 || e.dim == 0 || e.frames.size() != e.n_frames * e.dim) {
        throw DataError("inconsistent embedding matrix for write: " + path);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open for write: " + path);
    out.write(kMagic, 4);
    const auto put_u32 = [&out](uint32_t v) {
        unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                              static_cast<unsigned char>((v >> 8) & 0xff),
                              static_cast<unsigned char>((v >> 16) & 0xff),
                              static_cast<unsigned char>((v >> 24) & 0xff)};
        out.write(reinterpret_cast<const char*>(b), 4);
    };
    put_u32(static_cast<uint32_t>(e.n_frames));
    put_u32(static_cast<uint32_t>(e.dim));
    for (float f : e.frames) {
        const uint32_t u = std::bit_cast<uint32_t>(f);
        unsigned char b[4] = {static_cast<unsigned char>(u & 0xff),
                              static_cast<unsigned char>((u >> 8) & 0xff),
                              static_cast<unsigned char>((u >> 16) & 0xff),
                              static_cast<unsigned char>((u >> 24) & 0xff)};
        out.write(reinterpret_cast<const char*>(b), 4);
    }
    if (!out) throw DataError("write failure: " + path);
}

std::string embedding_filename(const std::string& segment_id, int layer) {
    return segment_id + ".layer" + std::to_string(layer) + ".emb";
}

PooledEmbedding pool_stats(const EmbeddingSequence& e) {
    if (e.n_frames == 0 || e.dim == 0) throw DataError("pool_stats: empty embedding sequence");
    PooledEmbedding out;
    out.source_layer = e.layer_index;
    out.values.assign(2 * e.dim, 0.0);

    const double inv_n = 1.0 / static_cast<double>(e.n_frames);
    for (std::size_t f = 0; f < e.n_frames; ++f) {
        for (std::size_t d = 0; d < e.dim; ++d) {
            out.values[d] += static_cast<double>(e.at(f, d));
        }
    }
    for (std::size_t d = 0; d < e.dim; ++d) out.values[d] *= inv_n;

    for (std::size_t f = 0; f < e.n_frames; ++f) {
        for (std::size_t d = 0; d < e.dim; ++d) {
            const double diff = static_cast<double>(e.at(f, d)) - out.values[d];
            out.values[e.dim + d] += diff * diff;
        }
    }
    for (std::size_t d = 0; d < e.dim; ++d) {
        out.values[e.dim + d] = std::sqrt(out.values[e.dim + d] * inv_n);
    }
    return out;
}

} // namespace marmo
