// Copyright 2026 Marmokit Contributors
// SPDX-License-Identifier: Apache-2.0

#include "marmo/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "marmo/errors.hpp"
#include "marmo/fft.hpp"

namespace marmo::analysis {

FilterBank first_layer_filters(const nnet::Model& model) {
    const auto* conv = model.first_conv();
    if (conv == nullptr) throw DataError("first_layer_filters: model has no conv layers");
    FilterBank bank;
    bank.sample_rate = std::get<nnet::CNNSpec>(model.spec()).sample_rate;
    bank.filters.resize(static_cast<std::size_t>(conv->out_channels));
    // first layer consumes one input channel: weight rows are plain taps
    for (int f = 0; f < conv->out_channels; ++f) {
        const double* row = conv->weight.data.data() + static_cast<std::size_t>(f) * conv->kernel;
        bank.filters[static_cast<std::size_t>(f)].assign(row, row + conv->kernel);
    }
    return bank;
}

std::vector<double> filter_response(std::span<const double> taps, int n_dft) {
    if (taps.empty()) throw DataError("filter_response: empty filter");
    if (static_cast<int>(taps.size()) > n_dft) {
        throw DataError("filter_response: taps longer than DFT size");
    }
    return fft::magnitude_spectrum(taps, static_cast<std::size_t>(n_dft));
}

CumulativeResponse cumulative_response(const FilterBank& bank, int n_dft) {
    if (bank.filters.empty()) throw DataError("cumulative_response: empty filter bank");
    const std::size_t n_bins = static_cast<std::size_t>(n_dft) / 2 + 1;
    CumulativeResponse out;
    out.magnitude.assign(n_bins, 0.0);
    for (std::size_t f = 0; f < bank.filters.size(); ++f) {
        const auto mag = filter_response(bank.filters[f], n_dft);
        double norm_sq = 0.0;
        for (double m : mag) norm_sq += m * m;
        if (!(norm_sq > 0.0)) {
            throw NumericError("cumulative_response: filter " + std::to_string(f) +
                               " has zero energy");
        }
        const double inv_norm = 1.0 / std::sqrt(norm_sq);
        for (std::size_t k = 0; k < n_bins; ++k) out.magnitude[k] += mag[k] * inv_norm;
    }
    out.freq_hz.resize(n_bins);
    for (std::size_t k = 0; k < n_bins; ++k) {
        out.freq_hz[k] = static_cast<double>(bank.sample_rate) * static_cast<double>(k) /
                         static_cast<double>(n_dft);
    }
    return out;
}

LayerMatrix normalize_layer_matrix(std::vector<std::string> task_names,
                                   std::vector<std::vector<double>> raw_uar) {
    if (raw_uar.empty() || task_names.size() != raw_uar.size()) {
        throw DataError("normalize_layer_matrix: task/row mismatch");
    }
    const std::size_t n_layers = raw_uar.front().size();
    if (n_layers < 2) throw DataError("normalize_layer_matrix: need at least two layers");
    for (const auto& row : raw_uar) {
        if (row.size() != n_layers) throw DataError("normalize_layer_matrix: ragged rows");
    }

    LayerMatrix m;
    m.task_names = std::move(task_names);
    m.raw_uar = std::move(raw_uar);
    m.normalized.resize(m.raw_uar.size());
    m.constant_row.assign(m.raw_uar.size(), 0);
    for (std::size_t t = 0; t < m.raw_uar.size(); ++t) {
        const auto& row = m.raw_uar[t];
        const auto [mn_it, mx_it] = std::minmax_element(row.begin(), row.end());
        auto& norm = m.normalized[t];
        norm.resize(n_layers);
        if (!(*mx_it > *mn_it)) {
            std::fill(norm.begin(), norm.end(), 0.0);
            m.constant_row[t] = 1;
            continue;
        }
        const double span = *mx_it - *mn_it;
        for (std::size_t l = 0; l < n_layers; ++l) norm[l] = (row[l] - *mn_it) / span;
    }
    return m;
}

namespace {

void write_or_throw(const std::string& path, const std::string& body) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("cannot open for write: " + path);
    out << body;
    if (!out) throw DataError("write failure: " + path);
}

std::string fmt_g(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

} // namespace

void export_response_csv(const CumulativeResponse& r, const std::string& path) {
    std::string body = "freq_hz,magnitude\n";
    for (std::size_t k = 0; k < r.magnitude.size(); ++k) {
        body += fmt_g(r.freq_hz[k]);
        body += ',';
        body += fmt_g(r.magnitude[k]);
        body += '\n';
    }
    write_or_throw(path, body);
}

void export_layer_matrix_csv(const LayerMatrix& m, const std::string& path) {
    std::string body = "task,kind";
    for (std::size_t l = 0; l < m.n_layers(); ++l) body += ",layer" + std::to_string(l);
    body += '\n';
    for (std::size_t t = 0; t < m.task_names.size(); ++t) {
        body += m.task_names[t] + ",raw";
        for (double v : m.raw_uar[t]) {
            body += ',';
            body += fmt_g(v);
        }
        body += '\n';
        body += m.task_names[t] + ",normalized";
        for (double v : m.normalized[t]) {
            body += ',';
            body += fmt_g(v);
        }
        body += '\n';
    }
    write_or_throw(path, body);
}

void export_response_svg(const CumulativeResponse& r, const std::string& path) {
    constexpr int w = 960, h = 360, margin = 50;
    double mx = 0.0;
    for (double v : r.magnitude) mx = std::max(mx, v);
    if (mx <= 0.0) mx = 1.0;
    const double fmax = r.freq_hz.empty() ? 1.0 : r.freq_hz.back();

    std::string body = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(w) +
                       "\" height=\"" + std::to_string(h) + "\">\n";
    body += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    body += "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1\" points=\"";
    for (std::size_t k = 0; k < r.magnitude.size(); ++k) {
        const double x = margin + (w - 2 * margin) * (r.freq_hz[k] / fmax);
        const double y = h - margin - (h - 2 * margin) * (r.magnitude[k] / mx);
        body += fmt_g(x) + "," + fmt_g(y) + " ";
    }
    body += "\"/>\n";
    body += "<line x1=\"" + std::to_string(margin) + "\" y1=\"" + std::to_string(h - margin) +
            "\" x2=\"" + std::to_string(w - margin) + "\" y2=\"" + std::to_string(h - margin) +
            "\" stroke=\"black\"/>\n";
    body += "<text x=\"" + std::to_string(w / 2) + "\" y=\"" + std::to_string(h - 12) +
            "\" text-anchor=\"middle\" font-size=\"12\">frequency (Hz, 0 to " + fmt_g(fmax) +
            ")</text>\n";
    body += "</svg>\n";
    write_or_throw(path, body);
}

void export_layer_matrix_svg(const LayerMatrix& m, const std::string& path) {
    const int cell = 40, label_w = 110;
    const auto n_layers = static_cast<int>(m.n_layers());
    const auto n_tasks = static_cast<int>(m.task_names.size());
    const int w = label_w + cell * n_layers + 20;
    const int h = 30 + cell * n_tasks + 20;

    std::string body = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(w) +
                       "\" height=\"" + std::to_string(h) + "\">\n";
    body += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (int t = 0; t < n_tasks; ++t) {
        body += "<text x=\"5\" y=\"" + std::to_string(30 + t * cell + cell / 2 + 4) +
                "\" font-size=\"12\">" + m.task_names[static_cast<std::size_t>(t)] + "</text>\n";
        for (int l = 0; l < n_layers; ++l) {
            const double v = m.normalized[static_cast<std::size_t>(t)][static_cast<std::size_t>(l)];
            const int shade = static_cast<int>(std::lround(255.0 * (1.0 - v)));
            body += "<rect x=\"" + std::to_string(label_w + l * cell) + "\" y=\"" +
                    std::to_string(30 + t * cell) + "\" width=\"" + std::to_string(cell) +
                    "\" height=\"" + std::to_string(cell) + "\" fill=\"rgb(" +
                    std::to_string(shade) + "," + std::to_string(shade) + ",255)\"/>\n";
        }
    }
    for (int l = 0; l < n_layers; ++l) {
        body += "<text x=\"" + std::to_string(label_w + l * cell + cell / 2) +
                "\" y=\"20\" text-anchor=\"middle\" font-size=\"11\">" + std::to_string(l) +
                "</text>\n";
    }
    body += "</svg>\n";
    write_or_throw(path, body);
}

} // namespace marmo::analysis
