// Copyright 2026 Marmokit Contributors
// SPDX-License-Identifier: Apache-2.0

#include "marmo/nnet.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <random>
#include <thread>

#include <Eigen/Dense>

#include "marmo/errors.hpp"
#include "marmo/eval.hpp"

namespace marmo::nnet {

namespace {

// All Eigen products run on Eigen-owned (consistently aligned) matrices and
// results are folded back with fixed-order scalar loops, so gradients are
// bit-reproducible no matter where the surrounding buffers landed on the heap.
using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapRowConst = Eigen::Map<const RowMat>;

void ensure_finite(std::span<const double> v, const char* what, std::size_t layer) {
    for (double x : v) {
        if (!std::isfinite(x)) {
            throw NumericError("non-finite activation in " + std::string(what) + " layer " +
                               std::to_string(layer));
        }
    }
}

// im2col: (in_ch * kernel) x out_len, column j = receptive field at output j
Eigen::MatrixXd im2col(std::span<const double> x, int in_ch, int len, int kernel, int stride,
                       int pad, int out_len) {
    Eigen::MatrixXd col(in_ch * kernel, out_len);
    for (int j = 0; j < out_len; ++j) {
        const int start = j * stride - pad;
        for (int c = 0; c < in_ch; ++c) {
            const double* xc = x.data() + static_cast<std::size_t>(c) * len;
            for (int t = 0; t < kernel; ++t) {
                const int i = start + t;
                col(c * kernel + t, j) = (i >= 0 && i < len) ? xc[i] : 0.0;
            }
        }
    }
    return col;
}

} // namespace

Tensor Tensor::zeros(std::vector<int> shape) {
    Tensor t;
    t.shape = std::move(shape);
    std::size_t n = 1;
    for (int d : t.shape) n *= static_cast<std::size_t>(d);
    t.data.assign(n, 0.0);
    return t;
}

// --- layer primitives ----------------------------------------------------------

namespace layers {

int Conv1d::output_length(int input_length) const {
    const int padded = input_length + 2 * pad;
    if (padded < kernel) return 0;
    return (padded - kernel) / stride + 1;
}

std::vector<double> Conv1d::forward(std::span<const double> x, int input_length) const {
    const int out_len = output_length(input_length);
    if (out_len <= 0) {
        throw DataError("conv1d: input of length " + std::to_string(input_length) +
                        " shorter than kernel " + std::to_string(kernel));
    }
    const int k_total = in_channels * kernel;
    const Eigen::MatrixXd col = im2col(x, in_channels, input_length, kernel, stride, pad, out_len);
    const Eigen::MatrixXd w = MapRowConst(weight.data.data(), out_channels, k_total);
    const Eigen::MatrixXd y = w * col;

    std::vector<double> out(static_cast<std::size_t>(out_channels) * out_len);
    for (int c = 0; c < out_channels; ++c) {
        const double b = bias.data[static_cast<std::size_t>(c)];
        double* row = out.data() + static_cast<std::size_t>(c) * out_len;
        for (int j = 0; j < out_len; ++j) row[j] = y(c, j) + b;
    }
    return out;
}

std::vector<double> Conv1d::backward(std::span<const double> x, int input_length,
                                     std::span<const double> d_out, Tensor& d_weight,
                                     Tensor& d_bias) const {
    const int out_len = output_length(input_length);
    const int k_total = in_channels * kernel;
    const Eigen::MatrixXd col = im2col(x, in_channels, input_length, kernel, stride, pad, out_len);
    const Eigen::MatrixXd dy = MapRowConst(d_out.data(), out_channels, out_len);

    const Eigen::MatrixXd dw = dy * col.transpose(); // (out_channels x k_total)
    for (int c = 0; c < out_channels; ++c) {
        double* grow = d_weight.data.data() + static_cast<std::size_t>(c) * k_total;
        for (int k = 0; k < k_total; ++k) grow[k] += dw(c, k);
        double acc = 0.0;
        const double* dyr = d_out.data() + static_cast<std::size_t>(c) * out_len;
        for (int j = 0; j < out_len; ++j) acc += dyr[j];
        d_bias.data[static_cast<std::size_t>(c)] += acc;
    }

    const Eigen::MatrixXd w = MapRowConst(weight.data.data(), out_channels, k_total);
    const Eigen::MatrixXd d_col = w.transpose() * dy; // (k_total x out_len)

    std::vector<double> d_x(static_cast<std::size_t>(in_channels) * input_length, 0.0);
    for (int j = 0; j < out_len; ++j) {
        const int start = j * stride - pad;
        for (int c = 0; c < in_channels; ++c) {
            double* dxc = d_x.data() + static_cast<std::size_t>(c) * input_length;
            for (int t = 0; t < kernel; ++t) {
                const int i = start + t;
                if (i >= 0 && i < input_length) dxc[i] += d_col(c * kernel + t, j);
            }
        }
    }
    return d_x;
}

std::vector<double> Dense::forward(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != in_dim) {
        throw DataError("dense: input dimension " + std::to_string(x.size()) + " != " +
                        std::to_string(in_dim));
    }
    std::vector<double> out(static_cast<std::size_t>(out_dim));
    for (int i = 0; i < out_dim; ++i) {
        const double* wrow = weight.data.data() + static_cast<std::size_t>(i) * in_dim;
        double acc = bias.data[static_cast<std::size_t>(i)];
        for (int j = 0; j < in_dim; ++j) acc += wrow[j] * x[static_cast<std::size_t>(j)];
        out[static_cast<std::size_t>(i)] = acc;
    }
    return out;
}

std::vector<double> Dense::backward(std::span<const double> x, std::span<const double> d_out,
                                    Tensor& d_weight, Tensor& d_bias) const {
    std::vector<double> d_x(static_cast<std::size_t>(in_dim), 0.0);
    for (int i = 0; i < out_dim; ++i) {
        const double g = d_out[static_cast<std::size_t>(i)];
        double* grow = d_weight.data.data() + static_cast<std::size_t>(i) * in_dim;
        const double* wrow = weight.data.data() + static_cast<std::size_t>(i) * in_dim;
        for (int j = 0; j < in_dim; ++j) {
            grow[j] += g * x[static_cast<std::size_t>(j)];
            d_x[static_cast<std::size_t>(j)] += g * wrow[j];
        }
        d_bias.data[static_cast<std::size_t>(i)] += g;
    }
    return d_x;
}

std::vector<double> relu(std::span<const double> x) {
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] > 0.0 ? x[i] : 0.0;
    return out;
}

std::vector<double> relu_backward(std::span<const double> x, std::span<const double> d_out) {
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] > 0.0 ? d_out[i] : 0.0;
    return out;
}

std::vector<double> global_avg_pool(std::span<const double> x, int channels, int length) {
    std::vector<double> out(static_cast<std::size_t>(channels));
    const double inv = 1.0 / static_cast<double>(length);
    for (int c = 0; c < channels; ++c) {
        double s = 0.0;
        const double* xc = x.data() + static_cast<std::size_t>(c) * length;
        for (int t = 0; t < length; ++t) s += xc[t];
        out[static_cast<std::size_t>(c)] = s * inv;
    }
    return out;
}

std::vector<double> global_avg_pool_backward(std::span<const double> d_out, int channels,
                                             int length) {
    std::vector<double> d_x(static_cast<std::size_t>(channels) * length);
    const double inv = 1.0 / static_cast<double>(length);
    for (int c = 0; c < channels; ++c) {
        const double g = d_out[static_cast<std::size_t>(c)] * inv;
        double* dxc = d_x.data() + static_cast<std::size_t>(c) * length;
        for (int t = 0; t < length; ++t) dxc[t] = g;
    }
    return d_x;
}

} // namespace layers

std::vector<double> adaptive_avg_pool(std::span<const double> feature_map, int channels,
                                      int length) {
    if (channels <= 0 || length <= 0 ||
        feature_map.size() != static_cast<std::size_t>(channels) * static_cast<std::size_t>(length)) {
        throw DataError("adaptive_avg_pool: empty or inconsistent feature map");
    }
    return layers::global_avg_pool(feature_map, channels, length);
}

LossGrad cross_entropy(std::span<const double> logits, int label) {
    const auto n = static_cast<int>(logits.size());
    if (label < 0 || label >= n) {
        throw DataError("cross_entropy: label " + std::to_string(label) + " out of range [0, " +
                        std::to_string(n) + ")");
    }
    double mx = -std::numeric_limits<double>::infinity();
    for (double v : logits) mx = std::max(mx, v);
    double z = 0.0;
    for (double v : logits) z += std::exp(v - mx);
    LossGrad out;
    out.loss = -(logits[static_cast<std::size_t>(label)] - mx - std::log(z));
    out.grad.resize(logits.size());
    for (int i = 0; i < n; ++i) {
        out.grad[static_cast<std::size_t>(i)] = std::exp(logits[static_cast<std::size_t>(i)] - mx) / z;
    }
    out.grad[static_cast<std::size_t>(label)] -= 1.0;
    return out;
}

// --- specs ------------------------------------------------------------------------

CNNSpec CNNSpec::for_rate(int sample_rate, int n_classes) {
    if (sample_rate <= 0) throw DataError("CNNSpec: sample rate must be positive");
    CNNSpec s;
    s.sample_rate = sample_rate;
    s.n_classes = n_classes;
    if (sample_rate >= 32000) {
        s.first_kernel_ms = 1.0;
        s.first_stride_ms = 0.05;
    } else {
        s.first_kernel_ms = 10.0;
        s.first_stride_ms = 0.5;
    }
    const auto k1 = std::max(1, static_cast<int>(std::lround(s.first_kernel_ms * sample_rate / 1000.0)));
    const auto d1 = std::max(1, static_cast<int>(std::lround(s.first_stride_ms * sample_rate / 1000.0)));
    s.conv = {
        {k1, d1, 128, 0},
        {10, 5, 256, 0},
        {4, 2, 512, 2},
        {3, 1, 512, 1},
    };
    return s;
}

int CNNSpec::min_input_samples() const {
    // walk the stack backwards: every layer needs at least one output frame
    int need = 1;
    for (auto it = conv.rbegin(); it != conv.rend(); ++it) {
        need = (need - 1) * it->stride + it->kernel - 2 * it->pad;
        need = std::max(need, 1);
    }
    return need;
}

// --- model -------------------------------------------------------------------------

bool Model::wave_input() const { return std::holds_alternative<CNNSpec>(spec_); }

int Model::n_classes() const {
    if (const auto* m = std::get_if<MLPSpec>(&spec_)) return m->n_classes;
    if (const auto* p = std::get_if<LinearProbeSpec>(&spec_)) return p->n_classes;
    return std::get<CNNSpec>(spec_).n_classes;
}

int Model::input_dim() const {
    if (const auto* m = std::get_if<MLPSpec>(&spec_)) return m->input_dim;
    if (const auto* p = std::get_if<LinearProbeSpec>(&spec_)) return p->input_dim;
    return -1;
}

const layers::Conv1d* Model::first_conv() const {
    return conv_.empty() ? nullptr : &conv_.front();
}

std::vector<Tensor*> Model::parameters() {
    std::vector<Tensor*> out;
    for (auto& c : conv_) {
        out.push_back(&c.weight);
        out.push_back(&c.bias);
    }
    for (auto& d : dense_) {
        out.push_back(&d.weight);
        out.push_back(&d.bias);
    }
    return out;
}

std::vector<const Tensor*> Model::parameters() const {
    std::vector<const Tensor*> out;
    for (const auto& c : conv_) {
        out.push_back(&c.weight);
        out.push_back(&c.bias);
    }
    for (const auto& d : dense_) {
        out.push_back(&d.weight);
        out.push_back(&d.bias);
    }
    return out;
}

void Model::set_standardizer(std::vector<double> mean, std::vector<double> stddev) {
    if (mean.size() != stddev.size()) throw DataError("standardizer: mean/std size mismatch");
    if (wave_input()) throw DataError("standardizer applies to feature models only");
    if (static_cast<int>(mean.size()) != input_dim()) {
        throw DataError("standardizer dimension != model input dimension");
    }
    standardizer_mean_ = std::move(mean);
    standardizer_std_ = std::move(stddev);
}

Model Model::init(const ModelSpec& spec, std::uint64_t seed) {
    Model m;
    m.spec_ = spec;
    std::mt19937_64 rng(seed);

    const auto he_uniform = [&rng](Tensor& w, int fan_in) {
        if (fan_in <= 0) throw DataError("init_model: zero-sized layer");
        const double a = std::sqrt(6.0 / static_cast<double>(fan_in));
        std::uniform_real_distribution<double> dist(-a, a);
        for (auto& v : w.data) v = dist(rng);
    };

    const auto add_dense = [&](int in_dim, int out_dim) {
        if (in_dim <= 0 || out_dim <= 0) throw DataError("init_model: zero-sized layer");
        layers::Dense d;
        d.in_dim = in_dim;
        d.out_dim = out_dim;
        d.weight = Tensor::zeros({out_dim, in_dim});
        d.bias = Tensor::zeros({out_dim});
        he_uniform(d.weight, in_dim);
        m.dense_.push_back(std::move(d));
    };

    if (const auto* mlp = std::get_if<MLPSpec>(&spec)) {
        int prev = mlp->input_dim;
        for (int h : mlp->hidden) {
            add_dense(prev, h);
            prev = h;
        }
        add_dense(prev, mlp->n_classes);
    } else if (const auto* probe = std::get_if<LinearProbeSpec>(&spec)) {
        add_dense(probe->input_dim, probe->n_classes);
    } else {
        const auto& cnn = std::get<CNNSpec>(spec);
        if (cnn.conv.empty()) throw DataError("init_model: CNN spec without conv layers");
        int in_ch = 1;
        for (const auto& cs : cnn.conv) {
            if (cs.kernel <= 0 || cs.out_channels <= 0 || cs.stride <= 0) {
                throw DataError("init_model: zero-sized conv layer");
            }
            layers::Conv1d c;
            c.in_channels = in_ch;
            c.out_channels = cs.out_channels;
            c.kernel = cs.kernel;
            c.stride = cs.stride;
            c.pad = cs.pad;
            c.weight = Tensor::zeros({cs.out_channels, in_ch, cs.kernel});
            c.bias = Tensor::zeros({cs.out_channels});
            he_uniform(c.weight, in_ch * cs.kernel);
            m.conv_.push_back(std::move(c));
            in_ch = cs.out_channels;
        }
        int prev = in_ch; // pooled vector length
        for (int h : cnn.fc_hidden) {
            add_dense(prev, h);
            prev = h;
        }
        add_dense(prev, cnn.n_classes);
    }
    return m;
}

// --- forward / backward ---------------------------------------------------------------

class ModelOps {
public:
    struct Cache {
        std::vector<std::vector<double>> conv_in;
        std::vector<int> conv_in_len;
        std::vector<std::vector<double>> conv_z;
        std::vector<int> conv_out_len;
        std::vector<double> pooled;
        int pool_len = 0;
        std::vector<std::vector<double>> fc_in;
        std::vector<std::vector<double>> fc_z;
    };

    static std::vector<double> standardize(const Model& m, std::span<const double> x) {
        std::vector<double> out(x.begin(), x.end());
        if (!m.standardizer_mean_.empty()) {
            for (std::size_t i = 0; i < out.size(); ++i) {
                const double s = m.standardizer_std_[i];
                // zero-variance feature carries no information
                out[i] = s > 1e-12 ? (out[i] - m.standardizer_mean_[i]) / s : 0.0;
            }
        }
        return out;
    }

    static std::vector<double> pad_wave(const Model& m, std::span<const double> wave) {
        const auto& cnn = std::get<CNNSpec>(m.spec_);
        const auto min_len = static_cast<std::size_t>(cnn.min_input_samples());
        if (wave.size() >= min_len) return std::vector<double>(wave.begin(), wave.end());
        std::vector<double> padded(min_len, 0.0);
        const std::size_t left = (min_len - wave.size()) / 2;
        std::copy(wave.begin(), wave.end(), padded.begin() + static_cast<long>(left));
        return padded;
    }

    static std::vector<double> forward(const Model& m, std::span<const double> input,
                                       Cache* cache) {
        std::vector<double> act;
        if (m.wave_input()) {
            if (input.empty()) throw DataError("forward: empty waveform");
            act = pad_wave(m, input);
            int len = static_cast<int>(act.size());
            int channels = 1;
            for (std::size_t i = 0; i < m.conv_.size(); ++i) {
                const auto& c = m.conv_[i];
                std::vector<double> z = c.forward(act, len);
                ensure_finite(z, "conv", i);
                const int out_len = c.output_length(len);
                if (cache) {
                    cache->conv_in.push_back(std::move(act));
                    cache->conv_in_len.push_back(len);
                    cache->conv_z.push_back(z);
                    cache->conv_out_len.push_back(out_len);
                }
                act = layers::relu(z);
                len = out_len;
                channels = c.out_channels;
            }
            act = layers::global_avg_pool(act, channels, len);
            if (cache) {
                cache->pooled = act;
                cache->pool_len = len;
            }
        } else {
            if (static_cast<int>(input.size()) != m.input_dim()) {
                throw DataError("forward: input dimension " + std::to_string(input.size()) +
                                " != model input dimension " + std::to_string(m.input_dim()));
            }
            act = standardize(m, input);
        }

        const std::size_t n_dense = m.dense_.size();
        for (std::size_t j = 0; j < n_dense; ++j) {
            std::vector<double> z = m.dense_[j].forward(act);
            ensure_finite(z, "dense", j);
            if (cache) {
                cache->fc_in.push_back(std::move(act));
                cache->fc_z.push_back(z);
            }
            if (j + 1 < n_dense) {
                act = layers::relu(z);
            } else {
                act = std::move(z);
            }
        }
        return act;
    }

    // d_logits -> parameter gradients, aligned with Model::parameters() order
    static void backward(const Model& m, const Cache& cache, std::span<const double> d_logits,
                         std::vector<Tensor>& grads) {
        const std::size_t n_conv = m.conv_.size();
        const std::size_t n_dense = m.dense_.size();

        std::vector<double> d = {d_logits.begin(), d_logits.end()};
        for (std::size_t j = n_dense; j-- > 0;) {
            Tensor& gw = grads[2 * (n_conv + j)];
            Tensor& gb = grads[2 * (n_conv + j) + 1];
            std::vector<double> dx = m.dense_[j].backward(cache.fc_in[j], d, gw, gb);
            if (j > 0) {
                d = layers::relu_backward(cache.fc_z[j - 1], dx);
            } else {
                d = std::move(dx);
            }
        }
        if (!m.wave_input()) return;

        const int channels = m.conv_.back().out_channels;
        std::vector<double> d_act =
            layers::global_avg_pool_backward(d, channels, cache.pool_len);
        for (std::size_t i = n_conv; i-- > 0;) {
            const std::vector<double> dz = layers::relu_backward(cache.conv_z[i], d_act);
            Tensor& gw = grads[2 * i];
            Tensor& gb = grads[2 * i + 1];
            d_act = m.conv_[i].backward(cache.conv_in[i], cache.conv_in_len[i], dz, gw, gb);
        }
    }
};

std::vector<double> Model::forward(std::span<const double> input) const {
    return ModelOps::forward(*this, input, nullptr);
}

// --- gradients -----------------------------------------------------------------------

namespace {

std::vector<Tensor> zero_grads_like(const Model& model) {
    std::vector<Tensor> grads;
    for (const Tensor* p : model.parameters()) grads.push_back(Tensor::zeros(p->shape));
    return grads;
}

double accumulate_gradients(const Model& model, const Dataset& data,
                            std::span<const std::size_t> indices, std::vector<Tensor>& grads) {
    double loss_sum = 0.0;
    for (const std::size_t idx : indices) {
        ModelOps::Cache cache;
        const std::vector<double> logits = ModelOps::forward(model, data.inputs[idx], &cache);
        const LossGrad lg = cross_entropy(logits, data.labels[idx]);
        loss_sum += lg.loss;
        ModelOps::backward(model, cache, lg.grad, grads);
    }
    return loss_sum;
}

} // namespace

double compute_gradients(const Model& model, const Dataset& data,
                         std::span<const std::size_t> indices, std::vector<Tensor>& grads,
                         int n_workers) {
    if (indices.empty()) throw DataError("compute_gradients: empty batch");
    if (data.labels.size() != data.inputs.size()) {
        throw DataError("compute_gradients: labels/inputs size mismatch");
    }
    grads = zero_grads_like(model);

    const int workers =
        std::max(1, std::min<int>(n_workers, static_cast<int>(indices.size())));
    double loss_sum = 0.0;
    if (workers == 1) {
        loss_sum = accumulate_gradients(model, data, indices, grads);
    } else {
        std::vector<std::vector<Tensor>> partial(static_cast<std::size_t>(workers));
        std::vector<double> partial_loss(static_cast<std::size_t>(workers), 0.0);
        std::vector<std::vector<std::size_t>> shard(static_cast<std::size_t>(workers));
        for (std::size_t i = 0; i < indices.size(); ++i) {
            shard[i % static_cast<std::size_t>(workers)].push_back(indices[i]);
        }
        std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&, w]() {
                try {
                    auto& g = partial[static_cast<std::size_t>(w)];
                    g = zero_grads_like(model);
                    partial_loss[static_cast<std::size_t>(w)] =
                        accumulate_gradients(model, data, shard[static_cast<std::size_t>(w)], g);
                } catch (...) {
                    errors[static_cast<std::size_t>(w)] = std::current_exception();
                }
            });
        }
        for (auto& t : pool) t.join();
        for (const auto& e : errors) {
            if (e) std::rethrow_exception(e);
        }
        // fixed reduction order keeps training bit-reproducible
        for (int w = 0; w < workers; ++w) {
            loss_sum += partial_loss[static_cast<std::size_t>(w)];
            for (std::size_t t = 0; t < grads.size(); ++t) {
                auto& dst = grads[t].data;
                const auto& src = partial[static_cast<std::size_t>(w)][t].data;
                for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
            }
        }
    }

    const double inv = 1.0 / static_cast<double>(indices.size());
    for (auto& g : grads) {
        for (auto& v : g.data) v *= inv;
    }
    return loss_sum * inv;
}

double compute_gradients(const Model& model, const Dataset& batch, std::vector<Tensor>& grads) {
    std::vector<std::size_t> idx(batch.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    return compute_gradients(model, batch, idx, grads, 1);
}

void adam_step(std::vector<Tensor*> params, const std::vector<Tensor>& grads, AdamState& state,
               double lr) {
    if (params.size() != grads.size()) throw DataError("adam_step: parameter/gradient count mismatch");
    if (state.m.empty()) {
        for (const Tensor* p : params) {
            state.m.push_back(Tensor::zeros(p->shape));
            state.v.push_back(Tensor::zeros(p->shape));
        }
    }
    if (state.m.size() != params.size()) throw DataError("adam_step: state size mismatch");
    state.step_count += 1;
    const double b1 = state.beta1, b2 = state.beta2;
    const double bc1 = 1.0 - std::pow(b1, static_cast<double>(state.step_count));
    const double bc2 = 1.0 - std::pow(b2, static_cast<double>(state.step_count));
    for (std::size_t t = 0; t < params.size(); ++t) {
        Tensor& p = *params[t];
        const Tensor& g = grads[t];
        if (!p.same_shape(g)) throw DataError("adam_step: shape mismatch at tensor " + std::to_string(t));
        auto& m = state.m[t].data;
        auto& v = state.v[t].data;
        for (std::size_t i = 0; i < p.data.size(); ++i) {
            m[i] = b1 * m[i] + (1.0 - b1) * g.data[i];
            v[i] = b2 * v[i] + (1.0 - b2) * g.data[i] * g.data[i];
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            p.data[i] -= lr * mhat / (std::sqrt(vhat) + state.epsilon);
        }
    }
}

std::vector<int> predict_batch(const Model& model, const std::vector<std::vector<double>>& inputs,
                               int n_workers) {
    std::vector<int> out(inputs.size(), 0);
    const int workers = std::max(1, std::min<int>(n_workers, static_cast<int>(inputs.size())));
    const auto run = [&](std::size_t begin, std::size_t step) {
        for (std::size_t i = begin; i < inputs.size(); i += step) {
            const auto logits = model.forward(inputs[i]);
            int best = 0;
            for (std::size_t c = 1; c < logits.size(); ++c) {
                if (logits[c] > logits[static_cast<std::size_t>(best)]) best = static_cast<int>(c);
            }
            out[i] = best;
        }
    };
    if (workers == 1) {
        run(0, 1);
    } else {
        std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&, w]() {
                try {
                    run(static_cast<std::size_t>(w), static_cast<std::size_t>(workers));
                } catch (...) {
                    errors[static_cast<std::size_t>(w)] = std::current_exception();
                }
            });
        }
        for (auto& t : pool) t.join();
        for (const auto& e : errors) {
            if (e) std::rethrow_exception(e);
        }
    }
    return out;
}

Model train(Model model, const Dataset& train_set, const Dataset& val_set,
            const TrainConfig& config) {
    if (train_set.size() == 0 || val_set.size() == 0) {
        throw DataError("train: empty train or validation set");
    }
    if (train_set.labels.size() != train_set.inputs.size() ||
        val_set.labels.size() != val_set.inputs.size()) {
        throw DataError("train: labels/inputs size mismatch");
    }
    const int n_c = model.n_classes();
    for (int l : train_set.labels) {
        if (l < 0 || l >= n_c) throw DataError("train: label out of range");
    }

    model.history.clear();
    model.best_epoch = -1;

    AdamState adam;
    double lr = config.learning_rate;
    double best_uar = -1.0;
    std::vector<Tensor> best_params;
    int sched_stale = 0;
    int stop_stale = 0;

    std::vector<std::size_t> order(train_set.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::mt19937_64 shuffle_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);

    std::vector<Tensor> grads;
    for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        double loss_sum = 0.0;
        for (std::size_t pos = 0; pos < order.size(); pos += static_cast<std::size_t>(config.batch_size)) {
            const std::size_t count =
                std::min<std::size_t>(static_cast<std::size_t>(config.batch_size), order.size() - pos);
            const std::span<const std::size_t> batch(order.data() + pos, count);
            const double batch_loss =
                compute_gradients(model, train_set, batch, grads, config.grad_workers);
            if (!std::isfinite(batch_loss)) {
                throw NumericError("training diverged: non-finite loss at epoch " +
                                   std::to_string(epoch + 1));
            }
            adam_step(model.parameters(), grads, adam, lr);
            loss_sum += batch_loss * static_cast<double>(count);
        }
        const double train_loss = loss_sum / static_cast<double>(train_set.size());

        const auto preds = predict_batch(model, val_set.inputs, config.grad_workers);
        const auto confusion = eval::confusion_matrix(preds, val_set.labels, n_c);
        const double val_uar = eval::uar(confusion);

        model.history.push_back(EpochStats{train_loss, val_uar, lr});

        if (val_uar > best_uar) {
            best_uar = val_uar;
            model.best_epoch = epoch;
            best_params.clear();
            for (const Tensor* p : std::as_const(model).parameters()) best_params.push_back(*p);
            sched_stale = 0;
            stop_stale = 0;
        } else {
            ++sched_stale;
            ++stop_stale;
            if (sched_stale >= config.scheduler_patience) {
                lr = std::max(lr * config.scheduler_factor, config.min_learning_rate);
                sched_stale = 0;
            }
            if (stop_stale >= config.early_stop_patience) break;
        }
    }

    if (!best_params.empty()) {
        auto params = model.parameters();
        for (std::size_t t = 0; t < params.size(); ++t) *params[t] = best_params[t];
    }
    return model;
}

void save_history_csv(const std::string& path, const Model& model) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("cannot open for write: " + path);
    out << "epoch,train_loss,val_uar,lr\n";
    char buf[128];
    for (std::size_t e = 0; e < model.history.size(); ++e) {
        const auto& h = model.history[e];
        std::snprintf(buf, sizeof buf, "%zu,%.10g,%.10g,%.10g\n", e + 1, h.train_loss, h.val_uar,
                      h.lr);
        out << buf;
    }
    if (!out) throw DataError("write failure: " + path);
}

// --- checkpoint io ----------------------------------------------------------------------

namespace {

constexpr char kCheckpointMagic[4] = {'M', 'K', 'M', '1'};

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& out, double d) {
    const auto u = std::bit_cast<std::uint64_t>(d);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((u >> (8 * i)) & 0xff));
}

struct Reader {
    const unsigned char* p;
    std::size_t n;
    std::size_t pos = 0;
    const std::string& path;

    void need(std::size_t k) const {
        if (pos + k > n) throw DataError("truncated checkpoint: " + path);
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[pos + static_cast<std::size_t>(i)]) << (8 * i);
        pos += 4;
        return v;
    }
    double f64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[pos + static_cast<std::size_t>(i)]) << (8 * i);
        pos += 8;
        return std::bit_cast<double>(v);
    }
};

void put_tensor(std::string& out, const Tensor& t) {
    put_u32(out, static_cast<std::uint32_t>(t.shape.size()));
    for (int d : t.shape) put_u32(out, static_cast<std::uint32_t>(d));
    for (double v : t.data) put_f64(out, v);
}

Tensor get_tensor(Reader& r) {
    const std::uint32_t ndim = r.u32();
    std::vector<int> shape(ndim);
    std::size_t total = 1;
    for (auto& d : shape) {
        d = static_cast<int>(r.u32());
        total *= static_cast<std::size_t>(d);
    }
    Tensor t = Tensor::zeros(std::move(shape));
    for (std::size_t i = 0; i < total; ++i) t.data[i] = r.f64();
    return t;
}

} // namespace

void Model::save(const std::string& path) const {
    std::string out;
    out.append(kCheckpointMagic, 4);
    put_u32(out, 1); // version

    if (const auto* mlp = std::get_if<MLPSpec>(&spec_)) {
        put_u32(out, 0);
        put_u32(out, static_cast<std::uint32_t>(mlp->input_dim));
        put_u32(out, static_cast<std::uint32_t>(mlp->hidden.size()));
        for (int h : mlp->hidden) put_u32(out, static_cast<std::uint32_t>(h));
        put_u32(out, static_cast<std::uint32_t>(mlp->n_classes));
    } else if (const auto* probe = std::get_if<LinearProbeSpec>(&spec_)) {
        put_u32(out, 1);
        put_u32(out, static_cast<std::uint32_t>(probe->input_dim));
        put_u32(out, static_cast<std::uint32_t>(probe->n_classes));
    } else {
        const auto& cnn = std::get<CNNSpec>(spec_);
        put_u32(out, 2);
        put_u32(out, static_cast<std::uint32_t>(cnn.sample_rate));
        put_u32(out, static_cast<std::uint32_t>(cnn.n_classes));
        put_f64(out, cnn.first_kernel_ms);
        put_f64(out, cnn.first_stride_ms);
        put_u32(out, static_cast<std::uint32_t>(cnn.conv.size()));
        for (const auto& c : cnn.conv) {
            put_u32(out, static_cast<std::uint32_t>(c.kernel));
            put_u32(out, static_cast<std::uint32_t>(c.stride));
            put_u32(out, static_cast<std::uint32_t>(c.out_channels));
            put_u32(out, static_cast<std::uint32_t>(c.pad));
        }
        put_u32(out, static_cast<std::uint32_t>(cnn.fc_hidden.size()));
        for (int h : cnn.fc_hidden) put_u32(out, static_cast<std::uint32_t>(h));
    }

    put_u32(out, standardizer_mean_.empty() ? 0u : 1u);
    if (!standardizer_mean_.empty()) {
        put_u32(out, static_cast<std::uint32_t>(standardizer_mean_.size()));
        for (double v : standardizer_mean_) put_f64(out, v);
        for (double v : standardizer_std_) put_f64(out, v);
    }

    const auto params = parameters();
    put_u32(out, static_cast<std::uint32_t>(params.size()));
    for (const Tensor* t : params) put_tensor(out, *t);

    put_u32(out, static_cast<std::uint32_t>(history.size()));
    for (const auto& h : history) {
        put_f64(out, h.train_loss);
        put_f64(out, h.val_uar);
        put_f64(out, h.lr);
    }
    put_u32(out, static_cast<std::uint32_t>(best_epoch + 1)); // 0 = untrained

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw DataError("cannot open for write: " + path);
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw DataError("write failure: " + path);
}

Model Model::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open checkpoint: " + path);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (bytes.size() < 8 || std::memcmp(bytes.data(), kCheckpointMagic, 4) != 0) {
        throw DataError("bad checkpoint magic: " + path);
    }
    Reader r{reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size(), 4, path};
    const std::uint32_t version = r.u32();
    if (version != 1) throw DataError("unsupported checkpoint version: " + path);

    ModelSpec spec;
    const std::uint32_t kind = r.u32();
    if (kind == 0) {
        MLPSpec s;
        s.input_dim = static_cast<int>(r.u32());
        s.hidden.resize(r.u32());
        for (auto& h : s.hidden) h = static_cast<int>(r.u32());
        s.n_classes = static_cast<int>(r.u32());
        spec = s;
    } else if (kind == 1) {
        LinearProbeSpec s;
        s.input_dim = static_cast<int>(r.u32());
        s.n_classes = static_cast<int>(r.u32());
        spec = s;
    } else if (kind == 2) {
        CNNSpec s;
        s.sample_rate = static_cast<int>(r.u32());
        s.n_classes = static_cast<int>(r.u32());
        s.first_kernel_ms = r.f64();
        s.first_stride_ms = r.f64();
        s.conv.resize(r.u32());
        for (auto& c : s.conv) {
            c.kernel = static_cast<int>(r.u32());
            c.stride = static_cast<int>(r.u32());
            c.out_channels = static_cast<int>(r.u32());
            c.pad = static_cast<int>(r.u32());
        }
        s.fc_hidden.resize(r.u32());
        for (auto& h : s.fc_hidden) h = static_cast<int>(r.u32());
        spec = s;
    } else {
        throw DataError("unknown model kind in checkpoint: " + path);
    }

    Model m = Model::init(spec, 0);
    if (r.u32() == 1) {
        const std::uint32_t dim = r.u32();
        std::vector<double> mean(dim), stddev(dim);
        for (auto& v : mean) v = r.f64();
        for (auto& v : stddev) v = r.f64();
        m.standardizer_mean_ = std::move(mean);
        m.standardizer_std_ = std::move(stddev);
    }

    const std::uint32_t n_tensors = r.u32();
    auto params = m.parameters();
    if (n_tensors != params.size()) throw DataError("checkpoint tensor count mismatch: " + path);
    for (std::size_t t = 0; t < params.size(); ++t) {
        Tensor loaded = get_tensor(r);
        if (!loaded.same_shape(*params[t])) {
            throw DataError("checkpoint tensor shape mismatch: " + path);
        }
        *params[t] = std::move(loaded);
    }

    m.history.resize(r.u32());
    for (auto& h : m.history) {
        h.train_loss = r.f64();
        h.val_uar = r.f64();
        h.lr = r.f64();
    }
    m.best_epoch = static_cast<int>(r.u32()) - 1;
    return m;
}

} // namespace marmo::nnet
