// Copyright 2026 Marmokit Contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace marmo::nnet {

/// Dense row-major tensor of doubles.
struct Tensor {
    std::vector<int> shape;
    std::vector<double> data;

    static Tensor zeros(std::vector<int> shape);
    std::size_t size() const { return data.size(); }
    bool same_shape(const Tensor& other) const { return shape == other.shape; }
};

// --- model specs -------------------------------------------------------------

struct MLPSpec {
    int input_dim = 0;
    std::vector<int> hidden = {128, 64, 32};
    int n_classes = 0;
};

struct LinearProbeSpec {
    int input_dim = 0;
    int n_classes = 0;
};

struct ConvLayerSpec {
    int kernel = 0;
    int stride = 1;
    int out_channels = 0;
    int pad = 0;
};

/// Raw-waveform classifier: four rectified conv layers, global average
/// pooling over time, then FC 512 -> FC 256 -> FC n_classes. The first
/// kernel/stride are chosen from the sample rate: 1 ms / 0.05 ms at high
/// rates (>= 32 kHz), 10 ms / 0.5 ms at low rates.
struct CNNSpec {
    int sample_rate = 0;
    int n_classes = 0;
    double first_kernel_ms = 0.0;
    double first_stride_ms = 0.0;
    std::vector<ConvLayerSpec> conv;      // four entries
    std::vector<int> fc_hidden = {512, 256};

    static CNNSpec for_rate(int sample_rate, int n_classes);

    /// Shortest input accepted by the conv stack without zero padding;
    /// shorter waveforms are padded symmetrically up to this length.
    int min_input_samples() const;
};

using ModelSpec = std::variant<MLPSpec, LinearProbeSpec, CNNSpec>;

// --- layer primitives ----------------------------------------------------------

namespace layers {

/// 1-D convolution over a channels x length map (row-major, rows = channels).
struct Conv1d {
    int in_channels = 0;
    int out_channels = 0;
    int kernel = 0;
    int stride = 1;
    int pad = 0;
    Tensor weight; // {out_channels, in_channels, kernel}
    Tensor bias;   // {out_channels}

    int output_length(int input_length) const;
    /// Pre-activation output, out_channels x output_length.
    std::vector<double> forward(std::span<const double> x, int input_length) const;
    /// Returns d_input; accumulates into d_weight / d_bias.
    std::vector<double> backward(std::span<const double> x, int input_length,
                                 std::span<const double> d_out, Tensor& d_weight,
                                 Tensor& d_bias) const;
};

struct Dense {
    int in_dim = 0;
    int out_dim = 0;
    Tensor weight; // {out_dim, in_dim}
    Tensor bias;   // {out_dim}

    std::vector<double> forward(std::span<const double> x) const;
    std::vector<double> backward(std::span<const double> x, std::span<const double> d_out,
                                 Tensor& d_weight, Tensor& d_bias) const;
};

std::vector<double> relu(std::span<const double> x);
/// d_input of the rectifier given its input x.
std::vector<double> relu_backward(std::span<const double> x, std::span<const double> d_out);

/// Per-channel mean over the time axis; output has one value per channel.
std::vector<double> global_avg_pool(std::span<const double> x, int channels, int length);
std::vector<double> global_avg_pool_backward(std::span<const double> d_out, int channels,
                                             int length);

} // namespace layers

/// Per-channel mean over time of a channels x length map.
/// Throws DataError on an empty map.
std::vector<double> adaptive_avg_pool(std::span<const double> feature_map, int channels,
                                      int length);

/// Numerically stabilized softmax cross-entropy.
/// Returns the loss and dLoss/dLogits = softmax(logits) - onehot(label).
struct LossGrad {
    double loss = 0.0;
    std::vector<double> grad;
};
LossGrad cross_entropy(std::span<const double> logits, int label);

// --- training ---------------------------------------------------------------------

struct TrainConfig {
    int batch_size = 16;
    double learning_rate = 1e-3;
    int max_epochs = 30;
    int scheduler_patience = 10;    // epochs of stagnant val UAR before LR cut
    double scheduler_factor = 0.5;
    double min_learning_rate = 1e-6;
    int early_stop_patience = 30;   // epochs of stagnant val UAR before stopping
    std::uint64_t seed = 0;
    int grad_workers = 2;           // fixed worker count keeps reductions reproducible
};

struct EpochStats {
    double train_loss = 0.0;
    double val_uar = 0.0;
    double lr = 0.0;
};

/// Inputs are feature rows for MLP/probe models or raw waveforms for CNN
/// models; labels are class indices.
struct Dataset {
    std::vector<std::vector<double>> inputs;
    std::vector<int> labels;

    std::size_t size() const { return inputs.size(); }
};

class Model {
public:
    Model() = default;

    /// Deterministic fan-in-scaled uniform initialization; biases zero.
    static Model init(const ModelSpec& spec, std::uint64_t seed);

    const ModelSpec& spec() const { return spec_; }
    bool wave_input() const;
    int n_classes() const;
    int input_dim() const; // -1 for waveform models

    /// Logits for one input (feature vector or waveform). Applies the
    /// stored input standardizer to feature inputs.
    std::vector<double> forward(std::span<const double> input) const;

    std::vector<Tensor*> parameters();
    std::vector<const Tensor*> parameters() const;

    /// Per-dimension z-scoring baked into the model (train-split statistics).
    void set_standardizer(std::vector<double> mean, std::vector<double> stddev);
    bool has_standardizer() const { return !standardizer_mean_.empty(); }
    const std::vector<double>& standardizer_mean() const { return standardizer_mean_; }
    const std::vector<double>& standardizer_std() const { return standardizer_std_; }

    /// Little-endian binary checkpoint ("MKM1"); round-trips bit-exactly.
    void save(const std::string& path) const;
    static Model load(const std::string& path);

    /// First conv layer (waveform models), or nullptr.
    const layers::Conv1d* first_conv() const;

    std::vector<EpochStats> history;
    int best_epoch = -1;

private:
    friend double compute_gradients(const Model&, const Dataset&,
                                    std::span<const std::size_t>, std::vector<Tensor>&, int);
    friend class ModelOps;

    ModelSpec spec_;
    std::vector<layers::Conv1d> conv_;
    std::vector<layers::Dense> dense_; // all FC layers; relu on all but last
    std::vector<double> standardizer_mean_;
    std::vector<double> standardizer_std_;
};

/// Mean-over-batch gradients for every parameter, aligned with
/// model.parameters(). Returns the mean loss. grads is resized and zeroed.
/// Throws NumericError (with the layer index) on non-finite activations.
double compute_gradients(const Model& model, const Dataset& data,
                         std::span<const std::size_t> indices, std::vector<Tensor>& grads,
                         int n_workers = 1);

/// Convenience overload over a whole dataset.
double compute_gradients(const Model& model, const Dataset& batch, std::vector<Tensor>& grads);

struct AdamState {
    std::vector<Tensor> m;
    std::vector<Tensor> v;
    long step_count = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// Standard Adam update with bias correction; state tensors are created on
/// first use. Throws DataError on shape mismatch.
void adam_step(std::vector<Tensor*> params, const std::vector<Tensor>& grads, AdamState& state,
               double lr);

/// Argmax class per input; ties break toward the lowest class index.
std::vector<int> predict_batch(const Model& model, const std::vector<std::vector<double>>& inputs,
                               int n_workers = 1);

/// Minibatch training with Adam, validation-UAR plateau LR scheduling,
/// early stopping, and best-epoch restoration. History gets one entry per
/// epoch. Throws NumericError if the loss diverges.
Model train(Model model, const Dataset& train_set, const Dataset& val_set,
            const TrainConfig& config);

/// CSV with header epoch,train_loss,val_uar,lr.
void save_history_csv(const std::string& path, const Model& model);

} // namespace marmo::nnet
