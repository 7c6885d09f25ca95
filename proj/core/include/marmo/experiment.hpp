// Copyright 2026 Marmokit Contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "marmo/analysis.hpp"
#include "marmo/eval.hpp"
#include "marmo/manifest.hpp"
#include "marmo/nnet.hpp"

namespace marmo::experiment {

enum class FeatureKind { Catch24, PooledEmbedding, EndToEnd };

const char* feature_name(FeatureKind f); // "c22" / "wlm" / "e2e"
FeatureKind feature_from_string(const std::string& s);

/// One experiment = dataset x task x feature x sample rate, fully
/// reproducible from this config plus the seed.
struct ExperimentConfig {
    std::string manifest_path;
    Task task = Task::CallType;
    FeatureKind feature = FeatureKind::Catch24;
    int sample_rate = 0;          // 0 = native; embeddings require the 16 kHz pathway
    int wlm_layer = 0;            // embeddings only (0..12)
    std::string embeddings_dir;   // embeddings only
    std::uint64_t seed = 0;
    std::string output_dir = "out";
    nnet::TrainConfig train;      // defaults filled per feature kind
    int resample_taps = 64;
    double resample_cutoff = 0.9;
    bool max_epochs_set = false;         // explicitly set in the config file
    bool early_stop_patience_set = false;
};

/// INI-style key = value file; unknown keys are rejected. See README for
/// the schema.
ExperimentConfig load_experiment_config(const std::string& path);

struct ExperimentResult {
    eval::EvalReport report;
    double test_uar = 0.0;
    std::vector<std::string> classes;
    std::string report_path;
    std::string checkpoint_path;
    std::string history_path;
};

/// split -> materialize features -> train -> evaluate; writes the report
/// JSON, model checkpoint, training history CSV, and split files under
/// config.output_dir.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Rebuilds the test split of config's experiment and evaluates an existing
/// checkpoint on it; writes <output_dir>/eval_report.json.
ExperimentResult evaluate_checkpoint(const ExperimentConfig& config,
                                     const std::string& checkpoint_path);

/// Synthetic tone-plus-noise dataset: one WAV per segment, per-class tone
/// frequency, durations uniform in [min_dur_s, max_dur_s], white noise at
/// snr_db. Deterministic per (spec, seed). Returns the manifest (also
/// written to <out_dir>/manifest.csv, WAVs under <out_dir>/wavs/).
struct SynthSpec {
    std::vector<double> tones_hz = {4000.0, 8000.0, 12000.0};
    int per_class = 200;
    double snr_db = 10.0;
    int sample_rate = 44100;
    double min_dur_s = 0.05;
    double max_dur_s = 0.15;
};

Manifest make_synthetic_dataset(const SynthSpec& spec, std::uint64_t seed,
                                const std::string& out_dir);

/// Collects report JSONs into a results table: CSV plus an aligned text
/// rendering with the best score per dataset/task flagged.
struct ResultsRow {
    std::string dataset;
    std::string feature;
    int sample_rate = 0;
    std::string task;
    double uar = 0.0;
    bool best = false;
};

std::vector<ResultsRow> collect_results(const std::vector<std::string>& report_paths);
void write_results_csv(const std::vector<ResultsRow>& rows, const std::string& path);
void render_results_table(const std::vector<ResultsRow>& rows, std::ostream& out);

/// Trains a linear probe per (task, layer) on pooled embeddings and
/// assembles the per-task-normalized layer score matrix. A missing
/// embedding file aborts the run (DataError naming segment and layer).
analysis::LayerMatrix probe_layer_matrix(const Manifest& manifest,
                                         const std::string& embeddings_dir,
                                         const std::vector<Task>& tasks, int n_layers,
                                         const nnet::TrainConfig& train_config,
                                         std::uint64_t seed);

} // namespace marmo::experiment
