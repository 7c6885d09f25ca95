// Copyright 2026 Marmokit Contributors
// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: experiment runs, feature extraction, dataset
// splitting, synthetic data generation, and the two diagnostic analyses.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "marmo/analysis.hpp"
#include "marmo/catch24.hpp"
#include "marmo/errors.hpp"
#include "marmo/eval.hpp"
#include "marmo/experiment.hpp"
#include "marmo/manifest.hpp"
#include "marmo/nnet.hpp"
#include "marmo/resample.hpp"
#include "marmo/wav.hpp"

namespace fs = std::filesystem;
using namespace marmo;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitDataError = 2;
constexpr int kExitNumericError = 3;

std::vector<double> parse_tone_list(const std::string& csv) {
    std::vector<double> tones;
    std::string cur;
    for (char c : csv + ",") {
        if (c == ',') {
            if (!cur.empty()) tones.push_back(std::stod(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    return tones;
}

experiment::ExperimentConfig load_config_with_overrides(const std::string& config_path,
                                                        const std::string& seed_override,
                                                        const std::string& output_override) {
    auto cfg = experiment::load_experiment_config(config_path);
    if (!seed_override.empty()) cfg.seed = std::stoull(seed_override);
    if (!output_override.empty()) cfg.output_dir = output_override;
    return cfg;
}

int cmd_split(const std::string& manifest_path, const std::string& task_str, std::uint64_t seed,
              const std::string& output) {
    const Manifest m = load_manifest(manifest_path);
    const Task task = task_from_string(task_str);
    const auto split = eval::split_dataset(m, task, seed);
    eval::save_split(output, split);
    std::printf("split %zu/%zu/%zu segments (train/val/test) into %s\n", split.train.records.size(),
                split.val.records.size(), split.test.records.size(), output.c_str());
    return kExitOk;
}

int cmd_extract_features(const std::string& manifest_path, const std::string& out_csv,
                         int sample_rate, const std::string& dump_dir) {
    std::size_t dropped = 0;
    const Manifest m = load_manifest(manifest_path, &dropped);
    if (dropped > 0) std::fprintf(stderr, "note: dropped %zu silence/noise segments\n", dropped);
    if (!dump_dir.empty()) fs::create_directories(dump_dir);

    std::ofstream out(out_csv, std::ios::trunc);
    if (!out) throw DataError("cannot open for write: " + out_csv);
    out << "segment_id";
    for (const auto& name : catch24::feature_names()) out << ',' << name;
    out << ",nan_mask\n";

    std::string last_path;
    Waveform recording;
    char buf[64];
    for (const auto& r : m.records) {
        if (r.wav_path != last_path) {
            WavInfo info;
            recording = read_wav(r.wav_path, &info);
            if (info.source_channels > 1) {
                std::fprintf(stderr, "warning: %s has %d channels, using channel 0\n",
                             r.wav_path.c_str(), info.source_channels);
            }
            if (sample_rate > 0 && sample_rate != recording.sample_rate) {
                ResampleSpec spec;
                spec.target_rate = sample_rate;
                recording = resample(recording, spec);
            }
            last_path = r.wav_path;
        }
        const Waveform seg = slice_segment(recording, r.start_s, r.end_s);
        if (!dump_dir.empty()) {
            write_wav16((fs::path(dump_dir) / (r.segment_id + ".wav")).string(), seg);
        }
        const auto fv = catch24::compute_catch24(seg);
        out << r.segment_id;
        for (double v : fv.values) {
            std::snprintf(buf, sizeof buf, "%.10g", v);
            out << ',' << buf;
        }
        out << ',';
        for (bool b : fv.nan_mask) out << (b ? '1' : '0');
        out << '\n';
    }
    std::printf("wrote %zu feature rows to %s\n", m.records.size(), out_csv.c_str());
    return kExitOk;
}

int cmd_train(const experiment::ExperimentConfig& cfg) {
    const auto result = experiment::run_experiment(cfg);
    std::printf("test UAR %.2f (chance %.2f) -> %s\n", result.test_uar, result.report.chance,
                result.report_path.c_str());
    return kExitOk;
}

int cmd_eval(const experiment::ExperimentConfig& cfg, const std::string& model_path) {
    const std::string checkpoint =
        model_path.empty() ? (fs::path(cfg.output_dir) / "model.mkm").string() : model_path;
    const auto result = experiment::evaluate_checkpoint(cfg, checkpoint);
    std::printf("test UAR %.2f (chance %.2f) -> %s\n", result.test_uar, result.report.chance,
                result.report_path.c_str());
    return kExitOk;
}

int cmd_make_synthetic(const experiment::SynthSpec& spec, std::uint64_t seed,
                       const std::string& output) {
    const Manifest m = experiment::make_synthetic_dataset(spec, seed, output);
    const auto stats = duration_stats(m);
    std::printf("wrote %zu segments (%zu classes) to %s; median %.1f ms, total %.2f min\n",
                m.records.size(), spec.tones_hz.size(), output.c_str(), stats.median_ms,
                stats.total_minutes);
    return kExitOk;
}

int cmd_freq_response(const std::string& model_path, const std::string& output, int n_dft,
                      bool svg) {
    const nnet::Model model = nnet::Model::load(model_path);
    const auto bank = analysis::first_layer_filters(model);
    const auto response = analysis::cumulative_response(bank, n_dft);
    fs::create_directories(output);
    const std::string csv = (fs::path(output) / "freq_response.csv").string();
    analysis::export_response_csv(response, csv);
    if (svg) {
        analysis::export_response_svg(response, (fs::path(output) / "freq_response.svg").string());
    }
    std::printf("wrote %zu-bin cumulative response (%d filters at %d Hz) to %s\n",
                response.magnitude.size(), static_cast<int>(bank.filters.size()), bank.sample_rate,
                csv.c_str());
    return kExitOk;
}

int cmd_probe_layers(const std::string& manifest_path, const std::string& embeddings_dir,
                     const std::string& tasks_csv, int n_layers, std::uint64_t seed,
                     const std::string& output, bool svg) {
    const Manifest manifest = load_manifest(manifest_path);
    std::vector<Task> tasks;
    {
        std::string cur;
        for (char c : tasks_csv + ",") {
            if (c == ',') {
                if (!cur.empty()) tasks.push_back(task_from_string(cur));
                cur.clear();
            } else {
                cur.push_back(c);
            }
        }
    }
    nnet::TrainConfig train_cfg; // probe defaults: 30 epochs, plateau scheduler
    const auto matrix =
        experiment::probe_layer_matrix(manifest, embeddings_dir, tasks, n_layers, train_cfg, seed);
    fs::create_directories(output);
    const std::string csv = (fs::path(output) / "layer_matrix.csv").string();
    analysis::export_layer_matrix_csv(matrix, csv);
    if (svg) {
        analysis::export_layer_matrix_svg(matrix, (fs::path(output) / "layer_matrix.svg").string());
    }
    std::printf("wrote %zu-task x %d-layer probe matrix to %s\n", tasks.size(), n_layers,
                csv.c_str());
    return kExitOk;
}

int cmd_report(const std::vector<std::string>& reports, const std::string& out_csv) {
    const auto rows = experiment::collect_results(reports);
    if (!out_csv.empty()) experiment::write_results_csv(rows, out_csv);
    experiment::render_results_table(rows, std::cout);
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"marmoset call analysis toolkit"};
    app.require_subcommand(1);

    // split
    auto* split = app.add_subcommand("split", "stratified 70:20:10 dataset split");
    std::string split_manifest, split_task = "call-type", split_output = "split";
    std::uint64_t split_seed = 0;
    split->add_option("--manifest", split_manifest, "manifest CSV")->required();
    split->add_option("--task", split_task, "call-type | caller | sex");
    split->add_option("--seed", split_seed, "split seed");
    split->add_option("--output", split_output, "output directory");

    // extract-features
    auto* extract = app.add_subcommand("extract-features", "per-segment catch24 feature CSV");
    std::string ef_manifest, ef_output = "features.csv", ef_dump;
    int ef_rate = 0;
    extract->add_option("--manifest", ef_manifest, "manifest CSV")->required();
    extract->add_option("--output", ef_output, "output CSV path");
    extract->add_option("--sample-rate", ef_rate, "resample audio to this rate (0 = native)");
    extract->add_option("--dump-wav-dir", ef_dump, "debug: dump sliced segments as WAVs here");

    // train / eval
    auto* train = app.add_subcommand("train", "run one experiment from a config file");
    std::string train_config, train_seed, train_output;
    train->add_option("--config", train_config, "experiment config file")->required();
    train->add_option("--seed", train_seed, "override config seed");
    train->add_option("--output", train_output, "override config output dir");

    auto* evalc = app.add_subcommand("eval", "re-evaluate a saved checkpoint on the test split");
    std::string eval_config, eval_seed, eval_output, eval_model;
    evalc->add_option("--config", eval_config, "experiment config file")->required();
    evalc->add_option("--seed", eval_seed, "override config seed");
    evalc->add_option("--output", eval_output, "override config output dir");
    evalc->add_option("--model", eval_model, "checkpoint path (default <output>/model.mkm)");

    // probe-layers
    auto* probe = app.add_subcommand("probe-layers", "linear probe per embedding layer and task");
    std::string pl_manifest, pl_emb, pl_tasks = "call-type,caller,sex", pl_output = "probe";
    int pl_layers = 13;
    std::uint64_t pl_seed = 0;
    bool pl_svg = false;
    probe->add_option("--manifest", pl_manifest, "manifest CSV")->required();
    probe->add_option("--embeddings-dir", pl_emb, "directory of .emb files")->required();
    probe->add_option("--tasks", pl_tasks, "comma-separated task list");
    probe->add_option("--layers", pl_layers, "number of layers (default 13)");
    probe->add_option("--seed", pl_seed, "seed");
    probe->add_option("--output", pl_output, "output directory");
    probe->add_flag("--svg", pl_svg, "also write an SVG heat map");

    // freq-response
    auto* freq = app.add_subcommand("freq-response", "cumulative first-layer filter response");
    std::string fr_model, fr_output = "analysis";
    int fr_dft = 2048;
    bool fr_svg = false;
    freq->add_option("--model", fr_model, "trained waveform-model checkpoint")->required();
    freq->add_option("--output", fr_output, "output directory");
    freq->add_option("--dft", fr_dft, "DFT size (default 2048)");
    freq->add_flag("--svg", fr_svg, "also write an SVG line plot");

    // make-synthetic
    auto* synth = app.add_subcommand("make-synthetic", "deterministic tone+noise dataset");
    std::string sy_output = "synth", sy_tones = "4000,8000,12000";
    experiment::SynthSpec sy_spec;
    std::uint64_t sy_seed = 0;
    synth->add_option("--output", sy_output, "output directory");
    synth->add_option("--tones", sy_tones, "comma-separated class tone frequencies (Hz)");
    synth->add_option("--per-class", sy_spec.per_class, "segments per class");
    synth->add_option("--snr", sy_spec.snr_db, "tone-to-noise ratio in dB");
    synth->add_option("--rate", sy_spec.sample_rate, "sample rate (Hz)");
    synth->add_option("--dur-min", sy_spec.min_dur_s, "minimum duration (s)");
    synth->add_option("--dur-max", sy_spec.max_dur_s, "maximum duration (s)");
    synth->add_option("--seed", sy_seed, "seed");

    // report
    auto* report = app.add_subcommand("report", "aggregate report JSONs into a results table");
    std::vector<std::string> rp_inputs;
    std::string rp_csv;
    report->add_option("reports", rp_inputs, "report.json files")->required();
    report->add_option("--output", rp_csv, "also write a CSV here");

    CLI11_PARSE(app, argc, argv);

    try {
        if (split->parsed()) return cmd_split(split_manifest, split_task, split_seed, split_output);
        if (extract->parsed()) return cmd_extract_features(ef_manifest, ef_output, ef_rate, ef_dump);
        if (train->parsed()) {
            return cmd_train(load_config_with_overrides(train_config, train_seed, train_output));
        }
        if (evalc->parsed()) {
            return cmd_eval(load_config_with_overrides(eval_config, eval_seed, eval_output),
                            eval_model);
        }
        if (probe->parsed()) {
            return cmd_probe_layers(pl_manifest, pl_emb, pl_tasks, pl_layers, pl_seed, pl_output,
                                    pl_svg);
        }
        if (freq->parsed()) return cmd_freq_response(fr_model, fr_output, fr_dft, fr_svg);
        if (synth->parsed()) {
            sy_spec.tones_hz = parse_tone_list(sy_tones);
            return cmd_make_synthetic(sy_spec, sy_seed, sy_output);
        }
        if (report->parsed()) return cmd_report(rp_inputs, rp_csv);
    } catch (const DataError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return kExitDataError;
    } catch (const NumericError& e) {
        std::fprintf(stderr, "numeric error: %s\n", e.what());
        return kExitNumericError;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitError;
    }
    return kExitError;
}
