// Copyright 2026 Marmokit Contributors
// SPDX-License-Identifier: Apache-2.0

#include "marmo/experiment.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <ostream>
#include <random>

#include <nlohmann/json.hpp>

#include "marmo/catch24.hpp"
#include "marmo/embeddings.hpp"
#include "marmo/errors.hpp"
#include "marmo/resample.hpp"
#include "marmo/wav.hpp"

namespace fs = std::filesystem;

namespace marmo::experiment {

const char* feature_name(FeatureKind f) {
    switch (f) {
        case FeatureKind::Catch24: return "c22";
        case FeatureKind::PooledEmbedding: return "wlm";
        case FeatureKind::EndToEnd: return "e2e";
    }
    return "?";
}

FeatureKind feature_from_string(const std::string& s) {
    std::string v;
    for (char c : s) v.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (v == "c22" || v == "catch24" || v == "catch22") return FeatureKind::Catch24;
    if (v == "wlm" || v == "embedding" || v == "embeddings") return FeatureKind::PooledEmbedding;
    if (v == "e2e" || v == "cnn" || v == "raw") return FeatureKind::EndToEnd;
    throw DataError("unknown feature '" + s + "' (expected c22, wlm, or e2e)");
}

// --- config -------------------------------------------------------------------

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

} // namespace

ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open config: " + path);
    ExperimentConfig cfg;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#' || stripped[0] == ';') continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw DataError("config line " + std::to_string(line_no) + ": expected key = value");
        }
        const std::string key = trim(stripped.substr(0, eq));
        const std::string val = trim(stripped.substr(eq + 1));
        try {
            if (key == "manifest") cfg.manifest_path = val;
            else if (key == "task") cfg.task = task_from_string(val);
            else if (key == "feature") cfg.feature = feature_from_string(val);
            else if (key == "sample_rate") cfg.sample_rate = std::stoi(val);
            else if (key == "wlm_layer") cfg.wlm_layer = std::stoi(val);
            else if (key == "embeddings_dir") cfg.embeddings_dir = val;
            else if (key == "seed") cfg.seed = std::stoull(val);
            else if (key == "output_dir") cfg.output_dir = val;
            else if (key == "batch_size") cfg.train.batch_size = std::stoi(val);
            else if (key == "learning_rate") cfg.train.learning_rate = std::stod(val);
            else if (key == "max_epochs") { cfg.train.max_epochs = std::stoi(val); cfg.max_epochs_set = true; }
            else if (key == "scheduler_patience") cfg.train.scheduler_patience = std::stoi(val);
            else if (key == "scheduler_factor") cfg.train.scheduler_factor = std::stod(val);
            else if (key == "min_learning_rate") cfg.train.min_learning_rate = std::stod(val);
            else if (key == "early_stop_patience") { cfg.train.early_stop_patience = std::stoi(val); cfg.early_stop_patience_set = true; }
            else if (key == "grad_workers") cfg.train.grad_workers = std::stoi(val);
            else if (key == "resample_taps") cfg.resample_taps = std::stoi(val);
            else if (key == "resample_cutoff") cfg.resample_cutoff = std::stod(val);
            else throw DataError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
        } catch (const std::invalid_argument&) {
            throw DataError("config line " + std::to_string(line_no) + ": bad value for '" + key + "'");
        } catch (const std::out_of_range&) {
            throw DataError("config line " + std::to_string(line_no) + ": value out of range for '" + key + "'");
        }
    }
    return cfg;
}

// --- feature materialization ------------------------------------------------------

namespace {

// Sequential single-file cache; callers iterate records grouped by wav_path.
class AudioCache {
public:
    AudioCache(int taps, double cutoff) : taps_(taps), cutoff_(cutoff) {}

    // full recording at the requested rate (0 = native)
    const Waveform& recording(const std::string& path, int target_rate) {
        if (path != path_ || target_rate != rate_) {
            Waveform raw = read_wav(path);
            if (target_rate > 0 && target_rate != raw.sample_rate) {
                ResampleSpec spec;
                spec.target_rate = target_rate;
                spec.filter_taps = taps_;
                spec.cutoff_fraction = cutoff_;
                raw = resample(raw, spec);
            }
            wave_ = std::move(raw);
            path_ = path;
            rate_ = target_rate;
        }
        return wave_;
    }

private:
    int taps_;
    double cutoff_;
    std::string path_;
    int rate_ = -1;
    Waveform wave_;
};

// record processing order grouped by wav_path to keep the cache hot
std::vector<std::size_t> path_grouped_order(const std::vector<SegmentRecord>& records) {
    std::vector<std::size_t> order(records.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return records[a].wav_path < records[b].wav_path;
    });
    return order;
}

nnet::Dataset make_catch24_dataset(const Manifest& part, Task task, const TaskLabelSpace& space,
                                   int target_rate, AudioCache& cache) {
    nnet::Dataset ds;
    ds.inputs.resize(part.records.size());
    ds.labels.resize(part.records.size());
    for (const std::size_t i : path_grouped_order(part.records)) {
        const auto& r = part.records[i];
        const Waveform& rec = cache.recording(r.wav_path, target_rate);
        const Waveform seg = slice_segment(rec, r.start_s, r.end_s);
        const auto fv = catch24::compute_catch24(seg);
        ds.inputs[i].assign(fv.values.begin(), fv.values.end());
        ds.labels[i] = space.index_of(r.label(task));
    }
    return ds;
}

nnet::Dataset make_wave_dataset(const Manifest& part, Task task, const TaskLabelSpace& space,
                                int target_rate, AudioCache& cache) {
    nnet::Dataset ds;
    ds.inputs.resize(part.records.size());
    ds.labels.resize(part.records.size());
    for (const std::size_t i : path_grouped_order(part.records)) {
        const auto& r = part.records[i];
        const Waveform& rec = cache.recording(r.wav_path, target_rate);
        ds.inputs[i] = slice_segment(rec, r.start_s, r.end_s).samples;
        ds.labels[i] = space.index_of(r.label(task));
    }
    return ds;
}

nnet::Dataset make_pooled_dataset(const Manifest& part, Task task, const TaskLabelSpace& space,
                                  const std::string& embeddings_dir, int layer) {
    nnet::Dataset ds;
    ds.inputs.reserve(part.records.size());
    ds.labels.reserve(part.records.size());
    for (const auto& r : part.records) {
        const fs::path p = fs::path(embeddings_dir) / embedding_filename(r.segment_id, layer);
        if (!fs::exists(p)) {
            throw DataError("missing embedding for segment '" + r.segment_id + "' layer " +
                            std::to_string(layer) + " (" + p.string() + ")");
        }
        const auto emb = load_embeddings(p.string());
        ds.inputs.push_back(pool_stats(emb).values);
        ds.labels.push_back(space.index_of(r.label(task)));
    }
    return ds;
}

void fit_standardizer(nnet::Model& model, const nnet::Dataset& train_ds) {
    const std::size_t dim = train_ds.inputs.front().size();
    std::vector<double> mean(dim, 0.0), stddev(dim, 0.0);
    const double inv_n = 1.0 / static_cast<double>(train_ds.size());
    for (const auto& row : train_ds.inputs) {
        for (std::size_t d = 0; d < dim; ++d) mean[d] += row[d];
    }
    for (std::size_t d = 0; d < dim; ++d) mean[d] *= inv_n;
    for (const auto& row : train_ds.inputs) {
        for (std::size_t d = 0; d < dim; ++d) {
            const double diff = row[d] - mean[d];
            stddev[d] += diff * diff;
        }
    }
    for (std::size_t d = 0; d < dim; ++d) stddev[d] = std::sqrt(stddev[d] * inv_n);
    model.set_standardizer(std::move(mean), std::move(stddev));
}

int infer_native_rate(const Manifest& m) {
    if (m.native_sr > 0) return m.native_sr;
    if (m.records.empty()) throw DataError("cannot infer native rate of an empty manifest");
    return read_wav(m.records.front().wav_path).sample_rate;
}

std::string json_report(const ExperimentConfig& cfg, const eval::EvalReport& report,
                        const TaskLabelSpace& space, const std::string& dataset) {
    nlohmann::json j;
    j["dataset"] = dataset;
    j["task"] = task_name(cfg.task);
    j["feature"] = feature_name(cfg.feature);
    j["sample_rate"] = cfg.sample_rate;
    j["seed"] = cfg.seed;
    j["n_classes"] = report.n_classes;
    j["chance"] = report.chance;
    j["test_uar"] = report.uar;
    j["classes"] = space.classes;
    j["per_class_recall"] = report.recalls;
    nlohmann::json conf = nlohmann::json::array();
    for (int t = 0; t < report.n_classes; ++t) {
        nlohmann::json row = nlohmann::json::array();
        for (int p = 0; p < report.n_classes; ++p) row.push_back(report.confusion.at(t, p));
        conf.push_back(row);
    }
    j["confusion"] = conf;
    if (cfg.feature == FeatureKind::PooledEmbedding) j["wlm_layer"] = cfg.wlm_layer;
    return j.dump(2) + "\n";
}

} // namespace

namespace {

struct PreparedExperiment {
    ExperimentConfig cfg; // normalized (rates and training defaults resolved)
    Manifest manifest;
    TaskLabelSpace space;
    eval::SplitSet split;
    nnet::Dataset train_ds, val_ds, test_ds;
    nnet::ModelSpec model_spec;
};

PreparedExperiment prepare_experiment(const ExperimentConfig& config) {
    PreparedExperiment prep;
    prep.cfg = config;
    ExperimentConfig& cfg = prep.cfg;
    if (cfg.manifest_path.empty()) throw DataError("experiment config: manifest is required");

    prep.manifest = load_manifest(cfg.manifest_path);
    if (prep.manifest.native_sr == 0) prep.manifest.native_sr = infer_native_rate(prep.manifest);

    if (cfg.feature == FeatureKind::PooledEmbedding) {
        if (cfg.sample_rate == 0) cfg.sample_rate = 16000;
        if (cfg.sample_rate != 16000) {
            throw DataError("embedding features follow the 16 kHz pathway; got sample_rate " +
                            std::to_string(cfg.sample_rate));
        }
        if (cfg.wlm_layer < 0 || cfg.wlm_layer > 12) {
            throw DataError("wlm_layer must be in 0..12");
        }
        if (cfg.embeddings_dir.empty()) throw DataError("embeddings_dir is required for wlm");
    } else if (cfg.sample_rate == 0) {
        cfg.sample_rate = prep.manifest.native_sr;
    }

    // training defaults per system unless the config pinned them
    if (!cfg.max_epochs_set) {
        cfg.train.max_epochs = cfg.feature == FeatureKind::EndToEnd ? 100 : 30;
    }
    if (!cfg.early_stop_patience_set) {
        cfg.train.early_stop_patience = cfg.feature == FeatureKind::EndToEnd ? 20 : 30;
    }
    cfg.train.seed = cfg.seed;

    prep.space = build_label_space(prep.manifest, cfg.task);
    prep.split = eval::split_dataset(prep.manifest, cfg.task, cfg.seed);

    AudioCache cache(cfg.resample_taps, cfg.resample_cutoff);
    const int audio_rate = cfg.sample_rate == prep.manifest.native_sr ? 0 : cfg.sample_rate;

    switch (cfg.feature) {
        case FeatureKind::Catch24: {
            prep.train_ds = make_catch24_dataset(prep.split.train, cfg.task, prep.space, audio_rate, cache);
            prep.val_ds = make_catch24_dataset(prep.split.val, cfg.task, prep.space, audio_rate, cache);
            prep.test_ds = make_catch24_dataset(prep.split.test, cfg.task, prep.space, audio_rate, cache);
            nnet::MLPSpec spec;
            spec.input_dim = catch24::kNumFeatures;
            spec.n_classes = prep.space.n_classes();
            prep.model_spec = spec;
            break;
        }
        case FeatureKind::PooledEmbedding: {
            prep.train_ds = make_pooled_dataset(prep.split.train, cfg.task, prep.space,
                                                cfg.embeddings_dir, cfg.wlm_layer);
            prep.val_ds = make_pooled_dataset(prep.split.val, cfg.task, prep.space,
                                              cfg.embeddings_dir, cfg.wlm_layer);
            prep.test_ds = make_pooled_dataset(prep.split.test, cfg.task, prep.space,
                                               cfg.embeddings_dir, cfg.wlm_layer);
            nnet::MLPSpec spec;
            spec.input_dim = static_cast<int>(prep.train_ds.inputs.front().size());
            spec.n_classes = prep.space.n_classes();
            prep.model_spec = spec;
            break;
        }
        case FeatureKind::EndToEnd: {
            prep.train_ds = make_wave_dataset(prep.split.train, cfg.task, prep.space, audio_rate, cache);
            prep.val_ds = make_wave_dataset(prep.split.val, cfg.task, prep.space, audio_rate, cache);
            prep.test_ds = make_wave_dataset(prep.split.test, cfg.task, prep.space, audio_rate, cache);
            prep.model_spec = nnet::CNNSpec::for_rate(cfg.sample_rate, prep.space.n_classes());
            break;
        }
    }
    return prep;
}

} // namespace

ExperimentResult run_experiment(const ExperimentConfig& config) {
    PreparedExperiment prep = prepare_experiment(config);
    const ExperimentConfig& cfg = prep.cfg;

    fs::create_directories(cfg.output_dir);
    eval::save_split((fs::path(cfg.output_dir) / "split").string(), prep.split);

    nnet::Model model = nnet::Model::init(prep.model_spec, cfg.seed);
    if (cfg.feature != FeatureKind::EndToEnd) fit_standardizer(model, prep.train_ds);

    nnet::Model trained = nnet::train(std::move(model), prep.train_ds, prep.val_ds, cfg.train);

    const auto preds = nnet::predict_batch(trained, prep.test_ds.inputs, cfg.train.grad_workers);
    const auto report = eval::evaluate(preds, prep.test_ds.labels, prep.space.n_classes());

    ExperimentResult result;
    result.report = report;
    result.test_uar = report.uar;
    result.classes = prep.space.classes;
    result.report_path = (fs::path(cfg.output_dir) / "report.json").string();
    result.checkpoint_path = (fs::path(cfg.output_dir) / "model.mkm").string();
    result.history_path = (fs::path(cfg.output_dir) / "history.csv").string();

    {
        std::ofstream out(result.report_path, std::ios::trunc);
        if (!out) throw DataError("cannot write report: " + result.report_path);
        out << json_report(cfg, report, prep.space, prep.manifest.dataset_name);
    }
    trained.save(result.checkpoint_path);
    nnet::save_history_csv(result.history_path, trained);
    return result;
}

ExperimentResult evaluate_checkpoint(const ExperimentConfig& config,
                                     const std::string& checkpoint_path) {
    PreparedExperiment prep = prepare_experiment(config);
    const ExperimentConfig& cfg = prep.cfg;
    const nnet::Model model = nnet::Model::load(checkpoint_path);
    if (model.n_classes() != prep.space.n_classes()) {
        throw DataError("checkpoint expects " + std::to_string(model.n_classes()) +
                        " classes, manifest task has " + std::to_string(prep.space.n_classes()));
    }

    const auto preds = nnet::predict_batch(model, prep.test_ds.inputs, cfg.train.grad_workers);
    const auto report = eval::evaluate(preds, prep.test_ds.labels, prep.space.n_classes());

    ExperimentResult result;
    result.report = report;
    result.test_uar = report.uar;
    result.classes = prep.space.classes;
    result.checkpoint_path = checkpoint_path;
    result.report_path = (fs::path(cfg.output_dir) / "eval_report.json").string();

    fs::create_directories(cfg.output_dir);
    std::ofstream out(result.report_path, std::ios::trunc);
    if (!out) throw DataError("cannot write report: " + result.report_path);
    out << json_report(cfg, report, prep.space, prep.manifest.dataset_name);
    return result;
}

// --- synthetic data --------------------------------------------------------------

Manifest make_synthetic_dataset(const SynthSpec& spec, std::uint64_t seed,
                                const std::string& out_dir) {
    if (spec.tones_hz.size() < 2) throw DataError("synthetic dataset needs >= 2 classes");
    if (spec.per_class < 1) throw DataError("synthetic dataset needs >= 1 segment per class");
    if (spec.sample_rate <= 0) throw DataError("synthetic dataset: bad sample rate");
    if (!(spec.min_dur_s > 0.0) || !(spec.max_dur_s >= spec.min_dur_s)) {
        throw DataError("synthetic dataset: bad duration range");
    }
    for (std::size_t c = 0; c < spec.tones_hz.size(); ++c) {
        const double f = spec.tones_hz[c];
        if (!(f > 0.0) || f >= spec.sample_rate / 2.0) {
            throw DataError("synthetic tone " + std::to_string(f) + " Hz outside (0, rate/2)");
        }
        for (std::size_t o = 0; o < c; ++o) {
            if (spec.tones_hz[o] == f) throw DataError("synthetic tone frequencies must be distinct");
        }
    }

    fs::create_directories(fs::path(out_dir) / "wavs");
    Manifest m;
    m.dataset_name = "synthetic";
    m.native_sr = spec.sample_rate;

    constexpr double kToneAmp = 0.5;
    const double noise_sigma =
        std::sqrt(kToneAmp * kToneAmp / 2.0 / std::pow(10.0, spec.snr_db / 10.0));

    std::size_t index = 0;
    for (std::size_t c = 0; c < spec.tones_hz.size(); ++c) {
        const double tone = spec.tones_hz[c];
        const std::string class_label = "tone" + std::to_string(static_cast<long>(std::lround(tone)));
        for (int i = 0; i < spec.per_class; ++i, ++index) {
            // per-segment stream so generation order never matters
            std::mt19937_64 rng(seed * 0x9e3779b97f4a7c15ULL + index + 1);
            std::uniform_real_distribution<double> dur_dist(spec.min_dur_s, spec.max_dur_s);
            std::uniform_real_distribution<double> phase_dist(0.0, 2.0 * std::numbers::pi);
            std::normal_distribution<double> noise(0.0, noise_sigma);

            const double dur = dur_dist(rng);
            const double phase = phase_dist(rng);
            const auto n = static_cast<std::size_t>(std::llround(dur * spec.sample_rate));

            Waveform w;
            w.sample_rate = spec.sample_rate;
            w.samples.resize(n);
            const double omega = 2.0 * std::numbers::pi * tone / spec.sample_rate;
            for (std::size_t t = 0; t < n; ++t) {
                const double v = kToneAmp * std::sin(omega * static_cast<double>(t) + phase) + noise(rng);
                w.samples[t] = std::clamp(v, -1.0, 1.0);
            }

            char id[64];
            std::snprintf(id, sizeof id, "%s_%04zu", class_label.c_str(), static_cast<std::size_t>(i));
            const std::string wav_path = (fs::path(out_dir) / "wavs" / (std::string(id) + ".wav")).string();
            write_wav16(wav_path, w);

            SegmentRecord r;
            r.segment_id = id;
            r.wav_path = wav_path;
            r.start_s = 0.0;
            r.end_s = static_cast<double>(n) / spec.sample_rate;
            r.call_type = class_label;
            r.caller_id = "caller" + std::to_string(c * 2 + static_cast<std::size_t>(i % 2));
            r.sex = (i % 2 == 0) ? "f" : "m";
            m.records.push_back(std::move(r));
        }
    }
    save_manifest((fs::path(out_dir) / "manifest.csv").string(), m);
    return m;
}

// --- results table ------------------------------------------------------------------

std::vector<ResultsRow> collect_results(const std::vector<std::string>& report_paths) {
    if (report_paths.empty()) throw DataError("results table: no reports given");
    std::vector<ResultsRow> rows;
    std::map<std::string, double> seen; // duplicate detection
    for (const auto& path : report_paths) {
        std::ifstream in(path);
        if (!in) throw DataError("cannot open report: " + path);
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw DataError("malformed report " + path + ": " + e.what());
        }
        ResultsRow row;
        row.dataset = j.at("dataset").get<std::string>();
        row.feature = j.at("feature").get<std::string>();
        row.sample_rate = j.at("sample_rate").get<int>();
        row.task = j.at("task").get<std::string>();
        row.uar = j.at("test_uar").get<double>();
        const std::string key =
            row.dataset + "|" + row.feature + "|" + std::to_string(row.sample_rate) + "|" + row.task;
        if (auto it = seen.find(key); it != seen.end()) {
            if (it->second != row.uar) {
                throw DataError("conflicting duplicate result rows for " + key);
            }
            continue;
        }
        seen[key] = row.uar;
        rows.push_back(std::move(row));
    }
    // flag best per dataset/task
    for (auto& row : rows) {
        row.best = true;
        for (const auto& other : rows) {
            if (other.dataset == row.dataset && other.task == row.task && other.uar > row.uar) {
                row.best = false;
                break;
            }
        }
    }
    std::stable_sort(rows.begin(), rows.end(), [](const ResultsRow& a, const ResultsRow& b) {
        if (a.dataset != b.dataset) return a.dataset < b.dataset;
        if (a.feature != b.feature) return a.feature < b.feature;
        if (a.sample_rate != b.sample_rate) return a.sample_rate > b.sample_rate;
        return a.task < b.task;
    });
    return rows;
}

void write_results_csv(const std::vector<ResultsRow>& rows, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("cannot open for write: " + path);
    out << "dataset,feature,sample_rate,task,uar,best\n";
    char buf[64];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%.10g", r.uar);
        out << r.dataset << ',' << r.feature << ',' << r.sample_rate << ',' << r.task << ','
            << buf << ',' << (r.best ? 1 : 0) << "\n";
    }
    if (!out) throw DataError("write failure: " + path);
}

void render_results_table(const std::vector<ResultsRow>& rows, std::ostream& out) {
    // pivot: one line per dataset/feature/rate, one column per task
    const std::vector<std::string> task_cols = {"call-type", "caller", "sex"};
    struct Key {
        std::string dataset, feature;
        int rate;
        bool operator<(const Key& o) const {
            if (dataset != o.dataset) return dataset < o.dataset;
            if (feature != o.feature) return feature < o.feature;
            return rate > o.rate;
        }
    };
    std::map<Key, std::map<std::string, const ResultsRow*>> grid;
    for (const auto& r : rows) grid[{r.dataset, r.feature, r.sample_rate}][r.task] = &r;

    char buf[160];
    out << "dataset      feature  rate_hz   call-type     caller        sex\n";
    out << "-------      -------  -------   ---------     ------        ---\n";
    for (const auto& [key, cells] : grid) {
        std::snprintf(buf, sizeof buf, "%-12s %-8s %-8d ", key.dataset.c_str(),
                      key.feature.c_str(), key.rate);
        out << buf;
        for (const auto& task : task_cols) {
            const auto it = cells.find(task);
            if (it == cells.end()) {
                std::snprintf(buf, sizeof buf, " %-13s", "N/A");
            } else {
                std::snprintf(buf, sizeof buf, " %6.2f%-7s", it->second->uar,
                              it->second->best ? " *" : "");
            }
            out << buf;
        }
        out << "\n";
    }
    out << "(* best per dataset/task)\n";
}

// --- layer probing ----------------------------------------------------------------------

analysis::LayerMatrix probe_layer_matrix(const Manifest& manifest,
                                         const std::string& embeddings_dir,
                                         const std::vector<Task>& tasks, int n_layers,
                                         const nnet::TrainConfig& train_config,
                                         std::uint64_t seed) {
    if (tasks.empty()) throw DataError("probe_layer_matrix: no tasks");
    if (n_layers < 2) throw DataError("probe_layer_matrix: need at least two layers");

    std::vector<std::string> names;
    std::vector<std::vector<double>> raw;
    for (const Task task : tasks) {
        const TaskLabelSpace space = build_label_space(manifest, task);
        const eval::SplitSet split = eval::split_dataset(manifest, task, seed);
        std::vector<double> row;
        row.reserve(static_cast<std::size_t>(n_layers));
        for (int layer = 0; layer < n_layers; ++layer) {
            const auto train_ds = make_pooled_dataset(split.train, task, space, embeddings_dir, layer);
            const auto val_ds = make_pooled_dataset(split.val, task, space, embeddings_dir, layer);
            const auto test_ds = make_pooled_dataset(split.test, task, space, embeddings_dir, layer);

            nnet::LinearProbeSpec spec;
            spec.input_dim = static_cast<int>(train_ds.inputs.front().size());
            spec.n_classes = space.n_classes();
            nnet::TrainConfig cfg = train_config;
            cfg.seed = seed;
            nnet::Model probe = nnet::Model::init(spec, seed);
            fit_standardizer(probe, train_ds);
            probe = nnet::train(std::move(probe), train_ds, val_ds, cfg);

            const auto preds = nnet::predict_batch(probe, test_ds.inputs, cfg.grad_workers);
            row.push_back(eval::uar(eval::confusion_matrix(preds, test_ds.labels, space.n_classes())));
        }
        names.push_back(task_name(task));
        raw.push_back(std::move(row));
    }
    return analysis::normalize_layer_matrix(std::move(names), std::move(raw));
}

} // namespace marmo::experiment
