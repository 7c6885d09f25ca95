// Copyright 2026 Marmokit Contributors
// SPDX-License-Identifier: Apache-2.0

#include "marmo/eval.hpp"

#include <algorithm>
#include <array>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>

#include <nlohmann/json.hpp>

#include "marmo/errors.hpp"

namespace marmo::eval {

namespace {

constexpr std::array<double, 3> kRatios = {0.7, 0.2, 0.1};

// Largest-remainder allocation of n into three splits; ties prefer a
// still-empty split, then train > val > test order.
std::array<std::size_t, 3> allocate_70_20_10(std::size_t n) {
    std::array<std::size_t, 3> alloc{};
    std::array<double, 3> frac{};
    std::size_t used = 0;
    for (int s = 0; s < 3; ++s) {
        const double ideal = kRatios[static_cast<std::size_t>(s)] * static_cast<double>(n);
        alloc[static_cast<std::size_t>(s)] = static_cast<std::size_t>(ideal);
        frac[static_cast<std::size_t>(s)] = ideal - static_cast<double>(alloc[static_cast<std::size_t>(s)]);
        used += alloc[static_cast<std::size_t>(s)];
    }
    std::array<int, 3> order = {0, 1, 2};
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        const auto au = static_cast<std::size_t>(a);
        const auto bu = static_cast<std::size_t>(b);
        if (frac[au] != frac[bu]) return frac[au] > frac[bu];
        const bool a_empty = alloc[au] == 0;
        const bool b_empty = alloc[bu] == 0;
        if (a_empty != b_empty) return a_empty;
        return a < b;
    });
    for (std::size_t r = 0; r < n - used; ++r) {
        alloc[static_cast<std::size_t>(order[r % 3])] += 1;
    }
    return alloc;
}

} // namespace

SplitSet split_dataset(const Manifest& m, Task task, std::uint64_t seed) {
    const TaskLabelSpace space = build_label_space(m, task);
    const auto labeled = records_with_label(m, task);

    // group record indices per class, in manifest order
    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < labeled.size(); ++i) {
        by_class[space.index_of(labeled[i].label(task))].push_back(i);
    }

    SplitSet out;
    out.seed = seed;
    out.task = task;
    for (Manifest* part : {&out.train, &out.val, &out.test}) {
        part->dataset_name = m.dataset_name;
        part->native_sr = m.native_sr;
    }

    std::mt19937_64 rng(seed);
    for (int c = 0; c < space.n_classes(); ++c) {
        auto& idx = by_class[c];
        const std::size_t n = idx.size();
        if (n < 3) {
            throw DataError("class '" + space.classes[static_cast<std::size_t>(c)] +
                            "' has " + std::to_string(n) + " segments; need >= 3 to stratify");
        }
        const auto alloc = allocate_70_20_10(n);
        if (alloc[0] == 0 || alloc[1] == 0 || alloc[2] == 0) {
            throw DataError("class '" + space.classes[static_cast<std::size_t>(c)] +
                            "' too small to populate train/val/test (" + std::to_string(n) +
                            " segments)");
        }
        std::shuffle(idx.begin(), idx.end(), rng);
        std::size_t pos = 0;
        Manifest* parts[3] = {&out.train, &out.val, &out.test};
        for (int s = 0; s < 3; ++s) {
            for (std::size_t k = 0; k < alloc[static_cast<std::size_t>(s)]; ++k) {
                parts[s]->records.push_back(labeled[idx[pos++]]);
            }
        }
    }
    return out;
}

void save_split(const std::string& dir, const SplitSet& split) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    save_manifest((fs::path(dir) / "train.csv").string(), split.train);
    save_manifest((fs::path(dir) / "val.csv").string(), split.val);
    save_manifest((fs::path(dir) / "test.csv").string(), split.test);

    const TaskLabelSpace space = build_label_space(split.train, split.task);
    nlohmann::json j;
    j["seed"] = split.seed;
    j["task"] = task_name(split.task);
    j["dataset"] = split.train.dataset_name;
    nlohmann::json counts;
    const Manifest* parts[3] = {&split.train, &split.val, &split.test};
    const char* names[3] = {"train", "val", "test"};
    for (int s = 0; s < 3; ++s) {
        nlohmann::json per_class;
        for (const auto& cls : space.classes) {
            long n = 0;
            for (const auto& r : parts[s]->records) {
                if (r.label(split.task) == cls) ++n;
            }
            per_class[cls] = n;
        }
        counts[names[s]] = per_class;
    }
    j["per_class_counts"] = counts;

    std::ofstream out(fs::path(dir) / "split.json", std::ios::trunc);
    if (!out) throw DataError("cannot write split sidecar in " + dir);
    out << j.dump(2) << "\n";
}

Confusion confusion_matrix(std::span<const int> preds, std::span<const int> truths, int n_classes) {
    if (preds.size() != truths.size()) {
        throw DataError("confusion_matrix: preds and truths differ in length");
    }
    if (n_classes < 1) throw DataError("confusion_matrix: n_classes must be positive");
    Confusion c;
    c.n_classes = n_classes;
    c.counts.assign(static_cast<std::size_t>(n_classes) * n_classes, 0);
    for (std::size_t i = 0; i < preds.size(); ++i) {
        const int t = truths[i];
        const int p = preds[i];
        if (t < 0 || t >= n_classes || p < 0 || p >= n_classes) {
            throw DataError("confusion_matrix: label out of range at item " + std::to_string(i));
        }
        ++c.at(t, p);
    }
    return c;
}

std::vector<double> per_class_recall(const Confusion& c) {
    std::vector<double> recalls(static_cast<std::size_t>(c.n_classes));
    for (int i = 0; i < c.n_classes; ++i) {
        long row = 0;
        for (int j = 0; j < c.n_classes; ++j) row += c.at(i, j);
        if (row == 0) {
            throw DataError("per_class_recall: class " + std::to_string(i) + " absent from truths");
        }
        recalls[static_cast<std::size_t>(i)] =
            static_cast<double>(c.at(i, i)) / static_cast<double>(row);
    }
    return recalls;
}

double uar(const Confusion& c) {
    const auto recalls = per_class_recall(c);
    double sum = 0.0;
    for (double r : recalls) sum += r;
    return 100.0 * sum / static_cast<double>(recalls.size());
}

double chance_level(int n_classes) {
    if (n_classes < 2) throw DataError("chance_level: need at least two classes");
    return 100.0 / static_cast<double>(n_classes);
}

EvalReport evaluate(std::span<const int> preds, std::span<const int> truths, int n_classes) {
    EvalReport r;
    r.confusion = confusion_matrix(preds, truths, n_classes);
    r.recalls = per_class_recall(r.confusion);
    double sum = 0.0;
    for (double v : r.recalls) sum += v;
    r.uar = 100.0 * sum / static_cast<double>(r.recalls.size());
    r.n_classes = n_classes;
    r.chance = chance_level(n_classes);
    return r;
}

} // namespace marmo::eval
