// Copyright 2026 Marmokit Contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "marmo/manifest.hpp"

namespace marmo::eval {

/// Stratified 70:20:10 split of the labeled segments of a task.
struct SplitSet {
    Manifest train;
    Manifest val;
    Manifest test;
    std::uint64_t seed = 0;
    Task task = Task::CallType;
};

/// Stratified per class with largest-remainder rounding, so per-class
/// counts stay within one segment of the exact 70:20:10 proportions.
/// Deterministic given (manifest record order, task, seed). Throws
/// DataError when a class cannot populate all three splits.
SplitSet split_dataset(const Manifest& m, Task task, std::uint64_t seed);

/// Writes train/val/test manifest CSVs plus a JSON sidecar with the seed
/// and per-class counts into dir (created if needed).
void save_split(const std::string& dir, const SplitSet& split);

/// Row-major n_c x n_c count matrix; entry (i, j) counts truth i predicted j.
struct Confusion {
    int n_classes = 0;
    std::vector<long> counts; // n_classes * n_classes

    long& at(int truth, int pred) { return counts[static_cast<std::size_t>(truth) * n_classes + pred]; }
    long at(int truth, int pred) const { return counts[static_cast<std::size_t>(truth) * n_classes + pred]; }
};

Confusion confusion_matrix(std::span<const int> preds, std::span<const int> truths, int n_classes);

/// Per-class recall (diagonal over row sum). Throws DataError on an empty row.
std::vector<double> per_class_recall(const Confusion& c);

/// Unweighted Average Recall in percent: 100 * mean of per-class recalls.
double uar(const Confusion& c);

/// Chance level in percent: 100 / n_c. Requires n_c >= 2.
double chance_level(int n_classes);

struct EvalReport {
    Confusion confusion;
    std::vector<double> recalls;
    double uar = 0.0;
    int n_classes = 0;
    double chance = 0.0;
};

EvalReport evaluate(std::span<const int> preds, std::span<const int> truths, int n_classes);

} // namespace marmo::eval
