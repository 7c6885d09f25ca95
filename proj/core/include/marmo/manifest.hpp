// Copyright 2026 Marmokit Contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace marmo {

/// Classification tasks over vocalization segments.
enum class Task { CallType, Caller, Sex };

const char* task_name(Task t);                 // "call-type" / "caller" / "sex"
Task task_from_string(const std::string& s);   // accepts call-type|ctid, caller|clid, sex|sid

/// One annotated vocalization segment. Empty label fields mean the
/// annotation is absent for that task.
struct SegmentRecord {
    std::string segment_id;
    std::string wav_path;
    double start_s = 0.0;
    double end_s = 0.0;
    std::string call_type;
    std::string caller_id;
    std::string sex;

    double duration_s() const { return end_s - start_s; }
    const std::string& label(Task t) const;
};

struct Manifest {
    std::vector<SegmentRecord> records;
    std::string dataset_name;
    int native_sr = 0; // 0 = unknown, inferred from audio on demand
};

/// Loads a manifest CSV with header
///   segment_id,wav_path,start_s,end_s,call_type,caller_id,sex
/// An optional first line `# dataset=<name> native_sr=<hz>` carries
/// dataset metadata. Rows whose call_type is `silence` or `noise`
/// (case-insensitive) are dropped; *dropped reports how many.
/// Throws DataError on duplicate ids, malformed times, or missing columns.
Manifest load_manifest(const std::string& path, std::size_t* dropped = nullptr);

void save_manifest(const std::string& path, const Manifest& m);

/// Label space of a task: sorted unique labels, class index = lexicographic rank.
struct TaskLabelSpace {
    Task task = Task::CallType;
    std::vector<std::string> classes;

    int n_classes() const { return static_cast<int>(classes.size()); }
    int index_of(const std::string& label) const; // -1 if unknown
};

/// Builds the label space from records that carry the task label; records
/// lacking it are ignored. Throws DataError when fewer than two classes
/// remain ("insufficient classes").
TaskLabelSpace build_label_space(const Manifest& m, Task task);

/// Records of m that carry a label for the task.
std::vector<SegmentRecord> records_with_label(const Manifest& m, Task task);

struct DurationStats {
    double median_ms = 0.0;
    double total_minutes = 0.0;
    std::size_t count = 0;
};

/// Median segment duration (ms), total duration (minutes), segment count.
/// Even-sized medians average the two middle values.
DurationStats duration_stats(const Manifest& m);

} // namespace marmo
