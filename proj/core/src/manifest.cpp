// Copyright 2026 Marmokit Contributors
// SPDX-License-Identifier: Apache-2.0

#include "marmo/manifest.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "marmo/errors.hpp"

namespace marmo {

namespace {

const char* kHeader = "segment_id,wav_path,start_s,end_s,call_type,caller_id,sex";

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

bool is_silence_or_noise(const std::string& call_type) {
    const std::string s = lower(call_type);
    return s == "silence" || s == "noise";
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

double parse_time(const std::string& s, std::size_t line_no, const char* field) {
    double v = 0.0;
    const char* begin = s.data();
    const char* end = begin + s.size();
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc{} || ptr != end) {
        throw DataError("manifest line " + std::to_string(line_no) + ": malformed " + field +
                        " '" + s + "'");
    }
    return v;
}

} // namespace

const char* task_name(Task t) {
    switch (t) {
        case Task::CallType: return "call-type";
        case Task::Caller: return "caller";
        case Task::Sex: return "sex";
    }
    return "?";
}

Task task_from_string(const std::string& s) {
    const std::string v = lower(s);
    if (v == "call-type" || v == "calltype" || v == "call_type" || v == "ctid") return Task::CallType;
    if (v == "caller" || v == "caller-id" || v == "caller_id" || v == "clid") return Task::Caller;
    if (v == "sex" || v == "sid") return Task::Sex;
    throw DataError("unknown task '" + s + "' (expected call-type, caller, or sex)");
}

const std::string& SegmentRecord::label(Task t) const {
    switch (t) {
        case Task::CallType: return call_type;
        case Task::Caller: return caller_id;
        case Task::Sex: return sex;
    }
    return call_type;
}

Manifest load_manifest(const std::string& path, std::size_t* dropped) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open manifest: " + path);

    Manifest m;
    // default dataset name: file stem
    {
        std::string stem = path;
        if (auto pos = stem.find_last_of("/\\"); pos != std::string::npos) stem = stem.substr(pos + 1);
        if (auto pos = stem.rfind('.'); pos != std::string::npos) stem = stem.substr(0, pos);
        m.dataset_name = stem;
    }

    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    std::size_t n_dropped = 0;
    std::set<std::string> seen_ids;

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            // optional metadata: # dataset=<name> native_sr=<hz>
            std::istringstream meta(line.substr(1));
            std::string tok;
            while (meta >> tok) {
                if (auto eq = tok.find('='); eq != std::string::npos) {
                    const std::string key = tok.substr(0, eq);
                    const std::string val = tok.substr(eq + 1);
                    if (key == "dataset") m.dataset_name = val;
                    else if (key == "native_sr") m.native_sr = std::stoi(val);
                }
            }
            continue;
        }
        if (!header_seen) {
            if (line != kHeader) {
                throw DataError("manifest header mismatch in " + path + " (expected '" +
                                std::string(kHeader) + "')");
            }
            header_seen = true;
            continue;
        }
        auto fields = split_csv_line(line);
        if (fields.size() != 7) {
            throw DataError("manifest line " + std::to_string(line_no) + ": expected 7 columns, got " +
                            std::to_string(fields.size()));
        }
        SegmentRecord r;
        r.segment_id = fields[0];
        r.wav_path = fields[1];
        r.start_s = parse_time(fields[2], line_no, "start_s");
        r.end_s = parse_time(fields[3], line_no, "end_s");
        r.call_type = fields[4];
        r.caller_id = fields[5];
        r.sex = fields[6];

        if (r.segment_id.empty()) {
            throw DataError("manifest line " + std::to_string(line_no) + ": empty segment_id");
        }
        if (!(r.end_s > r.start_s) || r.start_s < 0.0) {
            throw DataError("manifest line " + std::to_string(line_no) + " (" + r.segment_id +
                            "): end_s must exceed start_s >= 0");
        }
        if (!seen_ids.insert(r.segment_id).second) {
            throw DataError("duplicate segment_id '" + r.segment_id + "' in " + path);
        }
        if (is_silence_or_noise(r.call_type)) {
            ++n_dropped;
            continue;
        }
        m.records.push_back(std::move(r));
    }
    if (!header_seen) throw DataError("manifest has no header: " + path);
    if (dropped) *dropped = n_dropped;
    return m;
}

void save_manifest(const std::string& path, const Manifest& m) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("cannot open for write: " + path);
    out << "# dataset=" << m.dataset_name;
    if (m.native_sr > 0) out << " native_sr=" << m.native_sr;
    out << "\n" << kHeader << "\n";
    char buf[64];
    for (const auto& r : m.records) {
        out << r.segment_id << ',' << r.wav_path << ',';
        std::snprintf(buf, sizeof buf, "%.6f", r.start_s);
        out << buf << ',';
        std::snprintf(buf, sizeof buf, "%.6f", r.end_s);
        out << buf << ',' << r.call_type << ',' << r.caller_id << ',' << r.sex << "\n";
    }
    if (!out) throw DataError("write failure: " + path);
}

TaskLabelSpace build_label_space(const Manifest& m, Task task) {
    std::set<std::string> labels;
    for (const auto& r : m.records) {
        const auto& l = r.label(task);
        if (!l.empty()) labels.insert(l);
    }
    if (labels.size() < 2) {
        throw DataError(std::string("insufficient classes for task ") + task_name(task) + " (need >= 2, found " +
                        std::to_string(labels.size()) + ")");
    }
    TaskLabelSpace space;
    space.task = task;
    space.classes.assign(labels.begin(), labels.end()); // std::set is already sorted
    return space;
}

int TaskLabelSpace::index_of(const std::string& label) const {
    auto it = std::lower_bound(classes.begin(), classes.end(), label);
    if (it == classes.end() || *it != label) return -1;
    return static_cast<int>(it - classes.begin());
}

std::vector<SegmentRecord> records_with_label(const Manifest& m, Task task) {
    std::vector<SegmentRecord> out;
    for (const auto& r : m.records) {
        if (!r.label(task).empty()) out.push_back(r);
    }
    return out;
}

DurationStats duration_stats(const Manifest& m) {
    if (m.records.empty()) throw DataError("duration_stats: empty manifest");
    std::vector<double> durations;
    durations.reserve(m.records.size());
    double total_s = 0.0;
    for (const auto& r : m.records) {
        durations.push_back(r.duration_s());
        total_s += r.duration_s();
    }
    std::sort(durations.begin(), durations.end());
    const std::size_t n = durations.size();
    double median_s;
    if (n % 2 == 1) {
        median_s = durations[n / 2];
    } else {
        median_s = 0.5 * (durations[n / 2 - 1] + durations[n / 2]);
    }
    return DurationStats{median_s * 1000.0, total_s / 60.0, n};
}

} // namespace marmo
