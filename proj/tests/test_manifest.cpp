#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <random>

#include "marmo/errors.hpp"
#include "marmo/manifest.hpp"
#include "support/test_util.hpp"

using namespace marmo;

namespace {

std::string write_file(const std::filesystem::path& path, const std::string& body) {
    std::ofstream f(path, std::ios::trunc);
    f << body;
    return path.string();
}

constexpr const char* kHeader = "segment_id,wav_path,start_s,end_s,call_type,caller_id,sex\n";

} // namespace

TEST_CASE("well-formed manifest loads verbatim") {
    const auto dir = testutil::scratch_dir("manifest_ok");
    const auto path = write_file(dir / "m.csv", std::string(kHeader) +
        "seg1,a.wav,0.0,0.5,phee,m1,f\n"
        "seg2,a.wav,0.6,0.9,trill,m2,m\n"
        "seg3,b.wav,0.0,1.2,twitter,m1,f\n");
    const Manifest m = load_manifest(path);
    REQUIRE(m.records.size() == 3);
    CHECK(m.records[0].segment_id == "seg1");
    CHECK(m.records[0].wav_path == "a.wav");
    CHECK(m.records[0].start_s == 0.0);
    CHECK(m.records[0].end_s == 0.5);
    CHECK(m.records[1].call_type == "trill");
    CHECK(m.records[2].caller_id == "m1");
    CHECK(m.records[2].sex == "f");
    CHECK(m.dataset_name == "m");
}

TEST_CASE("silence and noise rows are dropped and counted") {
    const auto dir = testutil::scratch_dir("manifest_noise");
    const auto path = write_file(dir / "m.csv", std::string(kHeader) +
        "seg1,a.wav,0.0,0.5,phee,m1,\n"
        "seg2,a.wav,0.6,0.9,noise,,\n"
        "seg3,a.wav,1.0,1.4,Silence,,\n"
        "seg4,a.wav,1.5,1.9,trill,m2,\n");
    std::size_t dropped = 0;
    const Manifest m = load_manifest(path, &dropped);
    CHECK(m.records.size() == 2);
    CHECK(dropped == 2);
}

TEST_CASE("manifest parse errors") {
    const auto dir = testutil::scratch_dir("manifest_bad");
    SUBCASE("inverted interval names the row") {
        const auto path = write_file(dir / "a.csv", std::string(kHeader) +
            "seg1,a.wav,0.9,0.5,phee,m1,\n");
        CHECK_THROWS_WITH_AS(load_manifest(path),
                             doctest::Contains("end_s must exceed"), DataError);
    }
    SUBCASE("duplicate ids are rejected") {
        const auto path = write_file(dir / "b.csv", std::string(kHeader) +
            "seg1,a.wav,0.0,0.5,phee,m1,\n"
            "seg1,a.wav,0.6,0.9,trill,m1,\n");
        CHECK_THROWS_WITH_AS(load_manifest(path), doctest::Contains("duplicate"), DataError);
    }
    SUBCASE("missing columns are rejected") {
        const auto path = write_file(dir / "c.csv", std::string(kHeader) +
            "seg1,a.wav,0.0,0.5,phee\n");
        CHECK_THROWS_AS(load_manifest(path), DataError);
    }
    SUBCASE("wrong header is rejected") {
        const auto path = write_file(dir / "d.csv", "id,path\nseg1,a.wav\n");
        CHECK_THROWS_AS(load_manifest(path), DataError);
    }
    SUBCASE("malformed time is rejected") {
        const auto path = write_file(dir / "e.csv", std::string(kHeader) +
            "seg1,a.wav,zero,0.5,phee,m1,\n");
        CHECK_THROWS_WITH_AS(load_manifest(path), doctest::Contains("malformed"), DataError);
    }
}

TEST_CASE("manifest metadata line carries dataset name and rate") {
    const auto dir = testutil::scratch_dir("manifest_meta");
    const auto path = write_file(dir / "m.csv",
        "# dataset=colony1 native_sr=44100\n" + std::string(kHeader) +
        "seg1,a.wav,0.0,0.5,phee,m1,\n");
    const Manifest m = load_manifest(path);
    CHECK(m.dataset_name == "colony1");
    CHECK(m.native_sr == 44100);
}

TEST_CASE("save/load round trip preserves records and filtering is idempotent") {
    const auto dir = testutil::scratch_dir("manifest_rt");
    Manifest m;
    m.dataset_name = "rt";
    m.native_sr = 16000;
    for (int i = 0; i < 5; ++i) {
        SegmentRecord r;
        r.segment_id = "s" + std::to_string(i);
        r.wav_path = "w.wav";
        r.start_s = i * 0.5;
        r.end_s = i * 0.5 + 0.25;
        r.call_type = i % 2 == 0 ? "phee" : "trill";
        r.caller_id = "c" + std::to_string(i % 3);
        m.records.push_back(r);
    }
    const auto path = (dir / "m.csv").string();
    save_manifest(path, m);
    const Manifest back = load_manifest(path);
    REQUIRE(back.records.size() == m.records.size());
    CHECK(back.dataset_name == "rt");
    CHECK(back.native_sr == 16000);
    for (std::size_t i = 0; i < m.records.size(); ++i) {
        CHECK(back.records[i].segment_id == m.records[i].segment_id);
        CHECK(back.records[i].start_s == doctest::Approx(m.records[i].start_s).epsilon(1e-9));
        CHECK(back.records[i].call_type == m.records[i].call_type);
    }
    // already-filtered manifest: loading changes nothing
    save_manifest(path, back);
    const Manifest again = load_manifest(path);
    CHECK(again.records.size() == back.records.size());
}

TEST_CASE("label space is lexicographic and order-independent") {
    Manifest m;
    for (const char* ct : {"twitter", "phee", "trill", "phee"}) {
        SegmentRecord r;
        r.segment_id = "s" + std::to_string(m.records.size());
        r.wav_path = "w.wav";
        r.start_s = 0.0;
        r.end_s = 0.1;
        r.call_type = ct;
        m.records.push_back(r);
    }
    const auto space = build_label_space(m, Task::CallType);
    REQUIRE(space.n_classes() == 3);
    CHECK(space.classes == std::vector<std::string>{"phee", "trill", "twitter"});
    CHECK(space.index_of("phee") == 0);
    CHECK(space.index_of("trill") == 1);
    CHECK(space.index_of("twitter") == 2);
    CHECK(space.index_of("unknown") == -1);

    // duplicate rows leave the space unchanged
    m.records.push_back(m.records.front());
    m.records.back().segment_id = "dup";
    const auto space2 = build_label_space(m, Task::CallType);
    CHECK(space2.classes == space.classes);

    // record order does not matter
    std::reverse(m.records.begin(), m.records.end());
    const auto space3 = build_label_space(m, Task::CallType);
    CHECK(space3.classes == space.classes);
}

TEST_CASE("missing task labels: records excluded, too few classes rejected") {
    Manifest m;
    for (int i = 0; i < 4; ++i) {
        SegmentRecord r;
        r.segment_id = "s" + std::to_string(i);
        r.wav_path = "w.wav";
        r.start_s = 0.0;
        r.end_s = 0.1;
        r.call_type = i % 2 == 0 ? "phee" : "trill";
        // no sex labels anywhere
        m.records.push_back(r);
    }
    CHECK_THROWS_WITH_AS(build_label_space(m, Task::Sex),
                         doctest::Contains("insufficient classes"), DataError);
    CHECK(records_with_label(m, Task::Sex).empty());
    CHECK(records_with_label(m, Task::CallType).size() == 4);
}

TEST_CASE("duration statistics") {
    SUBCASE("closed-form case: 100/200/300 ms") {
        Manifest m;
        for (double ms : {100.0, 200.0, 300.0}) {
            SegmentRecord r;
            r.segment_id = "s" + std::to_string(m.records.size());
            r.wav_path = "w.wav";
            r.start_s = 0.0;
            r.end_s = ms / 1000.0;
            r.call_type = "phee";
            m.records.push_back(r);
        }
        const auto stats = duration_stats(m);
        CHECK(stats.median_ms == doctest::Approx(200.0));
        CHECK(stats.total_minutes == doctest::Approx(0.01));
        CHECK(stats.count == 3);
    }
    SUBCASE("dataset-shaped manifest with 127 ms median") {
        // mimic a short-call corpus whose median vocalization is 127 ms
        Manifest m;
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> low(0.040, 0.126);
        std::uniform_real_distribution<double> high(0.128, 1.000);
        for (int i = 0; i < 501; ++i) {
            SegmentRecord r;
            r.segment_id = "s" + std::to_string(i);
            r.wav_path = "w.wav";
            r.start_s = 0.0;
            if (i < 250) r.end_s = low(rng);
            else if (i == 250) r.end_s = 0.127;
            else r.end_s = high(rng);
            r.call_type = "phee";
            m.records.push_back(r);
        }
        const auto stats = duration_stats(m);
        CHECK(stats.median_ms == doctest::Approx(127.0));
        CHECK(stats.count == 501);
    }
    SUBCASE("random manifest matches a sort-based oracle") {
        Manifest m;
        std::mt19937_64 rng(11);
        std::uniform_real_distribution<double> dur(0.01, 2.0);
        std::vector<double> durations;
        for (int i = 0; i < 1000; ++i) {
            SegmentRecord r;
            r.segment_id = "s" + std::to_string(i);
            r.wav_path = "w.wav";
            r.start_s = 1.0;
            r.end_s = 1.0 + dur(rng);
            r.call_type = "x";
            durations.push_back(r.duration_s());
            m.records.push_back(r);
        }
        std::sort(durations.begin(), durations.end());
        const double median = 0.5 * (durations[499] + durations[500]);
        double total = 0.0;
        for (double d : durations) total += d;
        const auto stats = duration_stats(m);
        CHECK(stats.median_ms == doctest::Approx(median * 1000.0).epsilon(1e-12));
        CHECK(stats.total_minutes == doctest::Approx(total / 60.0).epsilon(1e-12));
        CHECK(stats.count == m.records.size());
    }
    SUBCASE("empty manifest throws") {
        Manifest m;
        CHECK_THROWS_AS(duration_stats(m), DataError);
    }
}

TEST_CASE("task names parse in both spellings") {
    CHECK(task_from_string("call-type") == Task::CallType);
    CHECK(task_from_string("CTID") == Task::CallType);
    CHECK(task_from_string("caller") == Task::Caller);
    CHECK(task_from_string("clid") == Task::Caller);
    CHECK(task_from_string("sex") == Task::Sex);
    CHECK(task_from_string("SID") == Task::Sex);
    CHECK_THROWS_AS(task_from_string("bogus"), DataError);
}
