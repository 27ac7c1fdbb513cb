#include "hcg/synth.hpp"

#include "hcg/discriminator.hpp"
#include "hcg/evaluator.hpp"
#include "hcg/ingest.hpp"

#include "test_util.hpp"

#include <doctest.h>

#include <fstream>
#include <sstream>

using namespace hcg;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("generation is a pure function of the config") {
    SynthConfig cfg;
    cfg.seed = 123;
    cfg.image_count = 50;
    Dataset a = generate(cfg);
    Dataset b = generate(cfg);

    auto dir = testutil::make_temp_dir("synth_det");
    write_traces((dir / "a.jsonl").string(), a.small_traces);
    write_traces((dir / "b.jsonl").string(), b.small_traces);
    CHECK(slurp((dir / "a.jsonl").string()) == slurp((dir / "b.jsonl").string()));

    write_truths((dir / "ga.jsonl").string(), a.truths);
    write_truths((dir / "gb.jsonl").string(), b.truths);
    CHECK(slurp((dir / "ga.jsonl").string()) == slurp((dir / "gb.jsonl").string()));

    SynthConfig other = cfg;
    other.seed = 124;
    Dataset c = generate(other);
    write_traces((dir / "c.jsonl").string(), c.small_traces);
    CHECK(slurp((dir / "a.jsonl").string()) != slurp((dir / "c.jsonl").string()));
}

TEST_CASE("every generated box and score respects the invariants") {
    SynthConfig cfg;
    cfg.seed = 9;
    cfg.image_count = 100;
    cfg.big_recall = 0.9;
    Dataset ds = generate(cfg);
    REQUIRE(ds.truths.size() == 100);

    for (const auto& [id, gt] : ds.truths) {
        CHECK(!gt.objects.empty());
        for (const GroundTruthObject& o : gt.objects) {
            CHECK(o.box.valid());
            CHECK(o.box.xmax <= kSynthCanvasWidth);
            CHECK(o.box.ymax <= kSynthCanvasHeight);
        }
    }
    for (const auto& [id, rec] : ds.small_traces) {
        for (const RawDetection& r : rec.raw) {
            CHECK(r.box.valid());
            double top = r.max_score();
            bool in_detected = top >= cfg.detected_band.lo && top <= cfg.detected_band.hi;
            bool in_missed = top >= cfg.missed_band.lo && top <= cfg.missed_band.hi;
            bool in_noise = top >= cfg.noise_band.lo && top <= cfg.noise_band.hi;
            CHECK((in_detected || in_missed || in_noise));
        }
    }
}

TEST_CASE("a miss-free config labels everything easy") {
    SynthConfig cfg;
    cfg.seed = 5;
    cfg.image_count = 60;
    cfg.miss_a = 0.0;
    cfg.miss_b = 0.0;
    cfg.miss_c = 0.0;
    cfg.big_recall = 1.0;
    Dataset ds = generate(cfg);
    for (const auto& [id, label] : label_cases(ds.small_traces, ds.big_traces)) {
        CHECK(label == CaseLabel::Easy);
    }
}

TEST_CASE("big detections dominate small detections per image") {
    SynthConfig cfg;
    cfg.seed = 17;
    cfg.image_count = 120;
    cfg.big_recall = 1.0;
    Dataset ds = generate(cfg);
    for (const auto& [id, small] : ds.small_traces) {
        auto n_small = finalize(small, 0.5).size();
        auto n_big = finalize(ds.big_traces.at(id), 0.5).size();
        CHECK(n_big >= n_small);
    }
}

TEST_CASE("frozen default dataset keeps a mid-range difficult share") {
    SynthConfig cfg;  // the frozen defaults, seed 42, 2000 images
    Dataset ds = generate(cfg);
    auto labels = label_cases(ds.small_traces, ds.big_traces);
    long difficult = 0;
    for (const auto& [id, label] : labels) {
        if (label == CaseLabel::Difficult) ++difficult;
    }
    double share = static_cast<double>(difficult) / static_cast<double>(labels.size());
    CHECK(share >= 0.35);
    CHECK(share <= 0.65);
}

TEST_CASE("planted generation misses exactly on the planted condition") {
    SynthConfig cfg;
    cfg.seed = 42;
    cfg.image_count = 300;
    const int tau_n = 2;
    const double tau_a = 0.31;
    Dataset ds = generate_planted(cfg, tau_n, tau_a);

    auto labels = label_cases(ds.small_traces, ds.big_traces);
    long difficult = 0;
    for (const auto& [id, gt] : ds.truths) {
        const DetectionRecord& rec = ds.small_traces.at(id);

        // Objects with a sub-cutoff top score are the planted misses; an easy
        // image may carry one extra false positive but never a miss.
        int misses = 0;
        int strong = 0;
        for (const RawDetection& r : rec.raw) {
            double top = r.max_score();
            if (top >= cfg.missed_band.lo && top <= cfg.missed_band.hi) ++misses;
            if (top >= 0.5) ++strong;
        }
        double min_ratio = 1.0;
        for (const GroundTruthObject& o : gt.objects) {
            min_ratio = std::min(min_ratio, o.box.area() / (640.0 * 480.0));
        }
        bool planted = static_cast<int>(gt.objects.size()) > tau_n || min_ratio < tau_a;
        CHECK((misses >= 1) == planted);
        if (!planted) CHECK(strong >= static_cast<int>(gt.objects.size()));
        if (labels.at(id) == CaseLabel::Difficult) ++difficult;
        CHECK((labels.at(id) == CaseLabel::Difficult) == planted);
    }
    CHECK(difficult > 0);
}

TEST_CASE("planted scatter separates along both  feature axes") {
    SynthConfig cfg;
    cfg.seed = 42;
    cfg.image_count = 300;
    Dataset ds = generate_planted(cfg, 2, 0.31);
    auto labels = label_cases(ds.small_traces, ds.big_traces);
    for (const auto& [id, gt] : ds.truths) {
        double min_ratio = 1.0;
        for (const GroundTruthObject& o : gt.objects) {
            min_ratio = std::min(min_ratio, o.box.area() / (640.0 * 480.0));
        }
        bool above = static_cast<int>(gt.objects.size()) > 2 || min_ratio < 0.31;
        CHECK((labels.at(id) == CaseLabel::Difficult) == above);
    }
}
