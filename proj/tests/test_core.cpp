#include "hcg/core.hpp"
#include "hcg/rng.hpp"

#include "oracles.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <set>

using namespace hcg;
using testutil::make_record;
using testutil::make_truth;
using testutil::raw_box;

TEST_CASE("iou basics") {
    Box a{0, 0, 1, 1};
    CHECK(iou(a, a) == 1.0);
    CHECK(iou(a, Box{2, 2, 3, 3}) == 0.0);
    CHECK(iou(Box{0, 0, 2, 2}, Box{1, 1, 3, 3}) == doctest::Approx(1.0 / 7.0).epsilon(1e-12));
}

TEST_CASE("iou is symmetric and matches the reference on random boxes") {
    Rng rng(7);
    for (int i = 0; i < 500; ++i) {
        Box a = testutil::random_box(rng);
        Box b = testutil::random_box(rng);
        CHECK(iou(a, b) == iou(b, a));
        CHECK(iou(a, b) == doctest::Approx(oracle::ref_iou(a, b)).epsilon(1e-12));
        CHECK(iou(a, b) >= 0.0);
        CHECK(iou(a, b) <= 1.0);
    }
}

TEST_CASE("finalize keeps the argmax class above the cutoff") {
    // One confident box plus one whose top score sits below the cutoff.
    DetectionRecord rec = make_record("a", 500, 375,
                                      {raw_box({10, 10, 200, 300}, 0, 0.9818, 4),
                                       raw_box({50, 80, 150, 200}, 1, 0.2507, 4)});
    rec.raw[1].class_scores[2] = 0.0735;
    rec.raw[1].class_scores[3] = 0.0572;

    auto out = finalize(rec, 0.5);
    REQUIRE(out.size() == 1);
    CHECK(out[0].class_id == 0);
    CHECK(out[0].score == 0.9818);
}

TEST_CASE("finalize edge cases") {
    CHECK(finalize(make_record("e", 10, 10, {}), 0.5).empty());

    DetectionRecord rec = make_record("a", 10, 10,
                                      {raw_box({0, 0, 1, 1}, 0, 0.6, 2),
                                       raw_box({1, 1, 2, 2}, 1, 0.4, 2)});
    auto out = finalize(rec, 0.5);
    REQUIRE(out.size() == 1);
    CHECK(out[0].score == 0.6);

    // A score exactly at the cutoff is kept.
    rec = make_record("b", 10, 10, {raw_box({0, 0, 1, 1}, 0, 0.5, 2)});
    CHECK(finalize(rec, 0.5).size() == 1);

    CHECK_THROWS_AS(finalize(rec, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(finalize(rec, 1.5), std::invalid_argument);
}

TEST_CASE("finalize orders by score then box then class") {
    DetectionRecord rec = make_record("a", 10, 10,
                                      {raw_box({5, 5, 6, 6}, 0, 0.7, 2),
                                       raw_box({1, 1, 2, 2}, 1, 0.7, 2),
                                       raw_box({0, 0, 1, 1}, 0, 0.9, 2)});
    auto out = finalize(rec, 0.5);
    REQUIRE(out.size() == 3);
    CHECK(out[0].score == 0.9);
    CHECK(out[1].box.xmin == 1.0);  // ties by ascending box coordinates
    CHECK(out[2].box.xmin == 5.0);
}

TEST_CASE("finalize is monotone in the cutoff") {
    Rng rng(11);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<RawDetection> raws;
        int n = static_cast<int>(rng.below(6));
        for (int i = 0; i < n; ++i) {
            raws.push_back(raw_box(testutil::random_box(rng), static_cast<int>(rng.below(3)),
                                   rng.uniform(0.01, 1.0), 3));
        }
        DetectionRecord rec = make_record("r", 100, 100, raws);
        double lo = rng.uniform(0.05, 0.5);
        double hi = lo + rng.uniform(0.0, 0.5);
        CHECK(finalize(rec, hi).size() <= finalize(rec, lo).size());
    }
}

TEST_CASE("match_detections basics") {
    GroundTruth gt = make_truth("a", 100, 100, {{0, {10, 10, 50, 50}}});

    SUBCASE("perfect overlap matches") {
        std::vector<FinalDetection> dets{{{10, 10, 50, 50}, 0, 0.9}};
        auto m = match_detections(dets, gt, 0.5);
        REQUIRE(m.size() == 1);
        CHECK(m[0].det_index == 0);
        CHECK(m[0].truth_index == 0);
    }

    SUBCASE("IoU below the floor does not match") {
        std::vector<FinalDetection> dets{{{30, 30, 70, 70}, 0, 0.9}};  // IoU ~0.19
        CHECK(match_detections(dets, gt, 0.5).empty());
    }

    SUBCASE("two detections cannot share one truth") {
        std::vector<FinalDetection> dets{{{10, 10, 50, 50}, 0, 0.9}, {{11, 11, 51, 51}, 0, 0.8}};
        auto m = match_detections(dets, gt, 0.5);
        REQUIRE(m.size() == 1);
        CHECK(m[0].det_index == 0);
    }

    SUBCASE("class mismatch never matches") {
        std::vector<FinalDetection> dets{{{10, 10, 50, 50}, 1, 0.9}};
        CHECK(match_detections(dets, gt, 0.5).empty());
    }
}

TEST_CASE("match_detections is one-to-one and bounded on random instances") {
    Rng rng(23);
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<FinalDetection> dets;
        std::vector<GroundTruthObject> objs;
        int nd = static_cast<int>(rng.below(6));
        int nt = static_cast<int>(rng.below(6));
        for (int i = 0; i < nd; ++i) {
            dets.push_back({testutil::random_box(rng), static_cast<int>(rng.below(2)),
                            rng.uniform(0.0, 1.0)});
        }
        for (int i = 0; i < nt; ++i) {
            objs.push_back({static_cast<int>(rng.below(2)), testutil::random_box(rng)});
        }
        GroundTruth gt = make_truth("r", 100, 100, objs);
        auto matches = match_detections(dets, gt, 0.5);

        std::set<std::size_t> det_seen, truth_seen;
        for (const MatchPair& m : matches) {
            CHECK(det_seen.insert(m.det_index).second);
            CHECK(truth_seen.insert(m.truth_index).second);
        }
        CHECK(matches.size() <= std::min(dets.size(), gt.objects.size()));
        CHECK(matches.size() <= oracle::max_matching_count(dets, gt, 0.5));

        // Oracle equivalence against an independently coded greedy pass.
        auto ref = oracle::ref_greedy_match(dets, gt, 0.5);
        REQUIRE(matches.size() == ref.size());
    }
}

TEST_CASE("greedy matching agrees with the reference pair-for-pair") {
    GroundTruth gt = make_truth("a", 100, 100, {{0, {10, 10, 50, 50}}, {0, {60, 60, 90, 90}}});
    std::vector<FinalDetection> dets{{{12, 12, 52, 52}, 0, 0.9}, {{10, 10, 50, 50}, 0, 0.8}};
    auto m = match_detections(dets, gt, 0.5);
    auto ref = oracle::ref_greedy_match(dets, gt, 0.5);
    REQUIRE(m.size() == ref.size());
    for (std::size_t i = 0; i < m.size(); ++i) {
        CHECK(m[i].det_index == ref[i].det_index);
        CHECK(m[i].truth_index == ref[i].truth_index);
    }
}
