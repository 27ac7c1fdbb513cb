#pragma once

#include "hcg/ingest.hpp"

#include <cstdint>

namespace hcg {

struct ScoreBand {
    double lo = 0.0;
    double hi = 0.0;
};

// Knobs of the synthetic trace generator. Generation is a pure function of
// this struct (seed included); identical configs serialize byte-identically.
//
// The small model emits one raw box per annotated object: a detected-band top
// score when the object is caught, a missed-band top score when it is not
// (missed objects leave a sub-cutoff box rather than vanishing), plus a few
// pure-noise boxes. The big model re-detects every object the small model
// caught and recovers missed objects with probability big_recall, so its
// detections are per-image supersets of the small model's.
struct SynthConfig {
    std::uint64_t seed = 42;
    int image_count = 2000;
    int class_count = 20;

    // weights for object counts 1..N
    std::vector<double> count_weights = {0.15, 0.20, 0.18, 0.14, 0.10,
                                         0.08, 0.06, 0.04, 0.03, 0.02};
    double area_lo = 0.01;
    double area_hi = 0.55;

    // per-object miss probability: clamp(a - b*area_ratio + c*(count-1), 0, 1)
    double miss_a = 0.15;
    double miss_b = 0.50;
    double miss_c = 0.045;

    ScoreBand detected_band{0.60, 0.99};
    ScoreBand missed_band{0.15, 0.35};
    ScoreBand noise_band{0.01, 0.10};

    // weights for 0..N noise boxes per image
    std::vector<double> noise_count_weights = {0.35, 0.35, 0.20, 0.10};

    double big_recall = 1.0;
};

// Fixed canvas; area ratios rather than absolute pixels carry the semantics.
inline constexpr int kSynthCanvasWidth = 640;
inline constexpr int kSynthCanvasHeight = 480;

// Sample a dataset (truths + small and big traces) from the config.
Dataset generate(const SynthConfig& config);

// Variant whose calibration optimum is planted by construction: the small
// model misses at least one object exactly on images where the object count
// exceeds tau_n_star or the smallest object-area ratio falls below
// tau_a_star. A handful of easy images additionally carry one high-scoring
// false-positive box, which pins the grid-search optimum to exactly
// (tau_n_star, tau_a_star) instead of leaving it tie-broken downward.
Dataset generate_planted(const SynthConfig& config, int tau_n_star = 2, double tau_a_star = 0.31);

} // namespace hcg
