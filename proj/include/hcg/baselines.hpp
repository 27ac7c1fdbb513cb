#pragma once

#include "hcg/core.hpp"
#include "hcg/discriminator.hpp"
#include "hcg/ingest.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace hcg {

enum class ScoreMethod { Random, Brenner, Top1Confidence, Semantic };

const char* to_string(ScoreMethod method);
ScoreMethod score_method_from_string(const std::string& s);

// One image's difficulty score: higher means more likely to be uploaded.
struct DifficultyScore {
    std::string image_id;
    double score = 0.0;
    ScoreMethod method = ScoreMethod::Random;
};

// Random baseline: a seeded Fisher-Yates shuffle of the sorted id list
// (mt19937_64 stream, index drawn as next_u64() % (i + 1)); the score of an
// image is its position in the shuffled order. Same seed, same scores;
// distinct ids always get distinct scores. Duplicate ids are an error.
std::vector<DifficultyScore> random_scores(const std::vector<std::string>& image_ids,
                                           std::uint64_t seed);

// Stride-2 squared gray-level difference, summed over the image in exact
// integer arithmetic: sum over y and over x in [0, width-2) of
// (f(x+2,y) - f(x,y))^2. Larger means sharper. width must be >= 3.
std::uint64_t brenner(const GrayImage& image);

// Per-class best box score averaged over all classes (0 for classes with no
// box). The record's score vectors must have class_count entries.
double top1_confidence_score(const DetectionRecord& record, int class_count);

// Blur baseline: blurrier images upload first, so the score is the negated
// Brenner value. Ties keep image_id order (ascending) via the ranking sort.
std::vector<DifficultyScore> brenner_scores(const std::map<std::string, GrayImage>& images);

// Confidence baseline: low-confidence images upload first (negated mean).
std::vector<DifficultyScore> top1_scores(const std::map<std::string, DetectionRecord>& records,
                                         int class_count);

// Difficulty ranking of the threshold discriminator, extended to a total
// order so any upload ratio selects a well-defined prefix. Images are ranked
// by the tuple (discriminator label, step-1 mismatch, estimated count,
// -min area ratio) descending; the score is the dense rank of that tuple.
// Every image the classifier labels Difficult outranks every Easy one, so
// cutting at the classifier's own upload ratio reproduces its decisions.
std::vector<DifficultyScore> semantic_scores(const std::map<std::string, DetectionRecord>& records,
                                             const ThresholdSet& thresholds);

} // namespace hcg
