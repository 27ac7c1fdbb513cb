#pragma once

#include "hcg/core.hpp"

#include <string>
#include <vector>

namespace hcg {

enum class CaseLabel { Easy, Difficult };

const char* to_string(CaseLabel label);
CaseLabel case_label_from_string(const std::string& s);

// The three calibrated thresholds driving the routing decision.
struct ThresholdSet {
    double tau_s = 0.15;  // noise-box score threshold, in (0, 0.5]
    int tau_n = 2;        // object-count threshold, >= 0
    double tau_a = 0.31;  // minimum-object-area-ratio threshold, in (0, 1]
};

void validate(const ThresholdSet& t);

ThresholdSet load_thresholds(const std::string& path);
void save_thresholds(const std::string& path, const ThresholdSet& t);

// Semantic features estimated from one preliminary detection record.
struct FeatureVector {
    int predicted_count = 0;     // boxes whose top score >= 0.5
    int estimated_count = 0;     // boxes whose top score >= tau_s
    double min_area_ratio = 1.0; // min box-area/image-area over tau_s-kept boxes; 1.0 when none
};

// tau_s must be in (0, 0.5].
FeatureVector estimate_features(const DetectionRecord& record, double tau_s);

// Three-step threshold decision on estimated features:
//   1. predicted count == estimated count         -> Easy
//   2. estimated count > tau_n                    -> Difficult
//   3. min area ratio < tau_a ? Difficult : Easy
CaseLabel discriminate(const DetectionRecord& record, const ThresholdSet& thresholds);

// Same decision, but the estimated count and area ratio are replaced by the
// annotated values (used during calibration, where ground truth is at hand).
// truth and record must carry the same image_id.
CaseLabel discriminate_with_truth(const GroundTruth& truth, const DetectionRecord& record,
                                  const ThresholdSet& thresholds);

// Inclusive value grid. Values are stepped in integer micro-units so that a
// grid like (0.05, 0.50, 0.01) enumerates exactly 0.05, 0.06, ..., 0.50 with
// no floating-point drift.
struct GridSpec {
    double lo = 0.0;
    double hi = 0.0;
    double step = 0.01;
};

std::vector<double> grid_values(const GridSpec& grid);

struct NoiseCalibration {
    double tau_s = 0.0;
    long long loss = 0;  // signed N_predict - N_truth at the optimum
};

// Pick the score threshold whose kept-box total best matches the annotated
// object total: minimizes |N_predict(tau) - N_truth| over the grid, ties
// broken by the smallest tau. Returns the signed loss at the optimum.
NoiseCalibration calibrate_noise_threshold(const std::vector<DetectionRecord>& records,
                                           const std::vector<GroundTruth>& truths,
                                           const GridSpec& grid = {0.05, 0.50, 0.01});

struct DecisionCalibration {
    int tau_n = 0;
    double tau_a = 0.0;
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

// Exhaustive grid search over (tau_n, tau_a) pairs, scoring
// discriminate_with_truth against the given labels with Difficult as the
// positive class. Maximizes accuracy; ties broken by higher F1, then by the
// lexicographically smallest (tau_n, tau_a).
DecisionCalibration calibrate_decision_thresholds(const std::vector<GroundTruth>& truths,
                                                  const std::vector<DetectionRecord>& records,
                                                  const std::vector<CaseLabel>& labels,
                                                  int n_max = 10,
                                                  const GridSpec& a_grid = {0.01, 0.50, 0.01});

} // namespace hcg
