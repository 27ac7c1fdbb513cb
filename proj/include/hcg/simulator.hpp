#pragma once

#include "hcg/baselines.hpp"
#include "hcg/discriminator.hpp"
#include "hcg/evaluator.hpp"
#include "hcg/ingest.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace hcg {

// Analytic channel/compute cost model. Per uploaded image the link pays one
// round trip, the transfer of its bytes, and the cloud inference time; every
// image pays the edge inference time.
struct ChannelModel {
    double bandwidth_bytes_per_s = 1e6;
    double rtt_s = 0.05;
    double edge_infer_s = 0.03;
    double cloud_infer_s = 0.02;
    long long bytes_per_image = 100000;  // per-image manifest sizes override this
};

void validate(const ChannelModel& channel);
ChannelModel load_channel(const std::string& path);
void save_channel(const std::string& path, const ChannelModel& channel);

// Route every annotated image through the discriminator: Difficult -> Cloud.
std::vector<RouteDecision> route_semantic(const Dataset& dataset, const ThresholdSet& thresholds);

// Route the top ceil(target_ratio * N) images by difficulty score to the
// cloud (score descending, ties by image_id ascending).
std::vector<RouteDecision> route_by_score(std::vector<DifficultyScore> scores, double target_ratio);

struct SimResult {
    MetricsReport report;
    double total_time_s = 0.0;
    long long uploaded_bytes = 0;
};

// Merge-and-evaluate the routed dataset and account time and bytes:
//   total_time = N * edge_infer + sum over cloud images of
//                (rtt + bytes / bandwidth + cloud_infer)
SimResult simulate(const Dataset& dataset, const std::vector<RouteDecision>& decisions,
                   const ChannelModel& channel, double cutoff = 0.5,
                   ApMode mode = ApMode::ElevenPoint);

struct SweepPoint {
    double target_ratio = 0.0;
    double achieved_ratio = 0.0;
    double map_value = 0.0;
    long long detected_objects = 0;
    double total_time_s = 0.0;
    long long uploaded_bytes = 0;
};

struct SweepOptions {
    ScoreMethod method = ScoreMethod::Semantic;
    ThresholdSet thresholds;      // used by the semantic method
    std::uint64_t seed = 0;       // used by the random method
    double cutoff = 0.5;
    ApMode mode = ApMode::ElevenPoint;
};

// Evaluate one SweepPoint per target ratio (ratios must be ascending within
// [0, 1]) by ranking images once with the chosen method and cutting the
// ranking at each ratio.
std::vector<SweepPoint> sweep(const Dataset& dataset, const SweepOptions& options,
                              const ChannelModel& channel, const std::vector<double>& ratios);

// Difficulty scores for one method over the whole dataset (every annotated
// image must be covered by the method's inputs).
std::vector<DifficultyScore> method_scores(const Dataset& dataset, const SweepOptions& options);

} // namespace hcg
