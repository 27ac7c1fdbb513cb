#pragma once

#include "hcg/core.hpp"
#include "hcg/discriminator.hpp"

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace hcg {

enum class ApMode { ElevenPoint, AllPoint };

const char* to_string(ApMode mode);
ApMode ap_mode_from_string(const std::string& s);

enum class Route { Edge, Cloud };

struct RouteDecision {
    std::string image_id;
    Route route = Route::Edge;
};

// Dataset-level evaluation summary. detected_objects counts true-positive
// matches at IoU 0.5 (not raw box count); per_class_ap covers only classes
// with at least one annotated object, and map_value is their mean.
struct MetricsReport {
    double map_value = 0.0;
    std::vector<std::pair<int, double>> per_class_ap;
    long long detected_objects = 0;
    double upload_ratio = 0.0;
    long long image_count = 0;
    long long difficult_count = 0;
};

// Ground-truth difficulty oracle: an image is Difficult iff the big model
// reports at least one more final detection than the small model at the given
// cutoff. The rule is one-sided; a small-model surplus stays Easy.
// The two trace maps must cover identical image sets.
std::map<std::string, CaseLabel> label_cases(const std::map<std::string, DetectionRecord>& small,
                                             const std::map<std::string, DetectionRecord>& big,
                                             double cutoff = 0.5);

// One detection of a single class, tagged with its image.
struct ClassDetection {
    std::string image_id;
    Box box;
    double score = 0.0;
};

// Average precision for one class over the whole dataset. Detections are
// sorted by score descending (ties by image_id, then box), matched greedily
// per image at iou_min, and the precision-recall curve is summarized either
// by the 11-point interpolation or by the exact area under the monotone
// precision envelope. Returns 0 when the class has no annotated objects.
double average_precision(std::vector<ClassDetection> dets,
                         const std::map<std::string, GroundTruth>& truths,
                         int class_id, double iou_min, ApMode mode);

// Full evaluation of per-image final detections against the ground truth.
// Every image in truths must appear in final_per_image (detections may be
// empty); unknown image ids are an error.
MetricsReport evaluate(const std::map<std::string, std::vector<FinalDetection>>& final_per_image,
                       const std::map<std::string, GroundTruth>& truths,
                       int class_count, ApMode mode);

// Merge small- and big-model results according to the route decisions (Edge
// takes the small trace, Cloud the big one), then evaluate the merged set.
// Every annotated image must be routed exactly once.
MetricsReport end_to_end(const std::vector<RouteDecision>& decisions,
                         const std::map<std::string, DetectionRecord>& small,
                         const std::map<std::string, DetectionRecord>& big,
                         const std::map<std::string, GroundTruth>& truths,
                         int class_count, double cutoff, ApMode mode);

} // namespace hcg
