#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace hcg {

// Axis-aligned pixel box, origin top-left. Valid boxes satisfy
// xmin < xmax, ymin < ymax, all coordinates finite and >= 0.
struct Box {
    double xmin = 0.0;
    double ymin = 0.0;
    double xmax = 0.0;
    double ymax = 0.0;

    double width() const { return xmax - xmin; }
    double height() const { return ymax - ymin; }
    double area() const { return width() * height(); }
    bool valid() const;
};

bool operator==(const Box& a, const Box& b);

// Lexicographic (xmin, ymin, xmax, ymax) order, used for deterministic
// tie-breaking wherever detections are sorted.
bool box_less(const Box& a, const Box& b);

// Intersection-over-union of two valid boxes; 0 when disjoint.
double iou(const Box& a, const Box& b);

// One raw box from the edge detector, carrying a confidence score for every
// class of the dataset (the class is not yet decided at this stage).
struct RawDetection {
    Box box;
    std::vector<double> class_scores;

    double max_score() const;
    // Index of the highest-scoring class; the lowest index wins exact ties.
    int argmax_class() const;
};

// Per-image raw detector output.
struct DetectionRecord {
    std::string image_id;
    int width = 0;
    int height = 0;
    std::vector<RawDetection> raw;
};

// A reported detection: box, decided class, and its score.
struct FinalDetection {
    Box box;
    int class_id = 0;
    double score = 0.0;
};

struct GroundTruthObject {
    int class_id = 0;
    Box box;
};

// Annotated objects of one image.
struct GroundTruth {
    std::string image_id;
    int width = 0;
    int height = 0;
    std::vector<GroundTruthObject> objects;
};

// Reduce raw detections to reported ones: per raw box take the top-scoring
// class and keep it iff that score >= cutoff. Output sorted by score
// descending, ties by ascending box coordinates then class id.
// cutoff must be in (0, 1].
std::vector<FinalDetection> finalize(const DetectionRecord& record, double cutoff);

struct MatchPair {
    std::size_t det_index = 0;
    std::size_t truth_index = 0;
};

// Greedy one-to-one matching of detections against ground truth. Detections
// are visited in descending score order (ties by original index); each one
// claims the so-far-unmatched truth object of its class with the highest
// IoU >= iou_min, ties broken by the lowest truth index.
// iou_min must be in (0, 1].
std::vector<MatchPair> match_detections(const std::vector<FinalDetection>& dets,
                                        const GroundTruth& truth,
                                        double iou_min);

} // namespace hcg
