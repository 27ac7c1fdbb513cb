#include "hcg/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace hcg {

bool Box::valid() const {
    return std::isfinite(xmin) && std::isfinite(ymin) && std::isfinite(xmax) &&
           std::isfinite(ymax) && xmin >= 0.0 && ymin >= 0.0 && xmin < xmax &&
           ymin < ymax;
}

bool operator==(const Box& a, const Box& b) {
    return a.xmin == b.xmin && a.ymin == b.ymin && a.xmax == b.xmax && a.ymax == b.ymax;
}

bool box_less(const Box& a, const Box& b) {
    if (a.xmin != b.xmin) return a.xmin < b.xmin;
    if (a.ymin != b.ymin) return a.ymin < b.ymin;
    if (a.xmax != b.xmax) return a.xmax < b.xmax;
    return a.ymax < b.ymax;
}

double iou(const Box& a, const Box& b) {
    double ix = std::min(a.xmax, b.xmax) - std::max(a.xmin, b.xmin);
    double iy = std::min(a.ymax, b.ymax) - std::max(a.ymin, b.ymin);
    if (ix <= 0.0 || iy <= 0.0) return 0.0;
    double inter = ix * iy;
    double uni = a.area() + b.area() - inter;
    return inter / uni;
}

double RawDetection::max_score() const {
    double best = 0.0;
    for (double s : class_scores) best = std::max(best, s);
    return best;
}

int RawDetection::argmax_class() const {
    int best = 0;
    for (std::size_t c = 1; c < class_scores.size(); ++c) {
        if (class_scores[c] > class_scores[best]) best = static_cast<int>(c);
    }
    return best;
}

std::vector<FinalDetection> finalize(const DetectionRecord& record, double cutoff) {
    if (!(cutoff > 0.0 && cutoff <= 1.0)) {
        throw std::invalid_argument("finalize: cutoff must be in (0, 1]");
    }
    std::vector<FinalDetection> out;
    for (const RawDetection& r : record.raw) {
        if (r.class_scores.empty()) continue;
        int cls = r.argmax_class();
        double score = r.class_scores[cls];
        if (score >= cutoff) out.push_back({r.box, cls, score});
    }
    std::sort(out.begin(), out.end(), [](const FinalDetection& a, const FinalDetection& b) {
        if (a.score != b.score) return a.score > b.score;
        if (!(a.box == b.box)) return box_less(a.box, b.box);
        return a.class_id < b.class_id;
    });
    return out;
}

std::vector<MatchPair> match_detections(const std::vector<FinalDetection>& dets,
                                        const GroundTruth& truth,
                                        double iou_min) {
    if (!(iou_min > 0.0 && iou_min <= 1.0)) {
        throw std::invalid_argument("match_detections: iou_min must be in (0, 1]");
    }
    std::vector<std::size_t> order(dets.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return dets[a].score > dets[b].score;
    });

    std::vector<bool> truth_used(truth.objects.size(), false);
    std::vector<MatchPair> matches;
    for (std::size_t di : order) {
        const FinalDetection& d = dets[di];
        double best_iou = 0.0;
        std::size_t best_ti = truth.objects.size();
        for (std::size_t ti = 0; ti < truth.objects.size(); ++ti) {
            if (truth_used[ti] || truth.objects[ti].class_id != d.class_id) continue;
            double v = iou(d.box, truth.objects[ti].box);
            if (v >= iou_min && v > best_iou) {
                best_iou = v;
                best_ti = ti;
            }
        }
        if (best_ti < truth.objects.size()) {
            truth_used[best_ti] = true;
            matches.push_back({di, best_ti});
        }
    }
    return matches;
}

} // namespace hcg
