#include "hcg/evaluator.hpp"

#include <algorithm>
#include <stdexcept>

namespace hcg {

const char* to_string(ApMode mode) {
    return mode == ApMode::ElevenPoint ? "11pt" : "allpt";
}

ApMode ap_mode_from_string(const std::string& s) {
    if (s == "11pt") return ApMode::ElevenPoint;
    if (s == "allpt") return ApMode::AllPoint;
    throw std::runtime_error("unknown AP mode: " + s);
}

std::map<std::string, CaseLabel> label_cases(const std::map<std::string, DetectionRecord>& small,
                                             const std::map<std::string, DetectionRecord>& big,
                                             double cutoff) {
    if (small.size() != big.size())
        throw std::invalid_argument("label_cases: small and big trace sets differ in size");
    std::map<std::string, CaseLabel> labels;
    for (const auto& [id, small_rec] : small) {
        auto it = big.find(id);
        if (it == big.end())
            throw std::invalid_argument("label_cases: image " + id + " missing from big traces");
        long n_small = static_cast<long>(finalize(small_rec, cutoff).size());
        long n_big = static_cast<long>(finalize(it->second, cutoff).size());
        labels.emplace(id, n_big - n_small >= 1 ? CaseLabel::Difficult : CaseLabel::Easy);
    }
    return labels;
}

double average_precision(std::vector<ClassDetection> dets,
                         const std::map<std::string, GroundTruth>& truths,
                         int class_id, double iou_min, ApMode mode) {
    if (!(iou_min > 0.0 && iou_min <= 1.0))
        throw std::invalid_argument("average_precision: iou_min must be in (0, 1]");

    std::map<std::string, std::vector<Box>> gt_boxes;
    long long npos = 0;
    for (const auto& [id, gt] : truths) {
        for (const GroundTruthObject& o : gt.objects) {
            if (o.class_id == class_id) {
                gt_boxes[id].push_back(o.box);
                ++npos;
            }
        }
    }
    if (npos == 0) return 0.0;

    std::sort(dets.begin(), dets.end(), [](const ClassDetection& a, const ClassDetection& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.image_id != b.image_id) return a.image_id < b.image_id;
        return box_less(a.box, b.box);
    });

    std::map<std::string, std::vector<bool>> used;
    std::vector<double> precisions, recalls;
    long long tp = 0, fp = 0;
    for (const ClassDetection& d : dets) {
        bool matched = false;
        auto git = gt_boxes.find(d.image_id);
        if (git != gt_boxes.end()) {
            std::vector<bool>& flags = used[d.image_id];
            flags.resize(git->second.size(), false);
            double best_iou = 0.0;
            std::size_t best = git->second.size();
            for (std::size_t i = 0; i < git->second.size(); ++i) {
                if (flags[i]) continue;
                double v = iou(d.box, git->second[i]);
                if (v >= iou_min && v > best_iou) {
                    best_iou = v;
                    best = i;
                }
            }
            if (best < git->second.size()) {
                flags[best] = true;
                matched = true;
            }
        }
        matched ? ++tp : ++fp;
        precisions.push_back(static_cast<double>(tp) / static_cast<double>(tp + fp));
        recalls.push_back(static_cast<double>(tp) / static_cast<double>(npos));
    }

    if (mode == ApMode::ElevenPoint) {
        double sum = 0.0;
        for (int i = 0; i <= 10; ++i) {
            double r = i / 10.0;
            double best = 0.0;
            for (std::size_t k = 0; k < precisions.size(); ++k) {
                if (recalls[k] >= r) best = std::max(best, precisions[k]);
            }
            sum += best;
        }
        return sum / 11.0;
    }

    // Exact area under the monotone precision envelope.
    std::vector<double> mrec{0.0};
    std::vector<double> mpre{0.0};
    mrec.insert(mrec.end(), recalls.begin(), recalls.end());
    mpre.insert(mpre.end(), precisions.begin(), precisions.end());
    mrec.push_back(1.0);
    mpre.push_back(0.0);
    for (std::size_t i = mpre.size() - 1; i-- > 0;) {
        mpre[i] = std::max(mpre[i], mpre[i + 1]);
    }
    double ap = 0.0;
    for (std::size_t i = 0; i + 1 < mrec.size(); ++i) {
        if (mrec[i + 1] != mrec[i]) ap += (mrec[i + 1] - mrec[i]) * mpre[i + 1];
    }
    return ap;
}

MetricsReport evaluate(const std::map<std::string, std::vector<FinalDetection>>& final_per_image,
                       const std::map<std::string, GroundTruth>& truths,
                       int class_count, ApMode mode) {
    for (const auto& [id, dets] : final_per_image) {
        if (!truths.count(id)) throw std::invalid_argument("evaluate: unknown image_id " + id);
    }

    MetricsReport report;
    report.image_count = static_cast<long long>(truths.size());

    std::vector<std::vector<ClassDetection>> per_class(static_cast<std::size_t>(class_count));
    for (const auto& [id, gt] : truths) {
        auto it = final_per_image.find(id);
        if (it == final_per_image.end()) continue;
        report.detected_objects += static_cast<long long>(match_detections(it->second, gt, 0.5).size());
        for (const FinalDetection& d : it->second) {
            if (d.class_id < 0 || d.class_id >= class_count)
                throw std::invalid_argument("evaluate: class id out of range in image " + id);
            per_class[d.class_id].push_back({id, d.box, d.score});
        }
    }

    std::vector<long long> gt_count(static_cast<std::size_t>(class_count), 0);
    for (const auto& [id, gt] : truths) {
        for (const GroundTruthObject& o : gt.objects) {
            if (o.class_id >= 0 && o.class_id < class_count) ++gt_count[o.class_id];
        }
    }

    double ap_sum = 0.0;
    long classes_with_truth = 0;
    for (int c = 0; c < class_count; ++c) {
        if (gt_count[c] == 0) continue;  // absent classes are excluded from the mean
        double ap = average_precision(per_class[c], truths, c, 0.5, mode);
        report.per_class_ap.emplace_back(c, ap);
        ap_sum += ap;
        ++classes_with_truth;
    }
    report.map_value = classes_with_truth > 0 ? ap_sum / classes_with_truth : 0.0;
    return report;
}

MetricsReport end_to_end(const std::vector<RouteDecision>& decisions,
                         const std::map<std::string, DetectionRecord>& small,
                         const std::map<std::string, DetectionRecord>& big,
                         const std::map<std::string, GroundTruth>& truths,
                         int class_count, double cutoff, ApMode mode) {
    std::map<std::string, Route> routes;
    for (const RouteDecision& d : decisions) {
        if (!routes.emplace(d.image_id, d.route).second)
            throw std::invalid_argument("end_to_end: image " + d.image_id + " routed twice");
    }

    std::map<std::string, std::vector<FinalDetection>> final_per_image;
    long long cloud_count = 0;
    for (const auto& [id, gt] : truths) {
        auto rit = routes.find(id);
        if (rit == routes.end()) throw std::invalid_argument("end_to_end: unrouted image " + id);
        if (rit->second == Route::Cloud) {
            auto bit = big.find(id);
            if (bit == big.end())
                throw std::invalid_argument("end_to_end: missing big trace for cloud-routed image " + id);
            final_per_image.emplace(id, finalize(bit->second, cutoff));
            ++cloud_count;
        } else {
            auto sit = small.find(id);
            if (sit == small.end())
                throw std::invalid_argument("end_to_end: missing small trace for image " + id);
            final_per_image.emplace(id, finalize(sit->second, cutoff));
        }
    }

    MetricsReport report = evaluate(final_per_image, truths, class_count, mode);
    report.difficult_count = cloud_count;
    report.upload_ratio =
        report.image_count > 0 ? static_cast<double>(cloud_count) / report.image_count : 0.0;
    return report;
}

} // namespace hcg
