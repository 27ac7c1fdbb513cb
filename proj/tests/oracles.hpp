#pragma once

// Independent reference implementations used as oracles. These deliberately
// re-derive everything from raw fields with naive loops; they must not call
// the library code paths they check.

#include "hcg/core.hpp"
#include "hcg/discriminator.hpp"
#include "hcg/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <string>
#include <vector>

namespace oracle {

inline double ref_iou(const hcg::Box& a, const hcg::Box& b) {
    double ix1 = a.xmin > b.xmin ? a.xmin : b.xmin;
    double iy1 = a.ymin > b.ymin ? a.ymin : b.ymin;
    double ix2 = a.xmax < b.xmax ? a.xmax : b.xmax;
    double iy2 = a.ymax < b.ymax ? a.ymax : b.ymax;
    double iw = ix2 - ix1;
    double ih = iy2 - iy1;
    if (iw <= 0.0 || ih <= 0.0) return 0.0;
    double inter = iw * ih;
    double area_a = (a.xmax - a.xmin) * (a.ymax - a.ymin);
    double area_b = (b.xmax - b.xmin) * (b.ymax - b.ymin);
    return inter / (area_a + area_b - inter);
}

// Greedy matching, re-coded naively: repeatedly take the not-yet-processed
// detection with the highest score and give it its best unmatched truth.
inline std::vector<hcg::MatchPair> ref_greedy_match(const std::vector<hcg::FinalDetection>& dets,
                                                    const hcg::GroundTruth& truth,
                                                    double iou_min) {
    std::vector<bool> det_done(dets.size(), false);
    std::vector<bool> truth_done(truth.objects.size(), false);
    std::vector<hcg::MatchPair> out;
    for (std::size_t round = 0; round < dets.size(); ++round) {
        std::size_t pick = dets.size();
        for (std::size_t i = 0; i < dets.size(); ++i) {
            if (det_done[i]) continue;
            if (pick == dets.size() || dets[i].score > dets[pick].score) pick = i;
        }
        if (pick == dets.size()) break;
        det_done[pick] = true;
        double best = 0.0;
        std::size_t best_t = truth.objects.size();
        for (std::size_t t = 0; t < truth.objects.size(); ++t) {
            if (truth_done[t] || truth.objects[t].class_id != dets[pick].class_id) continue;
            double v = ref_iou(dets[pick].box, truth.objects[t].box);
            if (v >= iou_min && v > best) {
                best = v;
                best_t = t;
            }
        }
        if (best_t < truth.objects.size()) {
            truth_done[best_t] = true;
            out.push_back({pick, best_t});
        }
    }
    return out;
}

// Exhaustive maximum-cardinality one-to-one matching (recursion over
// detections); usable only for tiny instances.
inline std::size_t max_matching_count(const std::vector<hcg::FinalDetection>& dets,
                                      const hcg::GroundTruth& truth, double iou_min,
                                      std::size_t di = 0, std::vector<bool>* used = nullptr) {
    std::vector<bool> local;
    if (!used) {
        local.assign(truth.objects.size(), false);
        used = &local;
    }
    if (di == dets.size()) return 0;
    std::size_t best = max_matching_count(dets, truth, iou_min, di + 1, used);
    for (std::size_t t = 0; t < truth.objects.size(); ++t) {
        if ((*used)[t] || truth.objects[t].class_id != dets[di].class_id) continue;
        if (ref_iou(dets[di].box, truth.objects[t].box) < iou_min) continue;
        (*used)[t] = true;
        std::size_t with = 1 + max_matching_count(dets, truth, iou_min, di + 1, used);
        (*used)[t] = false;
        if (with > best) best = with;
    }
    return best;
}

// Direct evaluation of both AP definitions from the precision/recall points.
inline double ref_average_precision(std::vector<hcg::ClassDetection> dets,
                                    const std::map<std::string, hcg::GroundTruth>& truths,
                                    int class_id, double iou_min, hcg::ApMode mode) {
    std::map<std::string, std::vector<hcg::Box>> gt;
    long npos = 0;
    for (const auto& [id, t] : truths) {
        for (const hcg::GroundTruthObject& o : t.objects) {
            if (o.class_id == class_id) {
                gt[id].push_back(o.box);
                ++npos;
            }
        }
    }
    if (npos == 0) return 0.0;

    std::sort(dets.begin(), dets.end(), [](const hcg::ClassDetection& a, const hcg::ClassDetection& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.image_id != b.image_id) return a.image_id < b.image_id;
        if (a.box.xmin != b.box.xmin) return a.box.xmin < b.box.xmin;
        if (a.box.ymin != b.box.ymin) return a.box.ymin < b.box.ymin;
        if (a.box.xmax != b.box.xmax) return a.box.xmax < b.box.xmax;
        return a.box.ymax < b.box.ymax;
    });

    std::map<std::string, std::vector<bool>> taken;
    std::vector<double> prec, rec;
    long tp = 0;
    for (std::size_t k = 0; k < dets.size(); ++k) {
        const hcg::ClassDetection& d = dets[k];
        bool hit = false;
        auto it = gt.find(d.image_id);
        if (it != gt.end()) {
            std::vector<bool>& flags = taken[d.image_id];
            flags.resize(it->second.size(), false);
            double best = 0.0;
            std::size_t best_i = it->second.size();
            for (std::size_t i = 0; i < it->second.size(); ++i) {
                if (flags[i]) continue;
                double v = ref_iou(d.box, it->second[i]);
                if (v >= iou_min && v > best) {
                    best = v;
                    best_i = i;
                }
            }
            if (best_i < it->second.size()) {
                flags[best_i] = true;
                hit = true;
            }
        }
        if (hit) ++tp;
        prec.push_back(static_cast<double>(tp) / static_cast<double>(k + 1));
        rec.push_back(static_cast<double>(tp) / static_cast<double>(npos));
    }

    auto max_precision_at = [&](double r) {
        double best = 0.0;
        for (std::size_t k = 0; k < prec.size(); ++k) {
            if (rec[k] >= r && prec[k] > best) best = prec[k];
        }
        return best;
    };

    if (mode == hcg::ApMode::ElevenPoint) {
        double sum = 0.0;
        for (int i = 0; i <= 10; ++i) sum += max_precision_at(i / 10.0);
        return sum / 11.0;
    }

    // Quadrature of the interpolated-precision step function over [0, 1].
    std::vector<double> breaks = rec;
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
    double ap = 0.0;
    double prev = 0.0;
    for (double r : breaks) {
        if (r > prev) ap += (r - prev) * max_precision_at(r);
        prev = r;
    }
    return ap;
}

inline hcg::CaseLabel ref_discriminate(const hcg::DetectionRecord& rec, const hcg::ThresholdSet& t) {
    int predicted = 0;
    int estimated = 0;
    double min_ratio = 1.0;
    bool any = false;
    for (const hcg::RawDetection& r : rec.raw) {
        double top = 0.0;
        for (double s : r.class_scores) {
            if (s > top) top = s;
        }
        if (top >= 0.5) ++predicted;
        if (top >= t.tau_s) {
            ++estimated;
            any = true;
            double ratio = (r.box.xmax - r.box.xmin) * (r.box.ymax - r.box.ymin) /
                           (static_cast<double>(rec.width) * rec.height);
            if (ratio < min_ratio) min_ratio = ratio;
        }
    }
    if (!any) min_ratio = 1.0;
    if (predicted == estimated) return hcg::CaseLabel::Easy;
    if (estimated > t.tau_n) return hcg::CaseLabel::Difficult;
    if (min_ratio < t.tau_a) return hcg::CaseLabel::Difficult;
    return hcg::CaseLabel::Easy;
}

inline hcg::CaseLabel ref_discriminate_with_truth(const hcg::GroundTruth& gt,
                                                  const hcg::DetectionRecord& rec,
                                                  const hcg::ThresholdSet& t) {
    int predicted = 0;
    for (const hcg::RawDetection& r : rec.raw) {
        double top = 0.0;
        for (double s : r.class_scores) {
            if (s > top) top = s;
        }
        if (top >= 0.5) ++predicted;
    }
    int count = static_cast<int>(gt.objects.size());
    if (predicted == count) return hcg::CaseLabel::Easy;
    if (count > t.tau_n) return hcg::CaseLabel::Difficult;
    double min_ratio = 1.0;
    for (const hcg::GroundTruthObject& o : gt.objects) {
        double ratio = (o.box.xmax - o.box.xmin) * (o.box.ymax - o.box.ymin) /
                       (static_cast<double>(gt.width) * gt.height);
        if (ratio < min_ratio) min_ratio = ratio;
    }
    if (min_ratio < t.tau_a) return hcg::CaseLabel::Difficult;
    return hcg::CaseLabel::Easy;
}

// Brute-force double loop over the (tau_n, tau_a) grid with the same
// contract: max accuracy, then max F1, then smallest pair.
inline hcg::DecisionCalibration ref_decision_grid(const std::vector<hcg::GroundTruth>& truths,
                                                  const std::vector<hcg::DetectionRecord>& records,
                                                  const std::vector<hcg::CaseLabel>& labels,
                                                  int n_max = 10) {
    hcg::DecisionCalibration best;
    bool first = true;
    for (int n = 0; n <= n_max; ++n) {
        for (int cents = 1; cents <= 50; ++cents) {
            double a = cents / 100.0;
            long tp = 0, fp = 0, tn = 0, fn = 0;
            hcg::ThresholdSet t{0.25, n, a};
            for (std::size_t i = 0; i < truths.size(); ++i) {
                bool diff = ref_discriminate_with_truth(truths[i], records[i], t) ==
                            hcg::CaseLabel::Difficult;
                bool want = labels[i] == hcg::CaseLabel::Difficult;
                if (diff && want) ++tp;
                else if (diff) ++fp;
                else if (want) ++fn;
                else ++tn;
            }
            hcg::DecisionCalibration cand;
            cand.tau_n = n;
            cand.tau_a = a;
            cand.accuracy = static_cast<double>(tp + tn) / static_cast<double>(tp + tn + fp + fn);
            cand.precision = tp + fp > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
            cand.recall = tp + fn > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
            cand.f1 = cand.precision + cand.recall > 0.0
                          ? 2.0 * cand.precision * cand.recall / (cand.precision + cand.recall)
                          : 0.0;
            if (first || cand.accuracy > best.accuracy ||
                (cand.accuracy == best.accuracy && cand.f1 > best.f1)) {
                best = cand;
                first = false;
            }
        }
    }
    return best;
}

// Full-grid scan for the noise threshold: naive per-point counting.
inline hcg::NoiseCalibration ref_noise_scan(const std::vector<hcg::DetectionRecord>& records,
                                            const std::vector<hcg::GroundTruth>& truths) {
    long long n_truth = 0;
    for (const hcg::GroundTruth& gt : truths) n_truth += static_cast<long long>(gt.objects.size());
    hcg::NoiseCalibration best;
    bool first = true;
    for (int cents = 5; cents <= 50; ++cents) {
        double tau = cents / 100.0;
        long long kept = 0;
        for (const hcg::DetectionRecord& rec : records) {
            for (const hcg::RawDetection& r : rec.raw) {
                double top = 0.0;
                for (double s : r.class_scores) {
                    if (s > top) top = s;
                }
                if (top >= tau) ++kept;
            }
        }
        long long loss = kept - n_truth;
        if (first || std::llabs(loss) < std::llabs(best.loss)) {
            best.tau_s = tau;
            best.loss = loss;
            first = false;
        }
    }
    return best;
}

} // namespace oracle
