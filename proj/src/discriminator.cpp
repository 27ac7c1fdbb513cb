#include "hcg/discriminator.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <stdexcept>

using nlohmann::json;

namespace hcg {

const char* to_string(CaseLabel label) {
    return label == CaseLabel::Difficult ? "difficult" : "easy";
}

CaseLabel case_label_from_string(const std::string& s) {
    if (s == "difficult") return CaseLabel::Difficult;
    if (s == "easy") return CaseLabel::Easy;
    throw std::runtime_error("unknown case label: " + s);
}

void validate(const ThresholdSet& t) {
    if (!(t.tau_s > 0.0 && t.tau_s <= 0.5)) throw std::invalid_argument("tau_s must be in (0, 0.5]");
    if (t.tau_n < 0) throw std::invalid_argument("tau_n must be >= 0");
    if (!(t.tau_a > 0.0 && t.tau_a <= 1.0)) throw std::invalid_argument("tau_a must be in (0, 1]");
}

ThresholdSet load_thresholds(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(path + ": malformed JSON: " + e.what());
    }
    ThresholdSet t;
    t.tau_s = j.at("tau_s").get<double>();
    t.tau_n = j.at("tau_n").get<int>();
    t.tau_a = j.at("tau_a").get<double>();
    validate(t);
    return t;
}

void save_thresholds(const std::string& path, const ThresholdSet& t) {
    validate(t);
    json j{{"tau_s", t.tau_s}, {"tau_n", t.tau_n}, {"tau_a", t.tau_a}};
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << j.dump() << "\n";
}

FeatureVector estimate_features(const DetectionRecord& record, double tau_s) {
    if (!(tau_s > 0.0 && tau_s <= 0.5)) throw std::invalid_argument("tau_s must be in (0, 0.5]");
    FeatureVector f;
    double image_area = static_cast<double>(record.width) * record.height;
    double min_ratio = 1.0;
    bool any_kept = false;
    for (const RawDetection& r : record.raw) {
        double top = r.max_score();
        if (top >= 0.5) ++f.predicted_count;
        if (top >= tau_s) {
            ++f.estimated_count;
            any_kept = true;
            double ratio = r.box.area() / image_area;
            if (ratio < min_ratio) min_ratio = ratio;
        }
    }
    f.min_area_ratio = any_kept ? min_ratio : 1.0;
    return f;
}

namespace {

// Steps 2 and 3 shared by the estimated and the ground-truth feature paths.
CaseLabel decide(int count, double min_area_ratio, const ThresholdSet& t) {
    if (count > t.tau_n) return CaseLabel::Difficult;
    if (min_area_ratio < t.tau_a) return CaseLabel::Difficult;
    return CaseLabel::Easy;
}

} // namespace

CaseLabel discriminate(const DetectionRecord& record, const ThresholdSet& thresholds) {
    validate(thresholds);
    FeatureVector f = estimate_features(record, thresholds.tau_s);
    if (f.predicted_count == f.estimated_count) return CaseLabel::Easy;
    return decide(f.estimated_count, f.min_area_ratio, thresholds);
}

CaseLabel discriminate_with_truth(const GroundTruth& truth, const DetectionRecord& record,
                                  const ThresholdSet& thresholds) {
    validate(thresholds);
    if (truth.image_id != record.image_id)
        throw std::invalid_argument("discriminate_with_truth: image_id mismatch (" + truth.image_id +
                                    " vs " + record.image_id + ")");
    int predicted = 0;
    for (const RawDetection& r : record.raw) {
        if (r.max_score() >= 0.5) ++predicted;
    }
    int true_count = static_cast<int>(truth.objects.size());
    if (predicted == true_count) return CaseLabel::Easy;

    double image_area = static_cast<double>(truth.width) * truth.height;
    double min_ratio = 1.0;
    for (const GroundTruthObject& o : truth.objects) {
        min_ratio = std::min(min_ratio, o.box.area() / image_area);
    }
    if (truth.objects.empty()) min_ratio = 1.0;
    return decide(true_count, min_ratio, thresholds);
}

std::vector<double> grid_values(const GridSpec& grid) {
    long long lo_u = std::llround(grid.lo * 1e6);
    long long hi_u = std::llround(grid.hi * 1e6);
    long long step_u = std::llround(grid.step * 1e6);
    if (step_u <= 0 || hi_u < lo_u) throw std::invalid_argument("bad grid spec");
    std::vector<double> values;
    for (long long v = lo_u; v <= hi_u; v += step_u) {
        values.push_back(static_cast<double>(v) / 1e6);
    }
    return values;
}

NoiseCalibration calibrate_noise_threshold(const std::vector<DetectionRecord>& records,
                                           const std::vector<GroundTruth>& truths,
                                           const GridSpec& grid) {
    if (records.empty() || records.size() != truths.size())
        throw std::invalid_argument("calibrate_noise_threshold: needs non-empty paired inputs");

    long long n_truth = 0;
    for (const GroundTruth& gt : truths) n_truth += static_cast<long long>(gt.objects.size());

    // One sorted pass over all top scores answers every grid point.
    std::vector<double> top_scores;
    for (const DetectionRecord& rec : records) {
        for (const RawDetection& r : rec.raw) top_scores.push_back(r.max_score());
    }
    std::sort(top_scores.begin(), top_scores.end());

    auto kept_at = [&](double tau) -> long long {
        auto it = std::lower_bound(top_scores.begin(), top_scores.end(), tau);
        return static_cast<long long>(top_scores.end() - it);
    };

    NoiseCalibration best;
    bool have_best = false;
    for (double tau : grid_values(grid)) {
        long long loss = kept_at(tau) - n_truth;
        if (!have_best || std::llabs(loss) < std::llabs(best.loss)) {
            best.tau_s = tau;
            best.loss = loss;
            have_best = true;
        }
    }
    return best;
}

DecisionCalibration calibrate_decision_thresholds(const std::vector<GroundTruth>& truths,
                                                  const std::vector<DetectionRecord>& records,
                                                  const std::vector<CaseLabel>& labels,
                                                  int n_max,
                                                  const GridSpec& a_grid) {
    if (truths.empty()) throw std::invalid_argument("calibrate_decision_thresholds: empty input");
    if (truths.size() != records.size() || truths.size() != labels.size())
        throw std::invalid_argument("calibrate_decision_thresholds: list length mismatch");

    // Per-image features are threshold-independent; precompute them once.
    struct ImageFeatures {
        bool step1_easy;
        int true_count;
        double min_ratio;
        bool label_difficult;
    };
    std::vector<ImageFeatures> feats;
    feats.reserve(truths.size());
    for (std::size_t i = 0; i < truths.size(); ++i) {
        if (truths[i].image_id != records[i].image_id)
            throw std::invalid_argument("calibrate_decision_thresholds: image_id mismatch at index " +
                                        std::to_string(i));
        int predicted = 0;
        for (const RawDetection& r : records[i].raw) {
            if (r.max_score() >= 0.5) ++predicted;
        }
        ImageFeatures f;
        f.true_count = static_cast<int>(truths[i].objects.size());
        f.step1_easy = predicted == f.true_count;
        double image_area = static_cast<double>(truths[i].width) * truths[i].height;
        f.min_ratio = 1.0;
        for (const GroundTruthObject& o : truths[i].objects) {
            f.min_ratio = std::min(f.min_ratio, o.box.area() / image_area);
        }
        f.label_difficult = labels[i] == CaseLabel::Difficult;
        feats.push_back(f);
    }

    DecisionCalibration best;
    bool have_best = false;
    for (int n = 0; n <= n_max; ++n) {
        for (double a : grid_values(a_grid)) {
            long tp = 0, fp = 0, tn = 0, fn = 0;
            for (const ImageFeatures& f : feats) {
                bool predicted_difficult =
                    !f.step1_easy && (f.true_count > n || f.min_ratio < a);
                if (predicted_difficult && f.label_difficult) ++tp;
                else if (predicted_difficult) ++fp;
                else if (f.label_difficult) ++fn;
                else ++tn;
            }
            double total = static_cast<double>(tp + fp + tn + fn);
            DecisionCalibration cand;
            cand.tau_n = n;
            cand.tau_a = a;
            cand.accuracy = (tp + tn) / total;
            cand.precision = tp + fp > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
            cand.recall = tp + fn > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
            cand.f1 = cand.precision + cand.recall > 0.0
                          ? 2.0 * cand.precision * cand.recall / (cand.precision + cand.recall)
                          : 0.0;
            bool better = !have_best || cand.accuracy > best.accuracy ||
                          (cand.accuracy == best.accuracy && cand.f1 > best.f1);
            if (better) {
                best = cand;
                have_best = true;
            }
            // Equal accuracy and F1: the scan order (n ascending, a ascending)
            // already visits the lexicographically smallest pair first.
        }
    }
    return best;
}

} // namespace hcg
