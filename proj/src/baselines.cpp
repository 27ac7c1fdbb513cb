#include "hcg/baselines.hpp"

#include "hcg/rng.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>
#include <tuple>

namespace hcg {

const char* to_string(ScoreMethod method) {
    switch (method) {
        case ScoreMethod::Random: return "random";
        case ScoreMethod::Brenner: return "brenner";
        case ScoreMethod::Top1Confidence: return "top1";
        case ScoreMethod::Semantic: return "semantic";
    }
    return "unknown";
}

ScoreMethod score_method_from_string(const std::string& s) {
    if (s == "random") return ScoreMethod::Random;
    if (s == "brenner") return ScoreMethod::Brenner;
    if (s == "top1") return ScoreMethod::Top1Confidence;
    if (s == "semantic") return ScoreMethod::Semantic;
    throw std::runtime_error("unknown score method: " + s);
}

std::vector<DifficultyScore> random_scores(const std::vector<std::string>& image_ids,
                                           std::uint64_t seed) {
    if (image_ids.empty()) throw std::invalid_argument("random_scores: empty id list");
    std::set<std::string> seen(image_ids.begin(), image_ids.end());
    if (seen.size() != image_ids.size())
        throw std::invalid_argument("random_scores: duplicate image_id");

    std::vector<std::string> order(seen.begin(), seen.end());
    Rng rng(seed);
    for (std::size_t i = order.size() - 1; i > 0; --i) {
        std::size_t j = static_cast<std::size_t>(rng.next_u64() % (i + 1));
        std::swap(order[i], order[j]);
    }

    std::vector<DifficultyScore> scores;
    scores.reserve(order.size());
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
        scores.push_back({order[pos], static_cast<double>(pos), ScoreMethod::Random});
    }
    std::sort(scores.begin(), scores.end(),
              [](const DifficultyScore& a, const DifficultyScore& b) { return a.image_id < b.image_id; });
    return scores;
}

std::uint64_t brenner(const GrayImage& image) {
    if (image.width < 3) throw std::invalid_argument("brenner: image width must be >= 3");
    std::uint64_t sum = 0;
    for (int y = 0; y < image.height; ++y) {
        for (int x = 0; x + 2 < image.width; ++x) {
            long long d = static_cast<long long>(image.at(x + 2, y)) - image.at(x, y);
            sum += static_cast<std::uint64_t>(d * d);
        }
    }
    return sum;
}

double top1_confidence_score(const DetectionRecord& record, int class_count) {
    if (class_count <= 0) throw std::invalid_argument("top1_confidence_score: class_count must be positive");
    for (const RawDetection& r : record.raw) {
        if (static_cast<int>(r.class_scores.size()) != class_count)
            throw std::invalid_argument("top1_confidence_score: class-count mismatch in image " +
                                        record.image_id);
    }
    double sum = 0.0;
    for (int c = 0; c < class_count; ++c) {
        double best = 0.0;
        for (const RawDetection& r : record.raw) best = std::max(best, r.class_scores[c]);
        sum += best;
    }
    return sum / class_count;
}

std::vector<DifficultyScore> brenner_scores(const std::map<std::string, GrayImage>& images) {
    std::vector<DifficultyScore> scores;
    scores.reserve(images.size());
    for (const auto& [id, img] : images) {
        std::uint64_t v = brenner(img);
        // v == 0 maps to +0.0, not -0.0
        scores.push_back({id, v == 0 ? 0.0 : -static_cast<double>(v), ScoreMethod::Brenner});
    }
    return scores;
}

std::vector<DifficultyScore> top1_scores(const std::map<std::string, DetectionRecord>& records,
                                         int class_count) {
    std::vector<DifficultyScore> scores;
    scores.reserve(records.size());
    for (const auto& [id, rec] : records) {
        scores.push_back({id, -top1_confidence_score(rec, class_count), ScoreMethod::Top1Confidence});
    }
    return scores;
}

std::vector<DifficultyScore> semantic_scores(const std::map<std::string, DetectionRecord>& records,
                                             const ThresholdSet& thresholds) {
    validate(thresholds);
    using Key = std::tuple<int, int, int, double>;  // (difficult, mismatch, est count, -min ratio)

    std::vector<std::pair<std::string, Key>> keyed;
    keyed.reserve(records.size());
    std::set<Key> distinct;
    for (const auto& [id, rec] : records) {
        FeatureVector f = estimate_features(rec, thresholds.tau_s);
        int difficult = discriminate(rec, thresholds) == CaseLabel::Difficult ? 1 : 0;
        int mismatch = f.predicted_count != f.estimated_count ? 1 : 0;
        Key key{difficult, mismatch, f.estimated_count, -f.min_area_ratio};
        keyed.emplace_back(id, key);
        distinct.insert(key);
    }

    // Dense rank: identical feature tuples share a score.
    std::map<Key, double> rank;
    double next = 0.0;
    for (const Key& k : distinct) rank[k] = next++;

    std::vector<DifficultyScore> scores;
    scores.reserve(keyed.size());
    for (const auto& [id, key] : keyed) {
        scores.push_back({id, rank[key], ScoreMethod::Semantic});
    }
    return scores;
}

} // namespace hcg
