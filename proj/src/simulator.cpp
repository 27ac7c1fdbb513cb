#include "hcg/simulator.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <stdexcept>

using nlohmann::json;

namespace hcg {

void validate(const ChannelModel& c) {
    if (!(c.bandwidth_bytes_per_s > 0.0) || !(c.rtt_s > 0.0) || !(c.edge_infer_s > 0.0) ||
        !(c.cloud_infer_s > 0.0) || c.bytes_per_image <= 0) {
        throw std::invalid_argument("channel model: all parameters must be strictly positive");
    }
}

ChannelModel load_channel(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(path + ": malformed JSON: " + e.what());
    }
    ChannelModel c;
    c.bandwidth_bytes_per_s = j.at("bandwidth_bytes_per_s").get<double>();
    c.rtt_s = j.at("rtt_s").get<double>();
    c.edge_infer_s = j.at("edge_infer_s").get<double>();
    c.cloud_infer_s = j.at("cloud_infer_s").get<double>();
    if (j.contains("bytes_per_image")) c.bytes_per_image = j["bytes_per_image"].get<long long>();
    validate(c);
    return c;
}

void save_channel(const std::string& path, const ChannelModel& c) {
    validate(c);
    json j{{"bandwidth_bytes_per_s", c.bandwidth_bytes_per_s},
           {"rtt_s", c.rtt_s},
           {"edge_infer_s", c.edge_infer_s},
           {"cloud_infer_s", c.cloud_infer_s},
           {"bytes_per_image", c.bytes_per_image}};
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << j.dump() << "\n";
}

std::vector<RouteDecision> route_semantic(const Dataset& dataset, const ThresholdSet& thresholds) {
    validate(thresholds);
    std::vector<RouteDecision> decisions;
    decisions.reserve(dataset.truths.size());
    for (const auto& [id, gt] : dataset.truths) {
        auto it = dataset.small_traces.find(id);
        if (it == dataset.small_traces.end())
            throw std::invalid_argument("route_semantic: missing small trace for image " + id);
        Route route = discriminate(it->second, thresholds) == CaseLabel::Difficult ? Route::Cloud
                                                                                   : Route::Edge;
        decisions.push_back({id, route});
    }
    return decisions;
}

std::vector<RouteDecision> route_by_score(std::vector<DifficultyScore> scores, double target_ratio) {
    if (!(target_ratio >= 0.0 && target_ratio <= 1.0))
        throw std::invalid_argument("route_by_score: target_ratio must be in [0, 1]");
    std::set<std::string> seen;
    for (const DifficultyScore& s : scores) {
        if (!seen.insert(s.image_id).second)
            throw std::invalid_argument("route_by_score: duplicate image_id " + s.image_id);
    }
    std::sort(scores.begin(), scores.end(), [](const DifficultyScore& a, const DifficultyScore& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.image_id < b.image_id;
    });
    auto n = static_cast<long long>(scores.size());
    // Guard the ceil against float dust (0.2 * 2000 must select 400, not 401).
    auto k = static_cast<long long>(std::ceil(target_ratio * static_cast<double>(n) - 1e-9));
    k = std::clamp<long long>(k, 0, n);

    std::vector<RouteDecision> decisions;
    decisions.reserve(scores.size());
    for (long long i = 0; i < n; ++i) {
        decisions.push_back({scores[i].image_id, i < k ? Route::Cloud : Route::Edge});
    }
    return decisions;
}

SimResult simulate(const Dataset& dataset, const std::vector<RouteDecision>& decisions,
                   const ChannelModel& channel, double cutoff, ApMode mode) {
    validate(channel);
    SimResult result;
    result.report = end_to_end(decisions, dataset.small_traces, dataset.big_traces, dataset.truths,
                               dataset.class_count(), cutoff, mode);

    double cloud_time = 0.0;
    for (const RouteDecision& d : decisions) {
        if (d.route != Route::Cloud) continue;
        auto it = dataset.image_bytes.find(d.image_id);
        long long bytes = it != dataset.image_bytes.end() ? it->second : channel.bytes_per_image;
        result.uploaded_bytes += bytes;
        cloud_time += channel.rtt_s + static_cast<double>(bytes) / channel.bandwidth_bytes_per_s +
                      channel.cloud_infer_s;
    }
    result.total_time_s =
        static_cast<double>(result.report.image_count) * channel.edge_infer_s + cloud_time;
    return result;
}

std::vector<DifficultyScore> method_scores(const Dataset& dataset, const SweepOptions& options) {
    std::vector<DifficultyScore> scores;
    switch (options.method) {
        case ScoreMethod::Random: {
            std::vector<std::string> ids;
            ids.reserve(dataset.truths.size());
            for (const auto& [id, gt] : dataset.truths) ids.push_back(id);
            scores = random_scores(ids, options.seed);
            break;
        }
        case ScoreMethod::Brenner:
            scores = brenner_scores(dataset.images);
            break;
        case ScoreMethod::Top1Confidence:
            scores = top1_scores(dataset.small_traces, dataset.class_count());
            break;
        case ScoreMethod::Semantic:
            scores = semantic_scores(dataset.small_traces, options.thresholds);
            break;
    }
    std::set<std::string> covered;
    for (const DifficultyScore& s : scores) covered.insert(s.image_id);
    for (const auto& [id, gt] : dataset.truths) {
        if (!covered.count(id))
            throw std::runtime_error(std::string("method ") + to_string(options.method) +
                                     " has no score for image " + id);
    }
    return scores;
}

std::vector<SweepPoint> sweep(const Dataset& dataset, const SweepOptions& options,
                              const ChannelModel& channel, const std::vector<double>& ratios) {
    for (std::size_t i = 0; i < ratios.size(); ++i) {
        if (!(ratios[i] >= 0.0 && ratios[i] <= 1.0))
            throw std::invalid_argument("sweep: ratios must lie in [0, 1]");
        if (i > 0 && ratios[i] < ratios[i - 1])
            throw std::invalid_argument("sweep: ratios must be ascending");
    }
    std::vector<DifficultyScore> scores = method_scores(dataset, options);

    std::vector<SweepPoint> points;
    points.reserve(ratios.size());
    for (double ratio : ratios) {
        std::vector<RouteDecision> decisions = route_by_score(scores, ratio);
        SimResult sim = simulate(dataset, decisions, channel, options.cutoff, options.mode);
        SweepPoint p;
        p.target_ratio = ratio;
        p.achieved_ratio = sim.report.upload_ratio;
        p.map_value = sim.report.map_value;
        p.detected_objects = sim.report.detected_objects;
        p.total_time_s = sim.total_time_s;
        p.uploaded_bytes = sim.uploaded_bytes;
        points.push_back(p);
    }
    return points;
}

} // namespace hcg
