#include "hcg/serial.hpp"

using nlohmann::json;

namespace hcg {

std::string canonical_dump(const json& j) {
    // nlohmann::json keeps object keys in a sorted std::map; dump() without
    // indentation is already the canonical form.
    return j.dump();
}

json to_json(const Box& box) {
    return json::array({box.xmin, box.ymin, box.xmax, box.ymax});
}

Box box_from_json(const json& j) {
    if (!j.is_array() || j.size() != 4) throw std::runtime_error("box must be a 4-element array");
    return Box{j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

json to_json(const FinalDetection& det) {
    return json{{"box", to_json(det.box)}, {"class", det.class_id}, {"score", det.score}};
}

FinalDetection final_detection_from_json(const json& j) {
    FinalDetection det;
    det.box = box_from_json(j.at("box"));
    det.class_id = j.at("class").get<int>();
    det.score = j.at("score").get<double>();
    return det;
}

json to_json(const MetricsReport& report, ApMode mode) {
    json per_class = json::array();
    for (const auto& [cls, ap] : report.per_class_ap) {
        per_class.push_back(json::array({cls, ap}));
    }
    return json{{"map_value", report.map_value},
                {"per_class_ap", per_class},
                {"detected_objects", report.detected_objects},
                {"detected_objects_definition", "true_positive_matches_iou_0.5"},
                {"upload_ratio", report.upload_ratio},
                {"image_count", report.image_count},
                {"difficult_count", report.difficult_count},
                {"mode", to_string(mode)}};
}

} // namespace hcg
