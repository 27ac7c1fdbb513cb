#pragma once

#include "hcg/core.hpp"
#include "hcg/evaluator.hpp"

#include <json.hpp>

#include <string>

namespace hcg {

// Canonical JSON: object keys sorted lexicographically, no whitespace,
// numbers in shortest round-trip decimal form (the vendored JSON library's
// default). Byte-equality of two canonical dumps therefore means value
// equality, which the edge/simulator cross-check relies on.
std::string canonical_dump(const nlohmann::json& j);

nlohmann::json to_json(const Box& box);
Box box_from_json(const nlohmann::json& j);

nlohmann::json to_json(const FinalDetection& det);
FinalDetection final_detection_from_json(const nlohmann::json& j);

// MetricsReport as emitted by `evaluate`, `simulate` and `run-edge`. The
// detected_objects_definition field records the counting convention so
// numbers are never silently compared across conventions.
nlohmann::json to_json(const MetricsReport& report, ApMode mode);

} // namespace hcg
