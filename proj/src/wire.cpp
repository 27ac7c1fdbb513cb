#include "hcg/wire.hpp"

#include "hcg/serial.hpp"

#include <json.hpp>

#include <cstring>
#include <stdexcept>

using nlohmann::json;

namespace hcg {

const char* to_string(DecodeStatus status) {
    switch (status) {
        case DecodeStatus::Ok: return "ok";
        case DecodeStatus::BadMagic: return "bad_magic";
        case DecodeStatus::BadType: return "bad_type";
        case DecodeStatus::Oversize: return "oversize";
        case DecodeStatus::Truncated: return "truncated";
    }
    return "unknown";
}

std::string encode_frame(const Frame& frame) {
    if (frame.payload.size() > kWireMaxPayload)
        throw std::invalid_argument("encode_frame: payload exceeds 16 MiB");
    std::string out;
    out.reserve(kWireHeaderSize + frame.payload.size());
    out.append(kWireMagic, 4);
    out.push_back(static_cast<char>(frame.type));
    auto len = static_cast<std::uint32_t>(frame.payload.size());
    out.push_back(static_cast<char>((len >> 24) & 0xFF));
    out.push_back(static_cast<char>((len >> 16) & 0xFF));
    out.push_back(static_cast<char>((len >> 8) & 0xFF));
    out.push_back(static_cast<char>(len & 0xFF));
    out.append(frame.payload);
    return out;
}

DecodeStatus decode_frame(std::string_view bytes, Frame& out, std::size_t& consumed) {
    consumed = 0;
    if (bytes.size() < kWireHeaderSize) return DecodeStatus::Truncated;
    if (std::memcmp(bytes.data(), kWireMagic, 4) != 0) return DecodeStatus::BadMagic;
    auto type = static_cast<std::uint8_t>(bytes[4]);
    if (type < 1 || type > 5) return DecodeStatus::BadType;
    std::uint32_t len = (static_cast<std::uint32_t>(static_cast<std::uint8_t>(bytes[5])) << 24) |
                        (static_cast<std::uint32_t>(static_cast<std::uint8_t>(bytes[6])) << 16) |
                        (static_cast<std::uint32_t>(static_cast<std::uint8_t>(bytes[7])) << 8) |
                        static_cast<std::uint32_t>(static_cast<std::uint8_t>(bytes[8]));
    if (len > kWireMaxPayload) return DecodeStatus::Oversize;
    if (bytes.size() < kWireHeaderSize + len) return DecodeStatus::Truncated;
    out.type = static_cast<MsgType>(type);
    out.payload.assign(bytes.data() + kWireHeaderSize, len);
    consumed = kWireHeaderSize + len;
    return DecodeStatus::Ok;
}

std::string encode_detect_request(const DetectRequest& request) {
    if (request.padding_bytes < 0)
        throw std::invalid_argument("detect request: padding_bytes must be >= 0");
    json j{{"image_id", request.image_id},
           {"padding_bytes", request.padding_bytes},
           {"padding", std::string(static_cast<std::size_t>(request.padding_bytes), '0')}};
    return canonical_dump(j);
}

DetectRequest parse_detect_request(const std::string& payload) {
    json j = json::parse(payload);
    DetectRequest request;
    request.image_id = j.at("image_id").get<std::string>();
    request.padding_bytes = j.at("padding_bytes").get<long long>();
    return request;
}

std::string encode_detect_response(const DetectResponse& response) {
    json dets = json::array();
    for (const FinalDetection& d : response.detections) dets.push_back(to_json(d));
    return canonical_dump(json{{"image_id", response.image_id}, {"detections", dets}});
}

DetectResponse parse_detect_response(const std::string& payload) {
    json j = json::parse(payload);
    DetectResponse response;
    response.image_id = j.at("image_id").get<std::string>();
    for (const json& dj : j.at("detections")) {
        response.detections.push_back(final_detection_from_json(dj));
    }
    return response;
}

std::string encode_error(const std::string& reason) {
    return canonical_dump(json{{"reason", reason}});
}

std::string parse_error_reason(const std::string& payload) {
    return json::parse(payload).at("reason").get<std::string>();
}

} // namespace hcg
