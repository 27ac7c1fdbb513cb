#pragma once

#include "hcg/core.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace hcg {

// Framed wire protocol between the edge agent and the cloud server:
//
//   +---------+----------+------------------+---------------------+
//   | "HCG1"  | msg_type | payload_len (BE) | payload (UTF-8 JSON)|
//   | 4 bytes | 1 byte   | 4 bytes          | payload_len bytes   |
//   +---------+----------+------------------+---------------------+
//
// payload_len is capped at 16 MiB. Request payloads carry a zero-filled
// padding string standing in for the image pixels, so the bytes on the wire
// reflect the configured upload volume.

constexpr char kWireMagic[4] = {'H', 'C', 'G', '1'};
constexpr std::size_t kWireHeaderSize = 9;
constexpr std::size_t kWireMaxPayload = 16u * 1024u * 1024u;

enum class MsgType : std::uint8_t {
    DetectRequest = 1,
    DetectResponse = 2,
    Error = 3,
    Ping = 4,
    Pong = 5,
};

struct Frame {
    MsgType type = MsgType::Ping;
    std::string payload;
};

enum class DecodeStatus {
    Ok,
    BadMagic,
    BadType,
    Oversize,
    Truncated,
};

const char* to_string(DecodeStatus status);

std::string encode_frame(const Frame& frame);

// Decode one frame from the front of `bytes`. On Ok, `consumed` is the full
// frame size. Truncated means more bytes are needed; the other statuses are
// fatal for the stream.
DecodeStatus decode_frame(std::string_view bytes, Frame& out, std::size_t& consumed);

// Payload schemas.
struct DetectRequest {
    std::string image_id;
    long long padding_bytes = 0;
};

struct DetectResponse {
    std::string image_id;
    std::vector<FinalDetection> detections;
};

std::string encode_detect_request(const DetectRequest& request);
DetectRequest parse_detect_request(const std::string& payload);

std::string encode_detect_response(const DetectResponse& response);
DetectResponse parse_detect_response(const std::string& payload);

std::string encode_error(const std::string& reason);
std::string parse_error_reason(const std::string& payload);

} // namespace hcg
