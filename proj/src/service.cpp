#include "hcg/service.hpp"

#include "hcg/serial.hpp"
#include "hcg/wire.hpp"

#include <mutex>
#include <stdexcept>

namespace hcg {

CloudServer::CloudServer(std::map<std::string, DetectionRecord> big_traces, double cutoff)
    : big_traces_(std::move(big_traces)), cutoff_(cutoff) {}

CloudServer::~CloudServer() { stop(); }

void CloudServer::start(const std::string& host, int port) {
    if (running_) throw std::logic_error("CloudServer already running");
    listener_ = TcpListener::bind(host, port);
    running_ = true;
    accept_thread_ = std::thread([this] { accept_loop(); });
}

void CloudServer::stop() {
    if (!running_) return;
    running_ = false;
    listener_.stop_accepting();
    if (accept_thread_.joinable()) accept_thread_.join();
    std::vector<std::thread> workers;
    {
        std::lock_guard<std::mutex> lock(threads_mutex_);
        workers.swap(connection_threads_);
        // Unblock workers still waiting in recv on a live connection.
        for (TcpStream* s : active_connections_) s->shutdown_both();
    }
    for (std::thread& t : workers) {
        if (t.joinable()) t.join();
    }
    listener_.close();
}

void CloudServer::accept_loop() {
    while (true) {
        std::optional<TcpStream> stream = listener_.accept();
        if (!stream) break;
        std::lock_guard<std::mutex> lock(threads_mutex_);
        connection_threads_.emplace_back(
            [this](TcpStream s) { handle_connection(std::move(s)); }, std::move(*stream));
    }
}

void CloudServer::handle_connection(TcpStream stream) {
    {
        std::lock_guard<std::mutex> lock(threads_mutex_);
        active_connections_.push_back(&stream);
    }
    struct Deregister {
        CloudServer* server;
        TcpStream* stream;
        ~Deregister() {
            std::lock_guard<std::mutex> lock(server->threads_mutex_);
            server->active_connections_.remove(stream);
        }
    } deregister{this, &stream};

    try {
        while (true) {
            std::optional<Frame> frame;
            try {
                frame = stream.recv_frame();
            } catch (const std::exception& e) {
                // Malformed header or mid-frame EOF: answer with an Error
                // frame when the socket still takes writes, then drop.
                try {
                    stream.send_frame({MsgType::Error, encode_error(e.what())});
                } catch (...) {
                }
                return;
            }
            if (!frame) return;  // clean EOF

            switch (frame->type) {
                case MsgType::Ping:
                    stream.send_frame({MsgType::Pong, ""});
                    break;
                case MsgType::DetectRequest: {
                    DetectRequest request;
                    try {
                        request = parse_detect_request(frame->payload);
                    } catch (const std::exception&) {
                        stream.send_frame({MsgType::Error, encode_error("bad_request_payload")});
                        break;
                    }
                    auto it = big_traces_.find(request.image_id);
                    if (it == big_traces_.end()) {
                        stream.send_frame({MsgType::Error, encode_error("unknown_image")});
                        break;
                    }
                    DetectResponse response;
                    response.image_id = request.image_id;
                    response.detections = finalize(it->second, cutoff_);
                    stream.send_frame({MsgType::DetectResponse, encode_detect_response(response)});
                    break;
                }
                default:
                    stream.send_frame({MsgType::Error, encode_error("unexpected_message_type")});
                    break;
            }
        }
    } catch (const std::exception&) {
        // Peer vanished mid-reply; nothing to clean up beyond the socket.
    }
}

namespace {

// One request/response exchange. Transport failures reconnect and retry up
// to the bound; protocol-level failures (error frames, id mismatches) are
// final and surface immediately.
DetectResponse exchange(TcpStream& stream, const EdgeOptions& options, const std::string& image_id,
                        long long& wire_bytes, long long& frames_sent) {
    const std::string payload = encode_detect_request({image_id, options.padding_bytes});
    for (int attempt = 1; attempt <= options.max_attempts; ++attempt) {
        std::optional<Frame> reply;
        std::size_t sent = 0;
        try {
            if (!stream.valid()) {
                stream = TcpStream::connect(options.cloud_host, options.cloud_port);
            }
            sent = stream.send_frame({MsgType::DetectRequest, payload});
            reply = stream.recv_frame();
            if (!reply) throw std::runtime_error("connection closed by cloud");
        } catch (const std::runtime_error&) {
            stream.close();
            if (attempt == options.max_attempts) throw;
            continue;
        }
        wire_bytes += static_cast<long long>(sent);
        ++frames_sent;

        if (reply->type == MsgType::Error) {
            throw std::runtime_error("cloud error for image " + image_id + ": " +
                                     parse_error_reason(reply->payload));
        }
        if (reply->type != MsgType::DetectResponse) {
            throw std::runtime_error("unexpected reply type from cloud");
        }
        DetectResponse response = parse_detect_response(reply->payload);
        if (response.image_id != image_id) {
            throw std::runtime_error("cloud response id mismatch: asked " + image_id + ", got " +
                                     response.image_id);
        }
        return response;
    }
    throw std::runtime_error("request to the cloud failed after retries");
}

} // namespace

EdgeResult run_edge(const Dataset& dataset, const ThresholdSet& thresholds,
                    const EdgeOptions& options) {
    validate(thresholds);
    EdgeResult result;
    TcpStream stream;  // connected lazily, only when a difficult image shows up

    std::map<std::string, std::vector<FinalDetection>> final_per_image;
    long long cloud_count = 0;
    for (const auto& [id, gt] : dataset.truths) {
        auto sit = dataset.small_traces.find(id);
        if (sit == dataset.small_traces.end())
            throw std::runtime_error("run_edge: missing small trace for image " + id);

        if (discriminate(sit->second, thresholds) == CaseLabel::Easy) {
            final_per_image.emplace(id, finalize(sit->second, options.cutoff));
            continue;
        }
        if (options.offline) {
            final_per_image.emplace(id, finalize(sit->second, options.cutoff));
            ++result.offline_fallbacks;
            continue;
        }
        DetectResponse response =
            exchange(stream, options, id, result.wire_bytes, result.frames_sent);
        result.uploaded_bytes += options.padding_bytes;
        final_per_image.emplace(id, std::move(response.detections));
        ++cloud_count;
    }

    result.report =
        evaluate(final_per_image, dataset.truths, dataset.class_count(), options.mode);
    result.report.difficult_count = cloud_count;
    result.report.upload_ratio = result.report.image_count > 0
                                     ? static_cast<double>(cloud_count) / result.report.image_count
                                     : 0.0;
    return result;
}

} // namespace hcg
