#pragma once

#include "hcg/discriminator.hpp"
#include "hcg/evaluator.hpp"
#include "hcg/ingest.hpp"
#include "hcg/net.hpp"

#include <list>
#include <map>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace hcg {

// Trace-replay cloud server: answers DetectRequest frames with the finalized
// big-model trace of the requested image. Stateless per request; any number
// of concurrent connections, requests within one connection answered in
// order. The trace store is read-only after construction.
class CloudServer {
public:
    CloudServer(std::map<std::string, DetectionRecord> big_traces, double cutoff = 0.5);
    ~CloudServer();

    CloudServer(const CloudServer&) = delete;
    CloudServer& operator=(const CloudServer&) = delete;

    // Binds and starts serving; port 0 picks an ephemeral port.
    void start(const std::string& host, int port);
    int port() const { return listener_.port(); }
    void stop();

private:
    void accept_loop();
    void handle_connection(TcpStream stream);

    std::map<std::string, DetectionRecord> big_traces_;
    double cutoff_;
    TcpListener listener_;
    std::thread accept_thread_;
    std::vector<std::thread> connection_threads_;
    std::list<TcpStream*> active_connections_;
    std::mutex threads_mutex_;
    bool running_ = false;
};

struct EdgeOptions {
    std::string cloud_host = "127.0.0.1";
    int cloud_port = 0;
    long long padding_bytes = 0;  // zero-filled payload standing in for pixels
    bool offline = false;         // Difficult images fall back to the small result
    int max_attempts = 3;         // bounded reconnect attempts per request
    double cutoff = 0.5;
    ApMode mode = ApMode::ElevenPoint;
};

struct EdgeResult {
    MetricsReport report;
    long long frames_sent = 0;
    long long wire_bytes = 0;      // uplink bytes: sum of (header + payload) per request
    long long uploaded_bytes = 0;  // padding bytes only, comparable to the simulator
    long long offline_fallbacks = 0;
};

// The edge agent: discriminate every image, answer easy ones from the small
// trace, fetch difficult ones from the cloud (or fall back when offline), and
// assemble the same report the in-process simulator produces for identical
// thresholds.
EdgeResult run_edge(const Dataset& dataset, const ThresholdSet& thresholds,
                    const EdgeOptions& options);

} // namespace hcg
