#pragma once

#include "hcg/wire.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace hcg {

// Thin RAII layer over a connected TCP stream socket.
class TcpStream {
public:
    TcpStream() = default;
    explicit TcpStream(int fd) : fd_(fd) {}
    TcpStream(TcpStream&& other) noexcept;
    TcpStream& operator=(TcpStream&& other) noexcept;
    TcpStream(const TcpStream&) = delete;
    TcpStream& operator=(const TcpStream&) = delete;
    ~TcpStream();

    static TcpStream connect(const std::string& host, int port);

    bool valid() const { return fd_ >= 0; }
    void close();
    // Half-close both directions without releasing the fd; unblocks a
    // concurrent recv on this stream from another thread.
    void shutdown_both();

    // Throws on any short write.
    void send_all(const void* data, std::size_t size);
    // False on clean EOF before the first byte; throws on mid-read EOF/error.
    bool recv_exact(void* data, std::size_t size);

    long long bytes_sent() const { return bytes_sent_; }

    // Framed I/O on top of the stream. send_frame returns the frame's size
    // on the wire; recv_frame returns nullopt on clean EOF and throws on a
    // malformed header or payload.
    std::size_t send_frame(const Frame& frame);
    std::optional<Frame> recv_frame();

private:
    int fd_ = -1;
    long long bytes_sent_ = 0;
};

// Listening socket; port 0 binds an ephemeral port (see port()).
class TcpListener {
public:
    TcpListener() = default;
    TcpListener(TcpListener&& other) noexcept;
    TcpListener& operator=(TcpListener&& other) noexcept;
    TcpListener(const TcpListener&) = delete;
    TcpListener& operator=(const TcpListener&) = delete;
    ~TcpListener();

    static TcpListener bind(const std::string& host, int port);

    int port() const { return port_; }
    bool valid() const { return fd_ >= 0; }

    // Blocks until a connection arrives; nullopt once stop_accepting() was
    // called (or on a fatal listener error).
    std::optional<TcpStream> accept();
    void stop_accepting();
    void close();

private:
    int fd_ = -1;
    int port_ = 0;
};

} // namespace hcg
