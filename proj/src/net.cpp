#include "hcg/net.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <stdexcept>
#include <utility>

namespace hcg {

namespace {

[[noreturn]] void fail_errno(const std::string& what) {
    throw std::runtime_error(what + ": " + std::strerror(errno));
}

} // namespace

TcpStream::TcpStream(TcpStream&& other) noexcept
    : fd_(std::exchange(other.fd_, -1)), bytes_sent_(std::exchange(other.bytes_sent_, 0)) {}

TcpStream& TcpStream::operator=(TcpStream&& other) noexcept {
    if (this != &other) {
        close();
        fd_ = std::exchange(other.fd_, -1);
        bytes_sent_ = std::exchange(other.bytes_sent_, 0);
    }
    return *this;
}

TcpStream::~TcpStream() { close(); }

void TcpStream::close() {
    if (fd_ >= 0) {
        ::close(fd_);
        fd_ = -1;
    }
}

void TcpStream::shutdown_both() {
    if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
}

TcpStream TcpStream::connect(const std::string& host, int port) {
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* result = nullptr;
    std::string service = std::to_string(port);
    int rc = ::getaddrinfo(host.c_str(), service.c_str(), &hints, &result);
    if (rc != 0) throw std::runtime_error("resolve " + host + ": " + gai_strerror(rc));

    int fd = -1;
    for (addrinfo* ai = result; ai != nullptr; ai = ai->ai_next) {
        fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
        if (fd < 0) continue;
        if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
        ::close(fd);
        fd = -1;
    }
    ::freeaddrinfo(result);
    if (fd < 0) throw std::runtime_error("cannot connect to " + host + ":" + service);
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
    return TcpStream(fd);
}

void TcpStream::send_all(const void* data, std::size_t size) {
    const char* p = static_cast<const char*>(data);
    std::size_t left = size;
    while (left > 0) {
        ssize_t n = ::send(fd_, p, left, MSG_NOSIGNAL);
        if (n <= 0) {
            if (n < 0 && errno == EINTR) continue;
            fail_errno("send");
        }
        p += n;
        left -= static_cast<std::size_t>(n);
        bytes_sent_ += n;
    }
}

bool TcpStream::recv_exact(void* data, std::size_t size) {
    char* p = static_cast<char*>(data);
    std::size_t got = 0;
    while (got < size) {
        ssize_t n = ::recv(fd_, p + got, size - got, 0);
        if (n == 0) {
            if (got == 0) return false;
            throw std::runtime_error("connection closed mid-frame");
        }
        if (n < 0) {
            if (errno == EINTR) continue;
            fail_errno("recv");
        }
        got += static_cast<std::size_t>(n);
    }
    return true;
}

std::size_t TcpStream::send_frame(const Frame& frame) {
    std::string bytes = encode_frame(frame);
    send_all(bytes.data(), bytes.size());
    return bytes.size();
}

std::optional<Frame> TcpStream::recv_frame() {
    char header[kWireHeaderSize];
    if (!recv_exact(header, sizeof(header))) return std::nullopt;

    Frame probe;
    std::size_t consumed = 0;
    DecodeStatus status = decode_frame(std::string_view(header, sizeof(header)), probe, consumed);
    if (status != DecodeStatus::Ok && status != DecodeStatus::Truncated) {
        throw std::runtime_error(std::string("bad frame header: ") + to_string(status));
    }

    std::uint32_t len = (static_cast<std::uint32_t>(static_cast<std::uint8_t>(header[5])) << 24) |
                        (static_cast<std::uint32_t>(static_cast<std::uint8_t>(header[6])) << 16) |
                        (static_cast<std::uint32_t>(static_cast<std::uint8_t>(header[7])) << 8) |
                        static_cast<std::uint32_t>(static_cast<std::uint8_t>(header[8]));
    Frame frame;
    frame.type = static_cast<MsgType>(static_cast<std::uint8_t>(header[4]));
    frame.payload.resize(len);
    if (len > 0 && !recv_exact(frame.payload.data(), len)) {
        throw std::runtime_error("connection closed mid-frame");
    }
    return frame;
}

TcpListener::TcpListener(TcpListener&& other) noexcept
    : fd_(std::exchange(other.fd_, -1)), port_(std::exchange(other.port_, 0)) {}

TcpListener& TcpListener::operator=(TcpListener&& other) noexcept {
    if (this != &other) {
        close();
        fd_ = std::exchange(other.fd_, -1);
        port_ = std::exchange(other.port_, 0);
    }
    return *this;
}

TcpListener::~TcpListener() { close(); }

TcpListener TcpListener::bind(const std::string& host, int port) {
    addrinfo hints{};
    hints.ai_family = AF_INET;
    hints.ai_socktype = SOCK_STREAM;
    hints.ai_flags = AI_PASSIVE;
    addrinfo* result = nullptr;
    std::string service = std::to_string(port);
    int rc = ::getaddrinfo(host.empty() ? nullptr : host.c_str(), service.c_str(), &hints, &result);
    if (rc != 0) throw std::runtime_error("resolve " + host + ": " + gai_strerror(rc));

    int fd = -1;
    for (addrinfo* ai = result; ai != nullptr; ai = ai->ai_next) {
        fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
        if (fd < 0) continue;
        int one = 1;
        ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
        if (::bind(fd, ai->ai_addr, ai->ai_addrlen) == 0 && ::listen(fd, 64) == 0) break;
        ::close(fd);
        fd = -1;
    }
    ::freeaddrinfo(result);
    if (fd < 0) fail_errno("bind " + host + ":" + service);

    sockaddr_in addr{};
    socklen_t addrlen = sizeof(addr);
    if (::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &addrlen) != 0) {
        ::close(fd);
        fail_errno("getsockname");
    }
    TcpListener listener;
    listener.fd_ = fd;
    listener.port_ = ntohs(addr.sin_port);
    return listener;
}

std::optional<TcpStream> TcpListener::accept() {
    int fd = fd_;
    while (fd >= 0) {
        int client = ::accept(fd, nullptr, nullptr);
        if (client >= 0) {
            int one = 1;
            ::setsockopt(client, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
            return TcpStream(client);
        }
        if (errno == EINTR) continue;
        return std::nullopt;  // listener shut down or failed
    }
    return std::nullopt;
}

void TcpListener::stop_accepting() {
    // Unblocks a concurrent accept(); the fd itself stays owned until close()
    // so it cannot be reused under the accepting thread.
    if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
}

void TcpListener::close() {
    if (fd_ >= 0) {
        ::close(fd_);
        fd_ = -1;
    }
}

} // namespace hcg
