#include "feather/transport.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>

namespace feather {

WireMessage InProcessTransport::roundtrip(const WireMessage& request)
{
    if (!online_) throw TransportError("endpoint offline");
    ++requests_;
    const WireMessage delivered = decode_frame(encode_frame(request));
    WireMessage reply;
    try {
        reply = handler_.handle(delivered);
        return decode_frame(encode_frame(reply));
    } catch (const WireError& e) {
        if (e.kind() != WireError::Kind::FrameTooLarge) throw;
        return make_error(e.code(), e.what());
    }
}

Endpoint Endpoint::parse(std::string_view text)
{
    auto colon = text.rfind(':');
    if (colon == std::string_view::npos || colon + 1 == text.size()) {
        throw DecodeError("endpoint must be host:port, got '" + std::string(text) + "'");
    }
    Endpoint ep;
    ep.host = std::string(text.substr(0, colon));
    unsigned long port = 0;
    try {
        port = std::stoul(std::string(text.substr(colon + 1)));
    } catch (const std::exception&) {
        throw DecodeError("invalid port in endpoint '" + std::string(text) + "'");
    }
    if (port > 65535) throw DecodeError("port out of range in '" + std::string(text) + "'");
    ep.port = static_cast<std::uint16_t>(port);
    return ep;
}

namespace {

bool write_all(int fd, ByteSpan data)
{
    std::size_t sent = 0;
    while (sent < data.size()) {
        ssize_t n = ::send(fd, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
        if (n < 0 && errno == EINTR) continue;
        if (n <= 0) return false;
        sent += static_cast<std::size_t>(n);
    }
    return true;
}

bool read_exact(int fd, std::uint8_t* out, std::size_t n)
{
    std::size_t got = 0;
    while (got < n) {
        ssize_t r = ::recv(fd, out + got, n - got, 0);
        if (r < 0 && errno == EINTR) continue;
        if (r <= 0) return false;
        got += static_cast<std::size_t>(r);
    }
    return true;
}

/// Reads one frame; nullopt on a clean or broken disconnect.
std::optional<WireMessage> read_message(int fd)
{
    std::uint8_t prefix[4];
    if (!read_exact(fd, prefix, 4)) return std::nullopt;
    const std::uint32_t length = read_frame_length(prefix);
    Bytes payload(length);
    if (!read_exact(fd, payload.data(), length)) return std::nullopt;
    return decode_frame_payload(payload);
}

} // namespace

TcpTransport::~TcpTransport()
{
    std::lock_guard lock(mutex_);
    close_locked();
}

void TcpTransport::close_locked()
{
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
}

void TcpTransport::connect_locked()
{
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    const std::string port = std::to_string(endpoint_.port);
    if (::getaddrinfo(endpoint_.host.c_str(), port.c_str(), &hints, &res) != 0 || res == nullptr) {
        throw TransportError("cannot resolve " + endpoint_.to_string());
    }
    int fd = -1;
    for (addrinfo* ai = res; ai != nullptr; ai = ai->ai_next) {
        fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
        if (fd < 0) continue;
        if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
        ::close(fd);
        fd = -1;
    }
    ::freeaddrinfo(res);
    if (fd < 0) throw TransportError("cannot connect to " + endpoint_.to_string());
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    fd_ = fd;
}

WireMessage TcpTransport::roundtrip(const WireMessage& request)
{
    const Bytes frame = encode_frame(request);
    std::lock_guard lock(mutex_);
    // One retry covers a server that dropped an idle connection.
    for (int attempt = 0; attempt < 2; ++attempt) {
        if (fd_ < 0) connect_locked();
        if (write_all(fd_, frame)) {
            if (auto reply = read_message(fd_)) return *reply;
        }
        close_locked();
    }
    throw TransportError("connection to " + endpoint_.to_string() + " failed");
}

TcpServer::TcpServer(MessageHandler& handler, std::string bind_host, std::uint16_t port) : handler_(handler)
{
    listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listen_fd_ < 0) throw TransportError(std::string("socket: ") + std::strerror(errno));
    int one = 1;
    ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);

    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    if (::inet_pton(AF_INET, bind_host.c_str(), &addr.sin_addr) != 1) {
        ::close(listen_fd_);
        throw TransportError("invalid bind address " + bind_host);
    }
    if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 || ::listen(listen_fd_, 64) != 0) {
        const std::string err = std::strerror(errno);
        ::close(listen_fd_);
        throw TransportError("bind " + bind_host + ":" + std::to_string(port) + ": " + err);
    }
    socklen_t len = sizeof addr;
    ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);
    acceptor_ = std::thread([this] { accept_loop(); });
}

TcpServer::~TcpServer() { stop(); }

void TcpServer::stop()
{
    if (!running_.exchange(false)) return;
    ::shutdown(listen_fd_, SHUT_RDWR);
    ::close(listen_fd_);
    if (acceptor_.joinable()) acceptor_.join();
    std::list<std::thread> conns;
    {
        std::lock_guard lock(conn_mutex_);
        for (int fd : open_fds_) ::shutdown(fd, SHUT_RDWR);
        conns.swap(connections_);
    }
    for (auto& t : conns) t.join();
}

void TcpServer::accept_loop()
{
    while (running_) {
        int fd = ::accept(listen_fd_, nullptr, nullptr);
        if (fd < 0) {
            if (errno == EINTR) continue;
            return;
        }
        std::lock_guard lock(conn_mutex_);
        if (!running_) {
            ::close(fd);
            return;
        }
        open_fds_.push_back(fd);
        connections_.emplace_back([this, fd] { serve(fd); });
    }
}

void TcpServer::serve(int fd)
{
    while (running_) {
        std::optional<WireMessage> request;
        try {
            request = read_message(fd);
        } catch (const WireError& e) {
            // Oversized or malformed frame: answer once, then drop the stream.
            write_all(fd, encode_frame(make_error(e.code(), e.what())));
            break;
        }
        if (!request) break;
        Bytes reply;
        try {
            reply = encode_frame(handler_.handle(*request));
        } catch (const WireError& e) {
            reply = encode_frame(make_error(e.code(), e.what()));
        }
        if (!write_all(fd, reply)) break;
    }
    std::lock_guard lock(conn_mutex_);
    open_fds_.remove(fd);
    ::close(fd);
}

} // namespace feather
