#pragma once

#include <atomic>
#include <cstdint>
#include <list>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include "feather/wire.hpp"

namespace feather {

/// Server side of the request/response protocol.
class MessageHandler {
public:
    virtual ~MessageHandler() = default;
    /// Must answer every request, using ERROR for failures.
    virtual WireMessage handle(const WireMessage& request) = 0;
};

/// Raised when the peer cannot be reached.
class TransportError : public FeatherError {
public:
    using FeatherError::FeatherError;
};

/// Client side: one request, one response.
class Transport {
public:
    virtual ~Transport() = default;
    virtual WireMessage roundtrip(const WireMessage& request) = 0;
};

/// Calls a handler directly, passing both messages through the frame codec.
class InProcessTransport final : public Transport {
public:
    explicit InProcessTransport(MessageHandler& handler) : handler_(handler) {}

    WireMessage roundtrip(const WireMessage& request) override;

    /// While offline every roundtrip throws TransportError.
    void set_online(bool online) { online_ = online; }
    bool online() const { return online_; }
    std::uint64_t requests() const { return requests_; }

private:
    MessageHandler& handler_;
    std::atomic<bool> online_{true};
    std::atomic<std::uint64_t> requests_{0};
};

struct Endpoint {
    std::string host = "127.0.0.1";
    std::uint16_t port = 0;

    /// Parses "host:port".
    static Endpoint parse(std::string_view text);
    std::string to_string() const { return host + ":" + std::to_string(port); }
};

/// Blocking TCP client; reconnects lazily after a failure.
class TcpTransport final : public Transport {
public:
    explicit TcpTransport(Endpoint endpoint) : endpoint_(std::move(endpoint)) {}
    ~TcpTransport() override;
    TcpTransport(const TcpTransport&) = delete;
    TcpTransport& operator=(const TcpTransport&) = delete;

    WireMessage roundtrip(const WireMessage& request) override;

private:
    void connect_locked();
    void close_locked();

    Endpoint endpoint_;
    std::mutex mutex_;
    int fd_ = -1;
};

/// Accepts connections and serves each on its own thread.
class TcpServer {
public:
    /// Port 0 picks an ephemeral port; see port().
    TcpServer(MessageHandler& handler, std::string bind_host = "127.0.0.1", std::uint16_t port = 0);
    ~TcpServer();
    TcpServer(const TcpServer&) = delete;
    TcpServer& operator=(const TcpServer&) = delete;

    std::uint16_t port() const { return port_; }
    void stop();

private:
    void accept_loop();
    void serve(int fd);

    MessageHandler& handler_;
    int listen_fd_ = -1;
    std::uint16_t port_ = 0;
    std::atomic<bool> running_{true};
    std::thread acceptor_;
    std::mutex conn_mutex_;
    std::list<std::thread> connections_;
    std::list<int> open_fds_;
};

} // namespace feather
