#pragma once

#include <array>
#include <atomic>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <utility>

#include "fedscreen/federation/message.hpp"

namespace fedscreen::fed {

// A reliable, ordered byte stream. close() must wake a reader blocked on
// either end.
class Connection {
public:
    virtual ~Connection() = default;
    virtual void write_all(std::span<const std::uint8_t> bytes) = 0;
    // Blocks until at least one byte arrives; returns 0 once the stream ended.
    virtual std::size_t read_some(std::span<std::uint8_t> buf) = 0;
    virtual void close() = 0;
};

std::pair<std::unique_ptr<Connection>, std::unique_ptr<Connection>> make_inproc_pair();

inline constexpr std::uint16_t kDefaultPort = 7461;

// Loopback TCP. Port 0 binds an ephemeral port. accept() throws
// channel_closed when the timeout passes.
class TcpListener {
public:
    explicit TcpListener(std::uint16_t port);
    ~TcpListener();
    TcpListener(const TcpListener&) = delete;
    TcpListener& operator=(const TcpListener&) = delete;

    std::uint16_t port() const { return port_; }
    std::unique_ptr<Connection> accept(std::chrono::milliseconds timeout);

private:
    int fd_ = -1;
    std::uint16_t port_ = 0;
};

std::unique_ptr<Connection> tcp_connect(const std::string& host, std::uint16_t port);

// Message counts per type, shared by every endpoint of one run.
struct TrafficCounter {
    std::array<std::atomic<std::size_t>, kMessageTypeCount> sent{};

    std::size_t count(std::size_t type_index) const { return sent[type_index].load(); }
    std::size_t shards() const;
};

enum class ShardPolicy { allow, forbid };

// Frames messages over a Connection. With ShardPolicy::forbid any attempt to
// send or accept a ShardMsg throws privacy_violation before bytes move.
class Endpoint {
public:
    Endpoint(std::unique_ptr<Connection> conn, ShardPolicy policy, std::shared_ptr<TrafficCounter> counter = nullptr);

    void send(const Message& m);
    // Throws channel_closed on a clean end of stream, malformed_payload on a
    // truncated frame. Any failure closes the connection.
    Message receive();
    void close();

private:
    std::unique_ptr<Connection> conn_;
    ShardPolicy policy_;
    std::shared_ptr<TrafficCounter> counter_;
};

}  // namespace fedscreen::fed
