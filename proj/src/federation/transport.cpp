#include "fedscreen/federation/transport.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <mutex>

#include "fedscreen/error.hpp"

namespace fedscreen::fed {

namespace {

// One direction of an in-process stream.
struct Pipe {
    std::mutex mu;
    std::condition_variable cv;
    std::deque<std::uint8_t> bytes;
    bool closed = false;
};

class InprocConnection final : public Connection {
public:
    InprocConnection(std::shared_ptr<Pipe> in, std::shared_ptr<Pipe> out) : in_(std::move(in)), out_(std::move(out)) {}
    ~InprocConnection() override { close(); }

    void write_all(std::span<const std::uint8_t> bytes) override {
        std::lock_guard lock(out_->mu);
        if (out_->closed) throw Error(ErrorCode::channel_closed, "connection closed");
        out_->bytes.insert(out_->bytes.end(), bytes.begin(), bytes.end());
        out_->cv.notify_all();
    }

    std::size_t read_some(std::span<std::uint8_t> buf) override {
        std::unique_lock lock(in_->mu);
        in_->cv.wait(lock, [&] { return !in_->bytes.empty() || in_->closed; });
        const std::size_t n = std::min(buf.size(), in_->bytes.size());
        std::copy_n(in_->bytes.begin(), n, buf.begin());
        in_->bytes.erase(in_->bytes.begin(), in_->bytes.begin() + static_cast<std::ptrdiff_t>(n));
        return n;
    }

    void close() override {
        for (auto* p : {in_.get(), out_.get()}) {
            std::lock_guard lock(p->mu);
            p->closed = true;
            p->cv.notify_all();
        }
    }

private:
    std::shared_ptr<Pipe> in_;
    std::shared_ptr<Pipe> out_;
};

Error sys_error(const std::string& what) {
    return Error(ErrorCode::io_failure, what + ": " + std::strerror(errno));
}

class TcpConnection final : public Connection {
public:
    explicit TcpConnection(int fd) : fd_(fd) {
        int one = 1;
        ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    }
    ~TcpConnection() override {
        close();
        ::close(fd_);
    }

    void write_all(std::span<const std::uint8_t> bytes) override {
        std::size_t off = 0;
        while (off < bytes.size()) {
            const ssize_t n = ::send(fd_, bytes.data() + off, bytes.size() - off, MSG_NOSIGNAL);
            if (n < 0) {
                if (errno == EINTR) continue;
                throw Error(ErrorCode::channel_closed, std::string("connection closed: ") + std::strerror(errno));
            }
            off += static_cast<std::size_t>(n);
        }
    }

    std::size_t read_some(std::span<std::uint8_t> buf) override {
        for (;;) {
            const ssize_t n = ::recv(fd_, buf.data(), buf.size(), 0);
            if (n >= 0) return static_cast<std::size_t>(n);
            if (errno == EINTR) continue;
            return 0;
        }
    }

    void close() override { ::shutdown(fd_, SHUT_RDWR); }

private:
    int fd_;
};

}  // namespace

std::pair<std::unique_ptr<Connection>, std::unique_ptr<Connection>> make_inproc_pair() {
    auto a_to_b = std::make_shared<Pipe>();
    auto b_to_a = std::make_shared<Pipe>();
    return {std::make_unique<InprocConnection>(b_to_a, a_to_b), std::make_unique<InprocConnection>(a_to_b, b_to_a)};
}

TcpListener::TcpListener(std::uint16_t port) {
    fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd_ < 0) throw sys_error("socket");
    int one = 1;
    ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    addr.sin_port = htons(port);
    if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0 || ::listen(fd_, 64) < 0) {
        const Error e = sys_error("cannot listen on port " + std::to_string(port));
        ::close(fd_);
        throw e;
    }
    socklen_t len = sizeof addr;
    ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);
}

TcpListener::~TcpListener() {
    if (fd_ >= 0) ::close(fd_);
}

std::unique_ptr<Connection> TcpListener::accept(std::chrono::milliseconds timeout) {
    pollfd p{fd_, POLLIN, 0};
    for (;;) {
        const int r = ::poll(&p, 1, static_cast<int>(timeout.count()));
        if (r < 0 && errno == EINTR) continue;
        if (r < 0) throw sys_error("poll");
        if (r == 0) throw Error(ErrorCode::channel_closed, "timed out waiting for a client to connect");
        break;
    }
    const int c = ::accept(fd_, nullptr, nullptr);
    if (c < 0) throw sys_error("accept");
    return std::make_unique<TcpConnection>(c);
}

std::unique_ptr<Connection> tcp_connect(const std::string& host, std::uint16_t port) {
    const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) throw sys_error("socket");
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
        ::close(fd);
        throw Error(ErrorCode::invalid_config, "not an IPv4 address: " + host);
    }
    if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0) {
        const Error e = sys_error("cannot connect to " + host + ":" + std::to_string(port));
        ::close(fd);
        throw e;
    }
    return std::make_unique<TcpConnection>(fd);
}

std::size_t TrafficCounter::shards() const { return count(Message(ShardMsg{}).index()); }

Endpoint::Endpoint(std::unique_ptr<Connection> conn, ShardPolicy policy, std::shared_ptr<TrafficCounter> counter)
    : conn_(std::move(conn)), policy_(policy), counter_(std::move(counter)) {}

void Endpoint::send(const Message& m) {
    if (policy_ == ShardPolicy::forbid && std::holds_alternative<ShardMsg>(m)) {
        throw Error(ErrorCode::privacy_violation, "raw client data may not leave a client in this mode");
    }
    const auto frame = serialize_message(m);
    conn_->write_all(frame);
    if (counter_) counter_->sent[m.index()].fetch_add(1);
}

Message Endpoint::receive() {
    auto read_exact = [&](std::span<std::uint8_t> buf, bool at_boundary) {
        std::size_t got = 0;
        while (got < buf.size()) {
            const std::size_t n = conn_->read_some(buf.subspan(got));
            if (n == 0) {
                conn_->close();
                if (at_boundary && got == 0) throw Error(ErrorCode::channel_closed, "connection closed by peer");
                throw Error(ErrorCode::malformed_payload, "message: truncated frame");
            }
            got += n;
        }
    };
    std::array<std::uint8_t, kFrameHeaderBytes> header{};
    read_exact(header, true);
    const std::uint32_t n = read_frame_length(header);
    if (n > kMaxPayloadBytes) {
        conn_->close();
        throw Error(ErrorCode::frame_too_large, "message: frame exceeds the 64 MiB limit");
    }
    std::vector<std::uint8_t> payload(n);
    read_exact(payload, false);
    try {
        Message m = decode_payload(std::string_view(reinterpret_cast<const char*>(payload.data()), payload.size()));
        if (policy_ == ShardPolicy::forbid && std::holds_alternative<ShardMsg>(m)) {
            throw Error(ErrorCode::privacy_violation, "received raw client data in a mode that forbids it");
        }
        return m;
    } catch (...) {
        conn_->close();
        throw;
    }
}

void Endpoint::close() { conn_->close(); }

}  // namespace fedscreen::fed
