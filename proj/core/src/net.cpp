// SPDX-License-Identifier: Apache-2.0
#include "birdbench/net.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <list>
#include <mutex>
#include <thread>

namespace birdbench::net {

namespace {

// Longest accepted request line; longer input is answered as malformed.
constexpr std::size_t kMaxLine = 1 << 20;

std::string errno_text(const char *what) { return std::string(what) + ": " + std::strerror(errno); }

} // namespace

LineStream::~LineStream()
{
    if (fd_ >= 0)
        ::close(fd_);
}

LineStream::LineStream(LineStream &&other) noexcept : fd_(other.fd_), buffer_(std::move(other.buffer_))
{
    other.fd_ = -1;
}

LineStream &LineStream::operator=(LineStream &&other) noexcept
{
    if (this != &other) {
        if (fd_ >= 0)
            ::close(fd_);
        fd_ = other.fd_;
        buffer_ = std::move(other.buffer_);
        other.fd_ = -1;
    }
    return *this;
}

LineStream LineStream::connect(const std::string &host, std::uint16_t port)
{
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo *res = nullptr;
    const std::string service = std::to_string(port);
    if (const int rc = ::getaddrinfo(host.c_str(), service.c_str(), &hints, &res); rc != 0)
        throw NetError("resolve " + host + ": " + ::gai_strerror(rc));
    int fd = -1;
    for (auto *ai = res; ai; ai = ai->ai_next) {
        fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
        if (fd < 0)
            continue;
        if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0)
            break;
        ::close(fd);
        fd = -1;
    }
    ::freeaddrinfo(res);
    if (fd < 0)
        throw NetError("cannot connect to " + host + ":" + service);
    const int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    return LineStream(fd);
}

void LineStream::write_line(std::string_view line)
{
    std::string out(line);
    out.push_back('\n');
    std::size_t sent = 0;
    while (sent < out.size()) {
        const auto n = ::send(fd_, out.data() + sent, out.size() - sent, MSG_NOSIGNAL);
        if (n < 0) {
            if (errno == EINTR)
                continue;
            throw NetError(errno_text("send"));
        }
        sent += static_cast<std::size_t>(n);
    }
}

std::optional<std::string> LineStream::read_line()
{
    for (;;) {
        if (const auto pos = buffer_.find('\n'); pos != std::string::npos) {
            std::string line = buffer_.substr(0, pos);
            buffer_.erase(0, pos + 1);
            if (!line.empty() && line.back() == '\r')
                line.pop_back();
            return line;
        }
        if (buffer_.size() > kMaxLine) {
            std::string line = std::move(buffer_);
            buffer_.clear();
            return line;
        }
        char chunk[4096];
        const auto n = ::recv(fd_, chunk, sizeof chunk, 0);
        if (n < 0 && errno == EINTR)
            continue;
        if (n <= 0) {
            if (buffer_.empty())
                return std::nullopt;
            std::string line = std::move(buffer_);
            buffer_.clear();
            return line;
        }
        buffer_.append(chunk, static_cast<std::size_t>(n));
    }
}

void LineStream::shutdown()
{
    if (fd_ >= 0)
        ::shutdown(fd_, SHUT_RDWR);
}

struct TcpServer::Impl
{
    proto::Server &server;
    int listen_fd{-1};
    std::thread acceptor;
    std::mutex mutex;
    std::list<std::pair<int, std::thread>> workers;
    bool stopping{false};

    explicit Impl(proto::Server &s) : server(s) {}

    void serve(int fd)
    {
        LineStream stream(fd);
        const auto cid = server.open_connection();
        try {
            while (auto line = stream.read_line())
                stream.write_line(server.handle_line(cid, *line));
        } catch (const NetError &) {
            // peer went away mid-write
        }
        server.close_connection(cid);
    }

    void accept_loop()
    {
        for (;;) {
            const int fd = ::accept(listen_fd, nullptr, nullptr);
            if (fd < 0) {
                if (errno == EINTR)
                    continue;
                return; // listening socket closed
            }
            std::lock_guard lock(mutex);
            if (stopping) {
                ::close(fd);
                return;
            }
            const int one = 1;
            ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
            workers.emplace_back(fd, std::thread([this, fd] { serve(fd); }));
        }
    }
};

TcpServer::TcpServer(proto::Server &server, std::uint16_t port, std::string bind_address)
    : impl_(std::make_unique<Impl>(server))
{
    const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0)
        throw NetError(errno_text("socket"));
    const int one = 1;
    ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    if (::inet_pton(AF_INET, bind_address.c_str(), &addr.sin_addr) != 1) {
        ::close(fd);
        throw NetError("bad bind address " + bind_address);
    }
    if (::bind(fd, reinterpret_cast<sockaddr *>(&addr), sizeof addr) < 0 || ::listen(fd, 64) < 0) {
        const auto msg = errno_text("bind/listen");
        ::close(fd);
        throw NetError(msg);
    }
    socklen_t len = sizeof addr;
    ::getsockname(fd, reinterpret_cast<sockaddr *>(&addr), &len);
    port_ = ntohs(addr.sin_port);
    impl_->listen_fd = fd;
    impl_->acceptor = std::thread([this] { impl_->accept_loop(); });
}

TcpServer::~TcpServer() { stop(); }

void TcpServer::stop()
{
    {
        std::lock_guard lock(impl_->mutex);
        if (impl_->stopping)
            return;
        impl_->stopping = true;
        ::shutdown(impl_->listen_fd, SHUT_RDWR);
        ::close(impl_->listen_fd);
        for (auto &[fd, _] : impl_->workers)
            ::shutdown(fd, SHUT_RDWR);
    }
    if (impl_->acceptor.joinable())
        impl_->acceptor.join();
    for (auto &[fd, t] : impl_->workers)
        if (t.joinable())
            t.join();
}

} // namespace birdbench::net
