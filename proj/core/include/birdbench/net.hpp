// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "birdbench/server.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>

namespace birdbench::net {

class NetError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Blocking newline-delimited stream over a connected TCP socket.
class LineStream
{
public:
    explicit LineStream(int fd) : fd_(fd) {}
    ~LineStream();
    LineStream(LineStream &&other) noexcept;
    LineStream &operator=(LineStream &&other) noexcept;
    LineStream(const LineStream &) = delete;
    LineStream &operator=(const LineStream &) = delete;

    static LineStream connect(const std::string &host, std::uint16_t port);

    void write_line(std::string_view line);
    /// Next line without its terminator; nullopt at end of stream.
    std::optional<std::string> read_line();
    void shutdown();

private:
    int fd_{-1};
    std::string buffer_;
};

/// Accepts connections and serves each on its own thread.
class TcpServer
{
public:
    TcpServer(proto::Server &server, std::uint16_t port, std::string bind_address = "127.0.0.1");
    ~TcpServer();
    TcpServer(const TcpServer &) = delete;
    TcpServer &operator=(const TcpServer &) = delete;

    /// Port actually bound (useful when constructed with port 0).
    std::uint16_t port() const { return port_; }
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    std::uint16_t port_{0};
};

} // namespace birdbench::net
