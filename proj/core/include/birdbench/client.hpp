// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "birdbench/agents.hpp"
#include "birdbench/level.hpp"
#include "birdbench/net.hpp"
#include "birdbench/percept.hpp"
#include "birdbench/server.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace birdbench::sdk {

class Transport
{
public:
    virtual ~Transport() = default;
    /// Sends one request line and returns the response line.
    virtual std::string exchange(const std::string &request) = 0;
};

class TcpTransport : public Transport
{
public:
    TcpTransport(const std::string &host, std::uint16_t port) : stream_(net::LineStream::connect(host, port)) {}
    std::string exchange(const std::string &request) override;

private:
    net::LineStream stream_;
};

/// In-process transport: one server connection, no sockets.
class LoopbackTransport : public Transport
{
public:
    explicit LoopbackTransport(proto::Server &server) : server_(server), id_(server.open_connection()) {}
    ~LoopbackTransport() override { server_.close_connection(id_); }
    std::string exchange(const std::string &request) override { return server_.handle_line(id_, request); }

private:
    proto::Server &server_;
    proto::Server::ConnectionId id_;
};

/// An error response from the server.
class ClientError : public std::runtime_error
{
public:
    ClientError(std::string code, const std::string &message) : std::runtime_error(message), code_(std::move(code)) {}
    const std::string &code() const { return code_; }

private:
    std::string code_;
};

struct HelloInfo
{
    std::string agent_id;
    std::string stage;
    std::string group;
    int levels{0};
    double budget_s{0.0};
    double time_left{0.0};
    bool resumed{false};
    agents::EnvInfo env;
};

struct ShootReply
{
    level::AttemptScore score;
    long score_delta{0};
    proto::LevelState state{proto::LevelState::playing};
    std::vector<BirdType> birds_remaining;
    double time_left{0.0};
};

struct MyScore
{
    long total{0};
    std::vector<long> levels;
};

struct BestScores
{
    std::string scope;
    std::vector<long> levels;
    std::map<std::string, std::vector<long>> by_agent;
};

/// Blocking request/response client. Requests are serialised with keys in
/// the order op, args, seq; angles and speed fractions are rounded to 1e-6 so
/// the byte stream is reproducible from any language.
class Client
{
public:
    explicit Client(std::unique_ptr<Transport> transport, std::ostream *record = nullptr);

    HelloInfo hello(const std::string &agent_id);
    void load_level(int level);
    void restart_level();
    proto::Percept get_state();
    ShootReply shoot(const agents::Shot &shot);
    MyScore my_score();
    BestScores best_scores();
    double time_left();

    std::int64_t last_seq() const { return seq_; }

private:
    struct Reply;
    std::string request(const std::string &op, const std::string &args_json);

    std::unique_ptr<Transport> transport_;
    std::ostream *record_{nullptr};
    std::int64_t seq_{0};
};

/// Quantisation applied to outgoing shot parameters.
double wire_round(double v);

// ------------------------------------------------------------ level choice

struct LevelOutcome
{
    int level{0};
    bool solved{false};
    long total{0};
};

class LevelSelector
{
public:
    virtual ~LevelSelector() = default;
    virtual void reset(int levels) = 0;
    /// Next level to attempt; nullopt ends the round for this agent.
    virtual std::optional<int> next() = 0;
    virtual void record(const LevelOutcome &outcome) = 0;
    virtual void observe(const BestScores &) {}
};

/// Cycles through the unsolved levels in order; stops once all are solved.
class RoundRobinSelector : public LevelSelector
{
public:
    void reset(int levels) override;
    std::optional<int> next() override;
    void record(const LevelOutcome &outcome) override;

private:
    std::vector<bool> solved_;
    int cursor_{0};
};

/// Draws levels with probability proportional to the points still to gain:
/// the best score seen for a level (own or visible) minus our own best,
/// with unsolved levels valued at `unsolved_value`.
class WeightedSelector : public LevelSelector
{
public:
    explicit WeightedSelector(std::uint64_t seed, double unsolved_value = 60000.0, double floor = 1000.0)
        : rng_(static_cast<std::mt19937::result_type>(seed)), unsolved_value_(unsolved_value), floor_(floor)
    {
    }
    void reset(int levels) override;
    std::optional<int> next() override;
    void record(const LevelOutcome &outcome) override;
    void observe(const BestScores &best) override;
    std::vector<double> weights() const;

private:
    std::mt19937 rng_;
    double unsolved_value_;
    double floor_;
    std::vector<long> mine_;
    std::vector<long> visible_;
    std::vector<bool> solved_;
};

struct PlayOptions
{
    std::string agent_id;
    int max_attempts{-1}; // level attempts; negative means unlimited
    bool query_best{false};
};

struct PlayResult
{
    long total{0};
    int attempts{0};
    int shots{0};
    bool round_closed{false};
    std::vector<long> levels;
};

/// The standard agent loop: HELLO, then choose level, GET_STATE, SHOOT until
/// the attempt ends, until the selector stops or the round closes.
PlayResult play_round(Client &client, agents::Agent &agent, LevelSelector &selector, const PlayOptions &options);

} // namespace birdbench::sdk
