// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "birdbench/game.hpp"
#include "birdbench/level.hpp"
#include "birdbench/physics.hpp"

#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace birdbench::proto {

inline constexpr std::uint16_t kDefaultPort = 2004;

enum class Visibility : std::uint8_t { group, global };
std::string_view to_string(Visibility v);
std::optional<Visibility> parse_visibility(std::string_view s);

// game: the round clock is charged with simulated time (deterministic).
// wall: the round clock follows a real-time source.
enum class ClockMode : std::uint8_t { game, wall };
std::string_view to_string(ClockMode m);

enum class Phase : std::uint8_t { open, grace, closed };
std::string_view to_string(Phase p);

struct RoundConfig
{
    std::string stage{"practice"};
    std::vector<level::Level> levels;
    double budget_s{1800.0};
    double grace_s{120.0};
    double time_scale{1.0}; // multiplies every wall-clock duration
    ClockMode clock{ClockMode::game};
    Visibility visibility{Visibility::global};
    std::map<std::string, std::string> groups; // agent id -> group id
    bool restrict_agents{false};               // only agents listed in groups may HELLO
    double shot_overhead_s{8.0};               // game clock: charged per SHOOT on top of settle time
    double load_cost_s{2.0};                   // game clock: charged per LOAD/RESTART
    double watchdog_idle_s{90.0};
    phys::PhysicsConfig physics{};
    phys::SettleParams settle{};
};

/// One state-changing action, enough to replay a session.
struct ActionRecord
{
    std::int64_t index{0}; // per agent, from 0
    std::string agent;
    std::string op; // LOAD_LEVEL, RESTART_LEVEL, SHOOT or WATCHDOG_RESTART
    int level{-1};
    double angle_deg{0.0};
    double speed_fraction{0.0};
    int tap_ms{0};
    long total{0}; // attempt score after the action
    bool solved{false};
    double time_left{0.0};
};

/// Thread-safe game server. Every request line gets exactly one response line.
class Server
{
public:
    using ConnectionId = std::uint64_t;
    using WallClock = std::function<double()>; // seconds

    explicit Server(RoundConfig config, WallClock wall_clock = {});
    ~Server();
    Server(const Server &) = delete;
    Server &operator=(const Server &) = delete;

    ConnectionId open_connection();
    void close_connection(ConnectionId id);
    std::string handle_line(ConnectionId id, std::string_view line);

    /// Ends the grace window: from now on every op is refused.
    void end_round();
    /// Called for every action as it is committed (under the session lock).
    void set_action_sink(std::function<void(const ActionRecord &)> sink);

    const RoundConfig &config() const { return config_; }
    /// Agent -> per-level best solved score.
    std::map<std::string, std::vector<long>> best_scores() const;
    std::vector<ActionRecord> actions() const;

private:
    struct Session;
    struct Impl;
    std::unique_ptr<Impl> impl_;
    RoundConfig config_;
};

} // namespace birdbench::proto
