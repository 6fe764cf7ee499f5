// SPDX-License-Identifier: Apache-2.0
#include "birdbench/server.hpp"

#include "json_codec.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

namespace birdbench::proto {

using codec::json;

std::string_view to_string(Visibility v) { return v == Visibility::group ? "group" : "global"; }

std::optional<Visibility> parse_visibility(std::string_view s)
{
    if (s == "group")
        return Visibility::group;
    if (s == "global")
        return Visibility::global;
    return std::nullopt;
}

std::string_view to_string(ClockMode m) { return m == ClockMode::game ? "game" : "wall"; }

std::string_view to_string(Phase p)
{
    switch (p) {
    case Phase::open:
        return "open";
    case Phase::grace:
        return "grace";
    case Phase::closed:
        return "closed";
    }
    return "?";
}

namespace {

struct ProtocolError
{
    std::string code;
    std::string message;
};

[[noreturn]] void fail(std::string code, std::string message) { throw ProtocolError{std::move(code), std::move(message)}; }

std::string respond_ok(const json &seq, json data)
{
    json r;
    r["seq"] = seq;
    r["ok"] = true;
    r["data"] = std::move(data);
    return r.dump();
}

std::string respond_error(const json &seq, const std::string &code, const std::string &message)
{
    json r;
    r["seq"] = seq;
    r["ok"] = false;
    r["error"] = {{"code", code}, {"message", message}};
    return r.dump();
}

double steady_seconds()
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
}

const json &arg(const json &args, const char *key)
{
    const auto it = args.find(key);
    if (it == args.end())
        fail("bad_args", std::string("missing argument ") + key);
    return *it;
}

double number_arg(const json &args, const char *key, double lo, double hi)
{
    const json &v = arg(args, key);
    if (!v.is_number())
        fail("bad_args", std::string(key) + " must be a number");
    const double d = v.get<double>();
    if (!std::isfinite(d) || d < lo || d > hi)
        fail("bad_args", std::string(key) + " out of range");
    return d;
}

long integer_arg(const json &args, const char *key, long lo, long hi)
{
    const json &v = arg(args, key);
    if (!v.is_number_integer())
        fail("bad_args", std::string(key) + " must be an integer");
    const auto d = v.get<long long>();
    if (d < lo || d > hi)
        fail("bad_args", std::string(key) + " out of range");
    return static_cast<long>(d);
}

json birds_json(const std::deque<BirdType> &q)
{
    json a = json::array();
    for (auto b : q)
        a.push_back(std::string(to_string(b)));
    return a;
}

} // namespace

struct Server::Session
{
    std::mutex mutex;
    std::string agent_id;
    std::string group;
    double start_wall{0.0};
    double consumed{0.0}; // game clock
    double idle_since{0.0};
    int level{-1};
    std::optional<GameInstance> game;
    std::vector<long> best;
    std::vector<int> attempts;
    std::int64_t next_action{0};
};

struct Server::Impl
{
    RoundConfig *config{nullptr};
    WallClock wall;

    mutable std::mutex mutex; // connections, sessions, best table, action list
    std::map<ConnectionId, std::shared_ptr<Session>> connections; // null until HELLO
    std::map<std::string, std::shared_ptr<Session>> sessions;
    ConnectionId next_connection{1};
    std::atomic<bool> ended{false};
    std::vector<ActionRecord> actions;
    std::function<void(const ActionRecord &)> sink;

    double now() const { return wall(); }
    double scaled(double s) const { return s * config->time_scale; }

    // Clock position in seconds since the session started.
    double elapsed(const Session &s) const
    {
        return config->clock == ClockMode::game ? s.consumed : now() - s.start_wall;
    }
    double budget() const { return config->clock == ClockMode::game ? config->budget_s : scaled(config->budget_s); }
    double time_left(const Session &s) const { return std::max(0.0, budget() - elapsed(s)); }

    Phase phase(const Session &s) const
    {
        if (ended)
            return Phase::closed;
        const double e = elapsed(s);
        if (e < budget())
            return Phase::open;
        if (config->clock == ClockMode::wall && e >= budget() + scaled(config->grace_s))
            return Phase::closed;
        return Phase::grace;
    }

    void record(Session &s, ActionRecord r)
    {
        r.index = s.next_action++;
        r.agent = s.agent_id;
        r.time_left = time_left(s);
        std::lock_guard lock(mutex);
        actions.push_back(r);
        if (sink)
            sink(r);
    }

    void merge_best(Session &s, int level, long total)
    {
        std::lock_guard lock(mutex);
        auto &b = s.best[static_cast<std::size_t>(level)];
        b = std::max(b, total);
    }

    void watchdog(Session &s)
    {
        if (!s.game || s.game->state() != LevelState::playing)
            return;
        const double idle_limit =
            config->clock == ClockMode::game ? config->watchdog_idle_s : scaled(config->watchdog_idle_s);
        if (elapsed(s) - s.idle_since < idle_limit)
            return;
        s.game->restart();
        s.idle_since = elapsed(s);
        ActionRecord r;
        r.op = "WATCHDOG_RESTART";
        r.level = s.level;
        record(s, r);
    }

    json hello(ConnectionId cid, const json &args)
    {
        const json &idv = arg(args, "agent_id");
        if (!idv.is_string() || idv.get<std::string>().empty() || idv.get<std::string>().size() > 64)
            fail("bad_args", "agent_id must be a non-empty string of at most 64 characters");
        const std::string id = idv.get<std::string>();
        const auto group_it = config->groups.find(id);
        if (config->restrict_agents && group_it == config->groups.end())
            fail("not_authenticated", "agent is not registered for this round");

        std::shared_ptr<Session> session;
        bool resumed = false;
        {
            std::lock_guard lock(mutex);
            auto &bound = connections.at(cid);
            if (bound && bound->agent_id != id)
                fail("bad_args", "connection already bound to another agent");
            auto it = sessions.find(id);
            if (it == sessions.end()) {
                session = std::make_shared<Session>();
                session->agent_id = id;
                session->group = group_it == config->groups.end() ? "" : group_it->second;
                session->start_wall = now();
                session->best.assign(config->levels.size(), 0);
                session->attempts.assign(config->levels.size(), 0);
                sessions.emplace(id, session);
            } else {
                session = it->second;
                resumed = true;
            }
            bound = session;
        }
        std::lock_guard lock(session->mutex);
        const auto &phys = config->physics;
        return json{{"agent_id", id},
                    {"stage", config->stage},
                    {"group", session->group},
                    {"levels", config->levels.size()},
                    {"budget_s", budget()},
                    {"time_left", time_left(*session)},
                    {"clock", std::string(to_string(config->clock))},
                    {"visibility", std::string(to_string(config->visibility))},
                    {"v_max", phys.v_max},
                    {"gravity", phys.gravity},
                    {"world", {phys.world_size.x, phys.world_size.y}},
                    {"screen", codec::to_value(ScreenMap::for_world(phys.world_size))},
                    {"resumed", resumed}};
    }

    json dispatch(Session &s, const std::string &op, const json &args)
    {
        watchdog(s);
        const Phase ph = phase(s);
        const bool action = op == "LOAD_LEVEL" || op == "RESTART_LEVEL" || op == "SHOOT";
        if (ph == Phase::closed || (action && ph != Phase::open))
            fail("round_closed", "the round is over");
        const auto map = ScreenMap::for_world(config->physics.world_size);

        if (op == "LOAD_LEVEL") {
            const auto n = static_cast<long>(config->levels.size());
            const int level = static_cast<int>(integer_arg(args, "level", 0, n - 1));
            s.game.emplace(config->levels[static_cast<std::size_t>(level)], config->physics, config->settle);
            s.level = level;
            return start_attempt(s, "LOAD_LEVEL");
        }
        if (op == "RESTART_LEVEL") {
            if (!s.game)
                fail("no_level", "no level loaded");
            s.game->restart();
            return start_attempt(s, "RESTART_LEVEL");
        }
        if (op == "GET_STATE") {
            if (!s.game)
                fail("no_level", "no level loaded");
            return codec::to_value(s.game->percept(map, time_left(s), s.level));
        }
        if (op == "SHOOT")
            return shoot(s, args);
        if (op == "GET_MY_SCORE") {
            std::vector<long> best;
            {
                std::lock_guard lock(mutex);
                best = s.best;
            }
            return json{{"total", std::accumulate(best.begin(), best.end(), 0L)},
                        {"levels", best},
                        {"attempts", s.attempts}};
        }
        if (op == "GET_BEST_SCORES")
            return best_scores(s);
        if (op == "TIME_LEFT")
            return json{{"time_left", time_left(s)}, {"phase", std::string(to_string(ph))}};
        fail("unknown_op", "unknown op " + op);
    }

    json start_attempt(Session &s, const char *op)
    {
        ++s.attempts[static_cast<std::size_t>(s.level)];
        if (config->clock == ClockMode::game)
            s.consumed += config->load_cost_s;
        s.idle_since = elapsed(s);
        ActionRecord r;
        r.op = op;
        r.level = s.level;
        record(s, r);
        return json{{"level", s.level}, {"birds", birds_json(s.game->world().birds_queue())},
                    {"time_left", time_left(s)}};
    }

    json shoot(Session &s, const json &args)
    {
        const double angle_deg = number_arg(args, "angle_deg", -90.0, 90.0);
        const double fraction = number_arg(args, "speed_fraction", 0.0, 1.0);
        const int tap_ms = static_cast<int>(integer_arg(args, "tap_ms", 0, 600000));
        if (!s.game)
            fail("no_level", "no level loaded");
        switch (s.game->state()) {
        case LevelState::solved:
            fail("level_over", "level already solved; load or restart a level");
        case LevelState::lost:
            fail("out_of_birds", "no birds left; load or restart a level");
        case LevelState::playing:
            break;
        }
        const ShotResult res = s.game->shoot({deg_to_rad(angle_deg), fraction, tap_ms});
        if (config->clock == ClockMode::game)
            s.consumed += res.sim_seconds + config->shot_overhead_s;
        s.idle_since = elapsed(s);
        if (res.state == LevelState::solved)
            merge_best(s, s.level, res.score.total);
        ActionRecord r;
        r.op = "SHOOT";
        r.level = s.level;
        r.angle_deg = angle_deg;
        r.speed_fraction = fraction;
        r.tap_ms = tap_ms;
        r.total = res.score.total;
        r.solved = res.state == LevelState::solved;
        record(s, r);
        return json{{"score_delta", res.score_delta},
                    {"score", codec::to_value(res.score)},
                    {"level_state", std::string(to_string(res.state))},
                    {"birds_remaining", birds_json(s.game->world().birds_queue())},
                    {"sim_seconds", res.sim_seconds},
                    {"time_left", time_left(s)}};
    }

    json best_scores(const Session &s)
    {
        const bool scoped = config->visibility == Visibility::group;
        std::lock_guard lock(mutex);
        std::vector<long> levels(config->levels.size(), 0);
        json by_agent = json::object();
        for (const auto &[id, other] : sessions) {
            if (scoped && other->group != s.group)
                continue;
            for (std::size_t i = 0; i < levels.size(); ++i)
                levels[i] = std::max(levels[i], other->best[i]);
            by_agent[id] = other->best;
        }
        return json{{"scope", scoped ? "group" : "global"}, {"levels", levels}, {"by_agent", by_agent}};
    }
};

Server::Server(RoundConfig config, WallClock wall_clock) : impl_(std::make_unique<Impl>()), config_(std::move(config))
{
    impl_->config = &config_;
    impl_->wall = wall_clock ? std::move(wall_clock) : WallClock(steady_seconds);
}

Server::~Server() = default;

Server::ConnectionId Server::open_connection()
{
    std::lock_guard lock(impl_->mutex);
    const ConnectionId id = impl_->next_connection++;
    impl_->connections.emplace(id, nullptr);
    return id;
}

void Server::close_connection(ConnectionId id)
{
    std::lock_guard lock(impl_->mutex);
    impl_->connections.erase(id);
}

void Server::end_round() { impl_->ended = true; }

void Server::set_action_sink(std::function<void(const ActionRecord &)> sink)
{
    std::lock_guard lock(impl_->mutex);
    impl_->sink = std::move(sink);
}

std::map<std::string, std::vector<long>> Server::best_scores() const
{
    std::lock_guard lock(impl_->mutex);
    std::map<std::string, std::vector<long>> out;
    for (const auto &[id, s] : impl_->sessions)
        out[id] = s->best;
    return out;
}

std::vector<ActionRecord> Server::actions() const
{
    std::lock_guard lock(impl_->mutex);
    return impl_->actions;
}

std::string Server::handle_line(ConnectionId cid, std::string_view line)
{
    json seq = nullptr;
    json request;
    try {
        request = json::parse(line.begin(), line.end());
    } catch (const json::parse_error &) {
        return respond_error(seq, "malformed", "request is not valid JSON");
    }
    if (!request.is_object())
        return respond_error(seq, "malformed", "request must be a JSON object");
    if (const auto it = request.find("seq"); it != request.end()) {
        if (!it->is_number_integer())
            return respond_error(seq, "malformed", "seq must be an integer");
        seq = *it;
    }
    const auto op_it = request.find("op");
    if (op_it == request.end() || !op_it->is_string())
        return respond_error(seq, "malformed", "op must be a string");
    const std::string op = op_it->get<std::string>();
    json args = json::object();
    if (const auto it = request.find("args"); it != request.end() && !it->is_null()) {
        if (!it->is_object())
            return respond_error(seq, "bad_args", "args must be an object");
        args = *it;
    }

    try {
        std::shared_ptr<Session> session;
        {
            std::lock_guard lock(impl_->mutex);
            const auto it = impl_->connections.find(cid);
            if (it == impl_->connections.end())
                return respond_error(seq, "not_authenticated", "unknown connection");
            session = it->second;
        }
        if (op == "HELLO") {
            if (impl_->ended)
                fail("round_closed", "the round is over");
            return respond_ok(seq, impl_->hello(cid, args));
        }
        if (!session)
            fail("not_authenticated", "send HELLO first");
        std::lock_guard lock(session->mutex);
        return respond_ok(seq, impl_->dispatch(*session, op, args));
    } catch (const ProtocolError &e) {
        return respond_error(seq, e.code, e.message);
    } catch (const phys::OutOfBirdsError &e) {
        return respond_error(seq, "out_of_birds", e.what());
    } catch (const phys::IllegalActionError &e) {
        return respond_error(seq, "illegal_action", e.what());
    } catch (const std::exception &e) {
        return respond_error(seq, "internal", e.what());
    }
}

} // namespace birdbench::proto
