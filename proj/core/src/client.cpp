// SPDX-License-Identifier: Apache-2.0
#include "birdbench/client.hpp"

#include "json_codec.hpp"

#include <cmath>
#include <numeric>

namespace birdbench::sdk {

using proto::codec::json;

std::string TcpTransport::exchange(const std::string &request)
{
    stream_.write_line(request);
    auto line = stream_.read_line();
    if (!line)
        throw net::NetError("server closed the connection");
    return *line;
}

double wire_round(double v) { return std::round(v * 1e6) / 1e6; }

namespace {

// seq is taken by reference: it is read after the request that bumps it.
json parse_reply(const std::string &line, const std::int64_t &seq)
{
    json r;
    try {
        r = json::parse(line);
    } catch (const json::parse_error &e) {
        throw ClientError("malformed", std::string("unreadable response: ") + e.what());
    }
    if (!r.is_object() || !r.contains("ok"))
        throw ClientError("malformed", "response is not a protocol message");
    if (!r["seq"].is_number_integer() || r["seq"].get<std::int64_t>() != seq)
        throw ClientError("malformed", "response seq does not match the request");
    if (!r["ok"].get<bool>()) {
        const auto &e = r["error"];
        throw ClientError(e.value("code", "unknown"), e.value("message", ""));
    }
    return r["data"];
}

std::vector<BirdType> birds_from(const json &a)
{
    std::vector<BirdType> out;
    for (const auto &b : a)
        if (auto t = parse_bird_type(b.get<std::string>()))
            out.push_back(*t);
    return out;
}

} // namespace

Client::Client(std::unique_ptr<Transport> transport, std::ostream *record)
    : transport_(std::move(transport)), record_(record)
{
}

std::string Client::request(const std::string &op, const std::string &args_json)
{
    ++seq_;
    const std::string line =
        "{\"op\":" + json(op).dump() + ",\"args\":" + args_json + ",\"seq\":" + std::to_string(seq_) + "}";
    if (record_)
        *record_ << line << '\n';
    return transport_->exchange(line);
}

HelloInfo Client::hello(const std::string &agent_id)
{
    const json d = parse_reply(request("HELLO", json{{"agent_id", agent_id}}.dump()), seq_);
    HelloInfo h;
    h.agent_id = d.at("agent_id").get<std::string>();
    h.stage = d.at("stage").get<std::string>();
    h.group = d.at("group").get<std::string>();
    h.levels = d.at("levels").get<int>();
    h.budget_s = d.at("budget_s").get<double>();
    h.time_left = d.at("time_left").get<double>();
    h.resumed = d.at("resumed").get<bool>();
    h.env.v_max = d.at("v_max").get<double>();
    h.env.gravity = d.at("gravity").get<double>();
    h.env.map = proto::codec::screen_map_from_value(d.at("screen"));
    return h;
}

void Client::load_level(int level) { parse_reply(request("LOAD_LEVEL", json{{"level", level}}.dump()), seq_); }

void Client::restart_level() { parse_reply(request("RESTART_LEVEL", "{}"), seq_); }

proto::Percept Client::get_state()
{
    return proto::codec::percept_from_value(parse_reply(request("GET_STATE", "{}"), seq_));
}

ShootReply Client::shoot(const agents::Shot &shot)
{
    const json args{{"angle_deg", wire_round(rad_to_deg(shot.angle))},
                    {"speed_fraction", wire_round(shot.speed_fraction)},
                    {"tap_ms", shot.tap_ms}};
    const json d = parse_reply(request("SHOOT", args.dump()), seq_);
    ShootReply r;
    r.score = proto::codec::score_from_value(d.at("score"));
    r.score_delta = d.at("score_delta").get<long>();
    r.state = proto::parse_level_state(d.at("level_state").get<std::string>()).value_or(proto::LevelState::playing);
    r.birds_remaining = birds_from(d.at("birds_remaining"));
    r.time_left = d.at("time_left").get<double>();
    return r;
}

MyScore Client::my_score()
{
    const json d = parse_reply(request("GET_MY_SCORE", "{}"), seq_);
    return {d.at("total").get<long>(), d.at("levels").get<std::vector<long>>()};
}

BestScores Client::best_scores()
{
    const json d = parse_reply(request("GET_BEST_SCORES", "{}"), seq_);
    BestScores b;
    b.scope = d.at("scope").get<std::string>();
    b.levels = d.at("levels").get<std::vector<long>>();
    for (const auto &[id, v] : d.at("by_agent").items())
        b.by_agent[id] = v.get<std::vector<long>>();
    return b;
}

double Client::time_left() { return parse_reply(request("TIME_LEFT", "{}"), seq_).at("time_left").get<double>(); }

// ------------------------------------------------------------ selectors

void RoundRobinSelector::reset(int levels)
{
    solved_.assign(static_cast<std::size_t>(levels), false);
    cursor_ = 0;
}

std::optional<int> RoundRobinSelector::next()
{
    const int n = static_cast<int>(solved_.size());
    for (int k = 0; k < n; ++k) {
        const int i = (cursor_ + k) % n;
        if (!solved_[static_cast<std::size_t>(i)]) {
            cursor_ = (i + 1) % n;
            return i;
        }
    }
    return std::nullopt;
}

void RoundRobinSelector::record(const LevelOutcome &o)
{
    if (o.solved)
        solved_[static_cast<std::size_t>(o.level)] = true;
}

void WeightedSelector::reset(int levels)
{
    mine_.assign(static_cast<std::size_t>(levels), 0);
    visible_.assign(static_cast<std::size_t>(levels), 0);
    solved_.assign(static_cast<std::size_t>(levels), false);
}

std::vector<double> WeightedSelector::weights() const
{
    std::vector<double> w(mine_.size());
    for (std::size_t i = 0; i < w.size(); ++i)
        w[i] = solved_[i] ? std::max(floor_, double(visible_[i] - mine_[i])) : unsolved_value_;
    return w;
}

std::optional<int> WeightedSelector::next()
{
    const auto w = weights();
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    if (w.empty() || !(total > 0.0))
        return std::nullopt;
    const double r = static_cast<double>(rng_()) / 4294967296.0 * total;
    double acc = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        acc += w[i];
        if (r < acc)
            return static_cast<int>(i);
    }
    return static_cast<int>(w.size() - 1);
}

void WeightedSelector::record(const LevelOutcome &o)
{
    const auto i = static_cast<std::size_t>(o.level);
    if (o.solved) {
        solved_[i] = true;
        mine_[i] = std::max(mine_[i], o.total);
        visible_[i] = std::max(visible_[i], o.total);
    }
}

void WeightedSelector::observe(const BestScores &best)
{
    for (std::size_t i = 0; i < best.levels.size() && i < visible_.size(); ++i)
        visible_[i] = std::max(visible_[i], best.levels[i]);
}

// ------------------------------------------------------------ agent loop

PlayResult play_round(Client &client, agents::Agent &agent, LevelSelector &selector, const PlayOptions &options)
{
    PlayResult result;
    const HelloInfo info = client.hello(options.agent_id);
    selector.reset(info.levels);
    try {
        while (options.max_attempts < 0 || result.attempts < options.max_attempts) {
            if (options.query_best)
                selector.observe(client.best_scores());
            const auto level = selector.next();
            if (!level)
                break;
            client.load_level(*level);
            ++result.attempts;
            LevelOutcome outcome{*level, false, 0};
            for (;;) {
                const proto::Percept p = client.get_state();
                if (p.state != proto::LevelState::playing)
                    break;
                const ShootReply r = client.shoot(agent.select(p, info.env));
                ++result.shots;
                outcome.total = r.score.total;
                outcome.solved = r.state == proto::LevelState::solved;
            }
            selector.record(outcome);
        }
    } catch (const ClientError &e) {
        if (e.code() != "round_closed")
            throw;
        result.round_closed = true;
    }
    try {
        const MyScore s = client.my_score();
        result.total = s.total;
        result.levels = s.levels;
    } catch (const ClientError &) {
        // grace window already over
    }
    return result;
}

} // namespace birdbench::sdk
