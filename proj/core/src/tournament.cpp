// SPDX-License-Identifier: Apache-2.0
#include "birdbench/tournament.hpp"

#include "birdbench/client.hpp"
#include "birdbench/game.hpp"

#include "json_codec.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

namespace birdbench::tourney {

using proto::codec::json;

namespace {

constexpr std::array<std::pair<StageKind, std::string_view>, 6> kStageNames{{
    {StageKind::qualification, "qualification"},
    {StageKind::quarterfinal, "quarterfinal"},
    {StageKind::semifinal, "semifinal"},
    {StageKind::grandfinal, "grandfinal"},
    {StageKind::benchmark, "benchmark"},
    {StageKind::mvm, "mvm"},
}};

// Most agents a quarter-final bracket takes from qualification.
constexpr std::size_t kQuarterfinalCapacity = 16;

std::vector<Standing> pool_of(std::span<const Leaderboard> boards)
{
    std::vector<Standing> pool;
    for (const auto &b : boards)
        pool.insert(pool.end(), b.ranking.begin(), b.ranking.end());
    std::sort(pool.begin(), pool.end(), ranks_before);
    return pool;
}

std::string describe_tie(const Standing &a, const Standing &b)
{
    const bool by_level = a.levels != b.levels;
    return a.agent + " ranked above " + b.agent + " at equal combined score " + std::to_string(a.combined) +
           (by_level ? " by earlier single-level score" : " by agent id");
}

} // namespace

std::string_view to_string(StageKind k)
{
    for (const auto &[kind, name] : kStageNames)
        if (kind == k)
            return name;
    return "?";
}

std::optional<StageKind> parse_stage_kind(std::string_view s)
{
    for (const auto &[kind, name] : kStageNames)
        if (name == s)
            return kind;
    return std::nullopt;
}

Stage make_stage(StageKind kind, std::vector<std::vector<std::string>> groups, std::vector<std::string> level_ids)
{
    Stage s;
    s.kind = kind;
    s.name = std::string(to_string(kind));
    s.level_ids = std::move(level_ids);
    s.budget_s = kind == StageKind::mvm ? 600.0 : 1800.0;
    s.visibility = kind == StageKind::quarterfinal ? proto::Visibility::group : proto::Visibility::global;
    std::set<std::string> seen;
    for (const auto &g : groups) {
        if (g.empty())
            throw std::invalid_argument("empty group");
        for (const auto &a : g)
            if (!seen.insert(a).second)
                throw std::invalid_argument("agent " + a + " appears in two groups");
    }
    const auto one_group_of_at_most = [&](std::size_t n) {
        if (groups.size() != 1 || groups.front().size() > n)
            throw std::invalid_argument(s.name + " needs one group of at most " + std::to_string(n) + " agents");
    };
    switch (kind) {
    case StageKind::quarterfinal:
        for (const auto &g : groups)
            if (groups.size() > 1 && (g.size() < 3 || g.size() > 4))
                throw std::invalid_argument("quarter-final groups need three or four agents");
        break;
    case StageKind::semifinal:
        one_group_of_at_most(4);
        break;
    case StageKind::grandfinal:
        one_group_of_at_most(2);
        break;
    default:
        break;
    }
    s.groups = std::move(groups);
    return s;
}

// ------------------------------------------------------------ scoring

std::vector<long> per_level_best(std::span<const AttemptRecord> history, const std::string &agent, int levels)
{
    std::vector<long> best(static_cast<std::size_t>(levels), 0);
    for (const auto &a : history)
        if (a.agent == agent && a.solved && a.level >= 0 && a.level < levels)
            best[static_cast<std::size_t>(a.level)] = std::max(best[static_cast<std::size_t>(a.level)], a.total);
    return best;
}

long combined_score(std::span<const AttemptRecord> history, const std::string &agent, int levels)
{
    const auto best = per_level_best(history, agent, levels);
    return std::accumulate(best.begin(), best.end(), 0L);
}

bool ranks_before(const Standing &a, const Standing &b)
{
    if (a.combined != b.combined)
        return a.combined > b.combined;
    if (a.levels != b.levels)
        return std::lexicographical_compare(b.levels.begin(), b.levels.end(), a.levels.begin(), a.levels.end());
    return a.agent < b.agent;
}

Standing standing_of(const std::string &agent, std::vector<long> levels)
{
    const long total = std::accumulate(levels.begin(), levels.end(), 0L);
    return {agent, total, std::move(levels)};
}

Leaderboard make_leaderboard(std::string stage, std::string group, std::vector<Standing> standings)
{
    Leaderboard b{std::move(stage), std::move(group), std::move(standings), {}};
    std::sort(b.ranking.begin(), b.ranking.end(), ranks_before);
    for (std::size_t i = 1; i < b.ranking.size(); ++i)
        if (b.ranking[i - 1].combined == b.ranking[i].combined)
            b.tie_breaks.push_back(describe_tie(b.ranking[i - 1], b.ranking[i]));
    return b;
}

std::string Leaderboard::to_json() const
{
    json ranks = json::array();
    for (const auto &s : ranking)
        ranks.push_back({{"agent", s.agent}, {"combined", s.combined}, {"levels", s.levels}});
    return json{{"stage", stage}, {"group", group}, {"ranking", ranks}, {"tie_breaks", tie_breaks}}.dump(2) + "\n";
}

std::vector<std::vector<std::string>> snake_groups(const std::vector<std::string> &ranked)
{
    const std::size_t n = ranked.size();
    if (n == 0)
        return {};
    const std::size_t g = (n + 3) / 4;
    std::vector<std::vector<std::string>> groups(g);
    for (std::size_t r = 0; r < n; ++r) {
        const std::size_t round = r / g;
        const std::size_t pos = r % g;
        groups[round % 2 == 0 ? pos : g - 1 - pos].push_back(ranked[r]);
    }
    return groups;
}

Advancement advance(const Stage &stage, std::span<const Leaderboard> boards)
{
    if (!stage.complete)
        throw StageError("stage " + stage.name + " is not complete");
    const auto pool = pool_of(boards);
    Advancement adv;
    const auto take = [&](std::size_t n) {
        n = std::min(n, pool.size());
        for (std::size_t i = 0; i < n; ++i)
            adv.selected.push_back(pool[i].agent);
        if (n > 0 && n < pool.size() && pool[n - 1].combined == pool[n].combined)
            adv.tie_breaks.push_back("cut: " + describe_tie(pool[n - 1], pool[n]));
    };
    switch (stage.kind) {
    case StageKind::qualification: {
        std::size_t n = std::min(pool.size(), kQuarterfinalCapacity);
        if (n == 5) // no split of five into groups of three or four
            n = 4;
        take(n);
        adv.next = make_stage(StageKind::quarterfinal, snake_groups(adv.selected));
        break;
    }
    case StageKind::quarterfinal:
        take(4);
        adv.next = make_stage(StageKind::semifinal, {adv.selected});
        break;
    case StageKind::semifinal:
        take(2);
        adv.next = make_stage(StageKind::grandfinal, {adv.selected});
        break;
    case StageKind::grandfinal:
    case StageKind::benchmark:
    case StageKind::mvm:
        take(1);
        break;
    }
    return adv;
}

// ------------------------------------------------------------ running

std::vector<AttemptRecord> attempts_of(std::span<const proto::ActionRecord> actions)
{
    std::vector<AttemptRecord> out;
    for (const auto &a : actions)
        if (a.op == "SHOOT")
            out.push_back({a.agent, a.level, a.total, a.solved});
    return out;
}

namespace {

std::vector<Leaderboard> boards_from(const Stage &stage, const std::map<std::string, std::vector<long>> &best,
                                     std::size_t n_levels)
{
    std::vector<Leaderboard> boards;
    for (std::size_t g = 0; g < stage.groups.size(); ++g) {
        std::vector<Standing> standings;
        for (const auto &agent : stage.groups[g]) {
            const auto it = best.find(agent);
            standings.push_back(standing_of(agent, it == best.end() ? std::vector<long>(n_levels, 0) : it->second));
        }
        boards.push_back(make_leaderboard(stage.name, "g" + std::to_string(g), std::move(standings)));
    }
    return boards;
}

void write_file(const std::filesystem::path &path, const std::string &text)
{
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text;
}

} // namespace

StageResult run_stage(Stage stage, std::span<const Entrant> entrants, const StageRunOptions &options)
{
    proto::RoundConfig rc;
    rc.stage = stage.name;
    rc.levels = options.levels;
    rc.budget_s = stage.budget_s;
    rc.time_scale = options.time_scale;
    rc.clock = options.clock;
    rc.visibility = stage.visibility;
    rc.restrict_agents = true;
    rc.physics = options.physics;
    rc.settle = options.settle;
    for (std::size_t g = 0; g < stage.groups.size(); ++g)
        for (const auto &a : stage.groups[g])
            rc.groups[a] = "g" + std::to_string(g);
    proto::Server server(rc);

    StageResult result;
    std::mutex failed_mutex;
    {
        std::vector<std::jthread> sessions;
        for (const auto &group : stage.groups) {
            for (const auto &id : group) {
                const auto it = std::find_if(entrants.begin(), entrants.end(), [&](const Entrant &e) { return e.id == id; });
                const Entrant *entrant = it == entrants.end() ? nullptr : &*it;
                sessions.emplace_back([&, id, entrant] {
                    std::unique_ptr<agents::Agent> agent;
                    try {
                        if (entrant && entrant->factory)
                            agent = entrant->factory();
                    } catch (const std::exception &) {
                        agent.reset();
                    }
                    if (!agent) {
                        std::lock_guard lock(failed_mutex);
                        result.failed.push_back(id);
                        return;
                    }
                    sdk::Client client(std::make_unique<sdk::LoopbackTransport>(server));
                    std::unique_ptr<sdk::LevelSelector> selector;
                    if (entrant->selector == "weighted")
                        selector = std::make_unique<sdk::WeightedSelector>(entrant->seed);
                    else
                        selector = std::make_unique<sdk::RoundRobinSelector>();
                    try {
                        sdk::play_round(client, *agent, *selector,
                                        {id, options.max_attempts, entrant->selector == "weighted"});
                    } catch (const std::exception &) {
                        // a crashing agent keeps what it scored so far
                    }
                });
            }
        }
    }
    server.end_round();
    std::sort(result.failed.begin(), result.failed.end());

    stage.complete = true;
    result.boards = boards_from(stage, server.best_scores(), options.levels.size());
    result.actions = server.actions();
    std::stable_sort(result.actions.begin(), result.actions.end(), [](const auto &a, const auto &b) {
        return std::tie(a.agent, a.index) < std::tie(b.agent, b.index);
    });
    result.stage = std::move(stage);

    if (options.run_dir) {
        const auto dir = *options.run_dir / result.stage.name;
        write_file(dir / "attempts.jsonl", actions_to_jsonl(result.actions));
        std::string boards;
        for (const auto &b : result.boards)
            boards += b.to_json();
        write_file(dir / "leaderboard.json", boards);
    }
    return result;
}

std::vector<Leaderboard> replay_stage(const Stage &stage,
                                      std::span<const proto::ActionRecord> actions,
                                      const std::vector<level::Level> &levels,
                                      const phys::PhysicsConfig &physics,
                                      const phys::SettleParams &settle)
{
    std::map<std::string, std::vector<const proto::ActionRecord *>> by_agent;
    for (const auto &a : actions)
        by_agent[a.agent].push_back(&a);
    std::map<std::string, std::vector<long>> best;
    for (auto &[agent, list] : by_agent) {
        std::stable_sort(list.begin(), list.end(), [](const auto *a, const auto *b) { return a->index < b->index; });
        auto &b = best[agent];
        b.assign(levels.size(), 0);
        std::optional<proto::GameInstance> game;
        int level = -1;
        for (const auto *a : list) {
            if (a->op == "LOAD_LEVEL") {
                level = a->level;
                game.emplace(levels.at(static_cast<std::size_t>(level)), physics, settle);
            } else if (a->op == "RESTART_LEVEL" || a->op == "WATCHDOG_RESTART") {
                if (game)
                    game->restart();
            } else if (a->op == "SHOOT" && game) {
                const auto r = game->shoot({deg_to_rad(a->angle_deg), a->speed_fraction, a->tap_ms});
                if (r.state == proto::LevelState::solved)
                    b[static_cast<std::size_t>(level)] = std::max(b[static_cast<std::size_t>(level)], r.score.total);
            }
        }
    }
    return boards_from(stage, best, levels.size());
}

std::string actions_to_jsonl(std::span<const proto::ActionRecord> actions)
{
    std::string out;
    for (const auto &a : actions) {
        out += json{{"agent", a.agent},         {"index", a.index},
                    {"op", a.op},               {"level", a.level},
                    {"angle_deg", a.angle_deg}, {"speed_fraction", a.speed_fraction},
                    {"tap_ms", a.tap_ms},       {"total", a.total},
                    {"solved", a.solved},       {"time_left", a.time_left}}
                   .dump();
        out += '\n';
    }
    return out;
}

std::vector<proto::ActionRecord> actions_from_jsonl(std::string_view text)
{
    std::vector<proto::ActionRecord> out;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        const json j = json::parse(line);
        proto::ActionRecord a;
        a.agent = j.at("agent").get<std::string>();
        a.index = j.at("index").get<std::int64_t>();
        a.op = j.at("op").get<std::string>();
        a.level = j.at("level").get<int>();
        a.angle_deg = j.at("angle_deg").get<double>();
        a.speed_fraction = j.at("speed_fraction").get<double>();
        a.tap_ms = j.at("tap_ms").get<int>();
        a.total = j.at("total").get<long>();
        a.solved = j.at("solved").get<bool>();
        a.time_left = j.at("time_left").get<double>();
        out.push_back(std::move(a));
    }
    return out;
}

BenchmarkResult benchmark(const Entrant &agent,
                          const std::vector<level::Level> &levels,
                          double budget_s,
                          const StageRunOptions &options)
{
    Stage stage = make_stage(StageKind::benchmark, {{agent.id}});
    stage.budget_s = budget_s;
    StageRunOptions opts = options;
    opts.levels = levels;
    const auto result = run_stage(stage, std::span(&agent, 1), opts);
    const auto &s = result.boards.front().ranking.front();
    return {s.levels, s.combined};
}

std::vector<MvmRow> mvm_compare(const Leaderboard &agents, const std::vector<std::pair<std::string, long>> &humans)
{
    std::vector<MvmRow> rows;
    for (const auto &s : agents.ranking)
        rows.push_back({s.agent, false, s.combined});
    for (const auto &[name, score] : humans)
        rows.push_back({name, true, score});
    std::sort(rows.begin(), rows.end(), [](const MvmRow &a, const MvmRow &b) {
        return a.score != b.score ? a.score > b.score : a.name < b.name;
    });
    return rows;
}

// ------------------------------------------------------------ configuration

TournamentConfig parse_tournament_config(std::string_view document, const std::filesystem::path &base_dir)
{
    TournamentConfig c;
    try {
        const json j = json::parse(document.begin(), document.end());
        const auto rel = [&](const std::string &p) {
            const std::filesystem::path path(p);
            return path.is_absolute() ? path : base_dir / path;
        };
        c.levels_dir = rel(j.value("levels_dir", std::string("levels")));
        c.run_dir = rel(j.value("run_dir", std::string("runs")));
        c.time_scale = j.value("time_scale", 1.0);
        const std::string clock = j.value("clock", std::string("game"));
        if (clock != "game" && clock != "wall")
            throw std::invalid_argument("clock must be game or wall");
        c.clock = clock == "game" ? proto::ClockMode::game : proto::ClockMode::wall;
        c.max_attempts = j.value("max_attempts", -1);
        for (const auto &a : j.at("agents"))
            c.agents.push_back({a.at("id").get<std::string>(), a.at("kind").get<std::string>(),
                                a.value("seed", std::uint64_t{0}), a.value("selector", std::string("round_robin"))});
        for (const auto &s : j.at("stages")) {
            StageSpec spec;
            const auto kind = parse_stage_kind(s.at("kind").get<std::string>());
            if (!kind)
                throw std::invalid_argument("unknown stage kind " + s.at("kind").get<std::string>());
            spec.kind = *kind;
            spec.levels = s.at("levels").get<std::vector<std::string>>();
            if (s.contains("budget_s"))
                spec.budget_s = s.at("budget_s").get<double>();
            c.stages.push_back(std::move(spec));
        }
    } catch (const json::exception &e) {
        throw std::invalid_argument(std::string("bad tournament config: ") + e.what());
    }
    if (c.agents.empty() || c.stages.empty())
        throw std::invalid_argument("bad tournament config: needs agents and stages");
    return c;
}

TournamentReport run_tournament(const TournamentConfig &config, std::ostream *log)
{
    std::map<std::string, level::Level> pack;
    for (auto &l : level::load_pack(config.levels_dir))
        pack.emplace(l.id, std::move(l));

    std::vector<Entrant> entrants;
    for (const auto &a : config.agents)
        entrants.push_back({a.id, [kind = a.kind, seed = a.seed] { return agents::make_agent(kind, seed); },
                            a.selector, a.seed});

    TournamentReport report;
    std::vector<std::vector<std::string>> groups;
    std::vector<std::string> all;
    for (const auto &a : config.agents)
        all.push_back(a.id);

    for (std::size_t i = 0; i < config.stages.size(); ++i) {
        const auto &spec = config.stages[i];
        if (i == 0)
            groups = spec.kind == StageKind::quarterfinal ? snake_groups(all) : std::vector<std::vector<std::string>>{all};
        Stage stage = make_stage(spec.kind, groups, spec.levels);
        if (spec.budget_s)
            stage.budget_s = *spec.budget_s;

        StageRunOptions opts;
        for (const auto &id : spec.levels) {
            const auto it = pack.find(id);
            if (it == pack.end())
                throw std::invalid_argument("unknown level id " + id);
            opts.levels.push_back(it->second);
        }
        opts.time_scale = config.time_scale;
        opts.clock = config.clock;
        opts.max_attempts = config.max_attempts;
        opts.run_dir = config.run_dir;

        auto result = run_stage(stage, entrants, opts);
        if (log) {
            *log << "stage " << result.stage.name << '\n';
            for (const auto &b : result.boards) {
                *log << "  group " << b.group << '\n';
                for (const auto &s : b.ranking)
                    *log << "    " << s.agent << ' ' << s.combined << '\n';
                for (const auto &t : b.tie_breaks)
                    *log << "    tie: " << t << '\n';
            }
        }
        const auto adv = tourney::advance(result.stage, result.boards);
        if (log)
            for (const auto &t : adv.tie_breaks)
                *log << "  tie: " << t << '\n';
        report.stages.push_back(std::move(result));
        if (!adv.next) {
            if (!adv.selected.empty() && spec.kind == StageKind::grandfinal)
                report.champion = adv.selected.front();
            break;
        }
        if (i + 1 < config.stages.size() && config.stages[i + 1].kind != adv.next->kind)
            throw std::invalid_argument("stage order: expected " + std::string(to_string(adv.next->kind)) +
                                        " after " + std::string(to_string(spec.kind)));
        groups = adv.next->groups;
    }
    if (log && report.champion)
        *log << "champion " << *report.champion << '\n';
    return report;
}

} // namespace birdbench::tourney
