// SPDX-License-Identifier: Apache-2.0
#include "birdbench/agents.hpp"
#include "birdbench/game.hpp"
#include "birdbench/geometry.hpp"
#include "birdbench/level.hpp"
#include "birdbench/physics.hpp"
#include "birdbench/tournament.hpp"
#include "birdbench/validate.hpp"
#include "protocol_fuzz.hpp"
#include "support.hpp"
#include "tournament_checks.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace birdbench;

namespace {

struct Verdict
{
    bool pass{false};
    std::string detail;
};

int failures = 0;

void report(const std::string &name, double limit_s, const std::function<Verdict()> &check)
{
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
        v = check();
    } catch (const std::exception &e) {
        v = {false, std::string("exception: ") + e.what()};
    }
    const double took = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = took < limit_s;
    const bool ok = v.pass && in_time;
    failures += ok ? 0 : 1;
    std::printf("%s %s: %s (%.2f s, limit %.0f s%s)\n", ok ? "PASS" : "FAIL", name.c_str(), v.detail.c_str(), took,
                limit_s, in_time ? "" : ", too slow");
    std::fflush(stdout);
}

// Height of the engine-integrated flight at horizontal offset dx from the
// launch point, interpolated between the two steps that straddle it.
double engine_height_at(double angle, double dx)
{
    phys::World w;
    const Vec2 launch{5.0, 15.0};
    w.set_launch_point(launch);
    w.set_birds({BirdType::red});
    w.launch_bird(angle, 1.0);
    const auto bird_position = [&] {
        for (const auto &b : w.bodies())
            if (b.kind == ObjectKind::bird && b.alive)
                return b.position - launch;
        throw std::runtime_error("bird left the world");
    };
    Vec2 prev = bird_position();
    for (int i = 0; i < 60 * 30; ++i) {
        w.step();
        const Vec2 cur = bird_position();
        if (cur.x >= dx) {
            const double s = (dx - prev.x) / (cur.x - prev.x);
            return prev.y + s * (cur.y - prev.y);
        }
        prev = cur;
    }
    throw std::runtime_error("bird never reached the target column");
}

Verdict trajectory_oracle()
{
    const phys::PhysicsConfig cfg;
    const double v = cfg.v_max, g = cfg.gravity;
    std::mt19937_64 rng(1000);
    std::uniform_real_distribution<double> ux(1.0, 75.0), uy(-12.0, 30.0);
    int targets = 0;
    double worst_analytic = 0.0, worst_engine = 0.0;
    while (targets < 1000) {
        const Vec2 t{ux(rng), uy(rng)};
        const auto s = geo::solve_launch_angles(v, g, t);
        if (!s.reachable)
            continue;
        ++targets;
        for (double a : {s.low_angle, s.high_angle}) {
            worst_analytic = std::max(worst_analytic, std::abs(geo::parabola_height(a, v, g, t.x) - t.y));
            // Miss relative to the distance flown along the ideal path.
            const double miss = std::abs(engine_height_at(a, t.x) - t.y);
            worst_engine = std::max(worst_engine, miss / geo::arc_length_to_x(a, v, g, t.x));
        }
    }
    std::ostringstream d;
    d << targets << " targets, worst analytic miss " << worst_analytic << " (tol 1e-9), worst engine miss "
      << 100.0 * worst_engine << "% of path (tol 2%)";
    return {worst_analytic <= 1e-9 && worst_engine <= 0.02, d.str()};
}

// Replays a stage log through fresh game instances, folding the world hash
// after every action.
std::uint64_t hash_log(const std::vector<proto::ActionRecord> &actions, const std::vector<level::Level> &levels)
{
    std::uint64_t chain = 1469598103934665603ULL;
    const auto fold = [&](std::uint64_t h) { chain = (chain ^ h) * 1099511628211ULL; };
    std::unique_ptr<proto::GameInstance> game;
    for (const auto &a : actions) {
        if (a.op == "LOAD_LEVEL") {
            game = std::make_unique<proto::GameInstance>(levels.at(static_cast<std::size_t>(a.level)));
        } else if (a.op == "RESTART_LEVEL" || a.op == "WATCHDOG_RESTART") {
            game->restart();
        } else if (a.op == "SHOOT") {
            game->shoot({deg_to_rad(a.angle_deg), a.speed_fraction, a.tap_ms});
        }
        if (game)
            fold(game->world().state_hash());
    }
    return chain;
}

Verdict determinism(const std::vector<level::Level> &pack)
{
    std::vector<std::uint64_t> hashes;
    std::vector<std::string> boards;
    for (int run = 0; run < 3; ++run) {
        tourney::Entrant e{"simulation", [] { return agents::make_agent("simulation", 0); }};
        tourney::Stage stage = tourney::make_stage(tourney::StageKind::benchmark, {{e.id}});
        stage.budget_s = 1200.0;
        tourney::StageRunOptions opts;
        opts.levels = pack;
        const auto r = tourney::run_stage(stage, std::span(&e, 1), opts);
        hashes.push_back(hash_log(r.actions, pack));
        boards.push_back(r.boards.front().to_json());
    }
    const bool ok = hashes[0] == hashes[1] && hashes[1] == hashes[2] && boards[0] == boards[1] && boards[1] == boards[2];
    std::ostringstream d;
    d << "3 runs, state hash chain " << std::hex << hashes[0] << std::dec << (ok ? " identical" : " differs")
      << ", leaderboards " << (boards[0] == boards[1] && boards[1] == boards[2] ? "identical" : "differ");
    return {ok, d.str()};
}

Verdict selection_vectors()
{
    const auto r = test_support::advance_competition_rounds();
    const std::vector<std::string> finalists = {"IHSEV", "Eagle's Wing"};
    const bool ok = r.finalists == finalists && r.champion == "Eagle's Wing";
    std::string d = "finalists {";
    for (const auto &f : r.finalists)
        d += (d.back() == '{' ? "" : ", ") + f;
    d += "}, champion " + r.champion;
    return {ok, d};
}

Verdict tournament_semantics(const std::vector<level::Level> &pack)
{
    const auto r = test_support::run_tournament_properties(pack, 99, 500);
    const int bad = r.unsolved_counted + r.sum_mismatches + r.order_violations + r.advance_violations +
                    r.replay_mismatches + r.persistence_mismatches;
    std::ostringstream d;
    d << r.trials << " histories, unsolved counted " << r.unsolved_counted << ", sum mismatches " << r.sum_mismatches
      << ", replay mismatches " << r.replay_mismatches << ", other violations "
      << r.order_violations + r.advance_violations + r.persistence_mismatches;
    return {r.trials == 500 && bad == 0, d.str()};
}

// One full attempt (until solved or out of birds) with a fresh agent.
bool solves_in_one_attempt(const level::Level &l, const std::string &kind, std::uint64_t seed)
{
    proto::GameInstance game(l);
    auto agent = agents::make_agent(kind, seed);
    while (game.state() == proto::LevelState::playing) {
        const auto shot = agent->select(game.percept(proto::ScreenMap{}, 1800.0, 0), agents::EnvInfo{});
        game.shoot(shot.command());
    }
    return game.state() == proto::LevelState::solved;
}

int solved_levels(const std::string &kind, std::uint64_t seed, const std::vector<level::Level> &pack)
{
    tourney::Entrant e{kind, [kind, seed] { return agents::make_agent(kind, seed); }};
    e.seed = seed;
    const auto r = tourney::benchmark(e, pack, 600.0);
    int n = 0;
    for (long s : r.levels)
        n += s > 0 ? 1 : 0;
    return n;
}

Verdict agent_ordering(const std::vector<level::Level> &pack, const level::Level &support_level)
{
    int naive_total = 0, sim_total = 0, seeds_behind = 0, strategy_solves = 0, naive_fails = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const int naive = solved_levels("naive", seed, pack);
        const int sim = solved_levels("simulation", seed, pack);
        naive_total += naive;
        sim_total += sim;
        seeds_behind += sim < naive ? 1 : 0;
        strategy_solves += solves_in_one_attempt(support_level, "strategy", seed) ? 1 : 0;
        naive_fails += solves_in_one_attempt(support_level, "naive", seed) ? 0 : 1;
    }
    std::ostringstream d;
    d << "20 seeds, 600 s each: solved levels simulation " << sim_total << " vs naive " << naive_total
      << " (seeds with simulation behind: " << seeds_behind << "); " << support_level.id << " solved by strategy "
      << strategy_solves << "/20, failed by naive " << naive_fails << "/20 (need >= 19)";
    return {sim_total >= naive_total && seeds_behind == 0 && strategy_solves == 20 && naive_fails >= 19, d.str()};
}

Verdict protocol_robustness()
{
    const auto r = test_support::run_protocol_fuzz(test_support::levels_dir(), 2024, 10000);
    const int answered = r.ok_responses + r.error_responses;
    std::ostringstream d;
    d << r.requests << " requests, " << answered << " well-formed responses, seq mismatches " << r.seq_mismatches
      << ", dead sessions " << r.dead_sessions << ", scope leaks " << r.scope_leaks;
    const bool ok = r.requests == 10000 && answered == r.requests && r.malformed_responses == 0 &&
                    r.seq_mismatches == 0 && r.dead_sessions == 0 && r.scope_leaks == 0 && r.best_regressions == 0;
    return {ok, d.str()};
}

Verdict validators(const std::vector<level::Level> &pack)
{
    int stable = 0, solvable = 0;
    double worst = 0.0;
    for (const auto &l : pack) {
        const auto s = level::validate_stability(l);
        stable += s.stable ? 1 : 0;
        worst = std::max(worst, s.max_drift);
        auto probe = agents::make_agent("simulation", 0);
        solvable += level::validate_solvability(l, *probe, 10).solvable.value_or(false) ? 1 : 0;
    }
    const auto unstable = level::validate_stability(test_support::load_fixture("unstable_box"));
    std::ostringstream d;
    d << stable << "/" << pack.size() << " stable (worst drift " << worst << ", eps 0.1), unstable fixture "
      << (unstable.stable ? "passes" : "fails") << " (drift " << unstable.max_drift << "), " << solvable << "/"
      << pack.size() << " proven solvable (need >= 10)";
    const bool ok = pack.size() == 12 && stable == 12 && !unstable.stable && solvable >= 10;
    return {ok, d.str()};
}

} // namespace

int main()
{
    const auto pack = level::load_pack(test_support::levels_dir());
    report("trajectory oracle", 5, trajectory_oracle);
    report("determinism", 180, [&] { return determinism(pack); });
    report("selection vectors", 1, selection_vectors);
    report("tournament semantics", 30, [&] { return tournament_semantics(pack); });
    report("agent ordering", 600, [&] { return agent_ordering(pack, test_support::load_pack_level("L04")); });
    report("protocol robustness", 60, protocol_robustness);
    report("validators", 120, [&] { return validators(pack); });
    std::printf("%s: %d failing\n", failures == 0 ? "ALL PASS" : "FAILURES", failures);
    return failures == 0 ? 0 : 1;
}
