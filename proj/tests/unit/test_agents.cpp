// SPDX-License-Identifier: Apache-2.0
#include "birdbench/agents.hpp"
#include "birdbench/client.hpp"
#include "birdbench/level.hpp"
#include "birdbench/server.hpp"
#include "support.hpp"

#include <doctest.h>

#include <array>
#include <cmath>
#include <random>

using namespace birdbench;
using agents::EnvInfo;

namespace {

proto::Percept percept_of(const level::Level &l, std::optional<BirdType> bird = std::nullopt)
{
    const auto w = level::build_world(l);
    auto p = proto::snapshot_percept(w, proto::ScreenMap{}, proto::LevelState::playing, 0, 1800.0, 0);
    if (bird) {
        p.current_bird = bird;
        p.birds_remaining.front() = *bird;
    }
    return p;
}

// Whether the analytic trajectory at `angle` passes through the box,
// sampled every 1 mm of horizontal travel up to x_end.
bool parabola_hits_box(Vec2 launch, double angle, double x_end, geo::Aabb box)
{
    const double v = 28.0, g = 9.8;
    const double vx = v * std::cos(angle), vy = v * std::sin(angle);
    for (double x = launch.x; x <= x_end; x += 1e-3) {
        const double t = (x - launch.x) / vx;
        const double y = launch.y + vy * t - 0.5 * g * t * t;
        if (x > box.min.x && x < box.max.x && y > box.min.y && y < box.max.y)
            return true;
    }
    return false;
}

} // namespace

TEST_CASE("tap policy examples")
{
    CHECK(agents::tap_policy(BirdType::red, 2.0, agents::TapPolicy::total_length) == 0);
    CHECK(agents::tap_policy(BirdType::red, 1.2, agents::TapPolicy::first_obstacle) == 0);
    CHECK(agents::tap_policy(BirdType::yellow, 2.0, agents::TapPolicy::total_length) == 1700);
    CHECK(agents::tap_policy(BirdType::black, 1.2, agents::TapPolicy::first_obstacle) == 1176);
    CHECK(agents::tap_fraction(BirdType::yellow) == 0.85);
    CHECK(agents::tap_fraction(BirdType::black) == 0.98);
    CHECK_THROWS(agents::tap_policy(BirdType::blue, 0.0, agents::TapPolicy::total_length));
}

TEST_CASE("naive agent is a deterministic function of its seed")
{
    const EnvInfo env;
    const auto p = percept_of(test_support::load_pack_level("L02"));
    agents::NaiveAgent a(42), b(42), c(43);
    bool differs = false;
    for (int i = 0; i < 50; ++i) {
        const auto sa = a.select(p, env);
        const auto sb = b.select(p, env);
        const auto sc = c.select(p, env);
        CHECK(sa.angle == sb.angle);
        CHECK(sa.tap_ms == sb.tap_ms);
        CHECK(sa.angle >= 0.0);
        CHECK(sa.angle < kPi / 2);
        CHECK(sa.tap_ms >= 0);
        differs = differs || sa.angle != sc.angle;
    }
    CHECK(differs);
}

TEST_CASE("naive agent keeps the low branch when the high one leaves the world")
{
    // A faster launcher sends the high branch above the top of the world.
    EnvInfo env;
    env.v_max = 40.0;
    const auto p = percept_of(test_support::load_pack_level("L01"));
    const auto scene = proto::percept_scene(p, env.map);
    const auto aims = agents::aims_at(agents::target_point(scene.back()), p, env, scene);
    REQUIRE(aims.size() == 1);
    CHECK_FALSE(aims[0].high);
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        agents::NaiveAgent a(seed);
        CHECK(a.select(p, env).angle == aims[0].angle);
    }
}

TEST_CASE("naive pig choice is uniform over 10^4 draws")
{
    const EnvInfo env;
    const auto p = percept_of(test_support::load_pack_level("L02"));
    const auto scene = proto::percept_scene(p, env.map);
    std::vector<std::vector<double>> angles;
    for (const auto &o : scene)
        if (o.kind == ObjectKind::pig) {
            angles.emplace_back();
            for (const auto &aim : agents::aims_at(agents::target_point(o), p, env, scene))
                angles.back().push_back(aim.angle);
        }
    REQUIRE(angles.size() == 3);

    agents::NaiveAgent agent(2024);
    const int n = 10000;
    std::array<int, 3> pig_counts{};
    int high = 0;
    for (int i = 0; i < n; ++i) {
        const auto s = agent.select(p, env);
        int which = -1;
        for (std::size_t k = 0; k < 3; ++k)
            for (std::size_t b = 0; b < angles[k].size(); ++b)
                if (angles[k][b] == s.angle) {
                    which = static_cast<int>(k);
                    high += b == 1 ? 1 : 0;
                }
        REQUIRE(which >= 0);
        ++pig_counts[static_cast<std::size_t>(which)];
    }
    const double expected = n / 3.0;
    const double sigma = std::sqrt(n * (1.0 / 3.0) * (2.0 / 3.0));
    double chi2 = 0.0;
    for (int c : pig_counts) {
        CHECK(std::abs(c - expected) < 3.0 * sigma);
        chi2 += (c - expected) * (c - expected) / expected;
    }
    // 99.9th percentile of chi-square with 2 degrees of freedom.
    CHECK(chi2 < 13.816);
    CHECK(std::abs(high - n / 2.0) < 3.0 * std::sqrt(n * 0.25));
}

TEST_CASE("blocking penalty matrix")
{
    CHECK(agents::blocking_penalty(BirdType::blue, Material::ice) == 0.0);
    CHECK(agents::blocking_penalty(BirdType::red, Material::ice) == 0.5);
    CHECK(agents::blocking_penalty(BirdType::red, Material::stone) == 3.0);
    CHECK(agents::blocking_penalty(BirdType::yellow, Material::wood) == 0.0);
    CHECK(agents::blocking_penalty(BirdType::yellow, Material::stone) == 3.75);
    CHECK(agents::blocking_penalty(BirdType::black, Material::stone) == 0.0);
    CHECK(agents::blocking_penalty(BirdType::red, Material::none) == 0.0);
    // Two wood blocks cost a yellow bird less than one stone block.
    CHECK(2 * agents::blocking_penalty(BirdType::yellow, Material::wood) <
          agents::blocking_penalty(BirdType::yellow, Material::stone));
}

TEST_CASE("blocking agent on the ice wall level: blue goes through, red goes over")
{
    const auto l = test_support::load_pack_level("L07");
    const EnvInfo env;
    // Hand enumeration: the only target is the pig; the ice wall spans
    // x 39.5..40.5, y 2..6 and the wood post x 43.75..44.25, y 2..4.
    const Vec2 pig = l.objects[1].position;
    const auto branches = geo::solve_launch_angles(28.0, 9.8, pig - l.slingshot);
    const geo::Aabb ice{{39.5, 2.0}, {40.5, 6.0}};
    const geo::Aabb wood{{43.75, 2.0}, {44.25, 4.0}};
    REQUIRE(parabola_hits_box(l.slingshot, branches.low_angle, pig.x, ice));
    REQUIRE_FALSE(parabola_hits_box(l.slingshot, branches.low_angle, pig.x, wood));
    REQUIRE_FALSE(parabola_hits_box(l.slingshot, branches.high_angle, pig.x, ice));
    REQUIRE_FALSE(parabola_hits_box(l.slingshot, branches.high_angle, pig.x, wood));
    // Blue: low 1 ice x 0.5 x (2 - 2) = 0, high 0; the tie goes to the low branch.
    // Red: low 1 ice x 0.5 x (2 - 1) = 0.5, high 0.
    agents::BlockingAgent agent;
    const auto blue = agent.select(percept_of(l, BirdType::blue), env);
    const auto red = agent.select(percept_of(l, BirdType::red), env);
    CHECK(blue.angle == doctest::Approx(branches.low_angle).epsilon(1e-3));
    CHECK(red.angle == doctest::Approx(branches.high_angle).epsilon(1e-3));

    const auto cands = agents::blocking_candidates(percept_of(l, BirdType::red), env);
    REQUIRE(cands.size() == 2);
    CHECK(cands[0].counts.at(Material::ice) == 1);
    CHECK(cands[0].penalty == 0.5);
    CHECK(cands[1].counts.empty());
}

TEST_CASE("blocking agent prefers an open pig")
{
    const EnvInfo env;
    const auto p = percept_of(test_support::load_pack_level("L01"));
    for (const auto &c : agents::blocking_candidates(p, env))
        CHECK(c.penalty == 0.0);
    agents::BlockingAgent agent;
    CHECK(agent.select(p, env).angle < kPi / 4);
}

TEST_CASE("strategy agent examples")
{
    const EnvInfo env;
    agents::StrategyAgent agent;

    SUBCASE("tnt beside three pigs beats the lone pig")
    {
        // The TNT centre is 1.2, 2.4 and 3.6 from the three pigs, all within
        // the blast radius 4: 3 x 0.9 = 2.7 against 1.0 for a direct hit and
        // 2.0 for the best path through two pigs.
        const auto p = percept_of(test_support::load_fixture("tnt_cluster"));
        const auto shot = agent.select(p, env);
        CHECK(shot.rationale == "tnt");
        double best_tnt = 0.0, best_other = 0.0;
        for (const auto &c : agents::strategy_candidates(p, env))
            (c.strategy == agents::Strategy::tnt ? best_tnt : best_other) =
                std::max(c.strategy == agents::Strategy::tnt ? best_tnt : best_other, c.utility);
        CHECK(best_tnt == doctest::Approx(2.7));
        CHECK(best_other == doctest::Approx(2.0));
    }
    SUBCASE("a lone open pig is a pigshooter shot")
    {
        CHECK(agent.select(percept_of(test_support::load_pack_level("L01")), env).rationale == "pigshooter");
    }
    SUBCASE("covered pig: knock out a support of the canopy")
    {
        const auto l = test_support::load_pack_level("L04");
        const auto p = percept_of(l);
        const auto cands = agents::strategy_candidates(p, env);
        REQUIRE_FALSE(cands.empty());
        const auto shot = agent.select(p, env);
        CHECK(shot.rationale == "support_collapse");
        const auto &best = *std::find_if(cands.begin(), cands.end(),
                                         [&](const auto &c) { return c.shot.angle == shot.angle; });
        const auto scene = proto::percept_scene(p, env.map);
        const auto *target = geo::find_object(scene, best.target);
        REQUIRE(target != nullptr);
        CHECK(target->kind == ObjectKind::block);
        CHECK(target->material == Material::ice);
        const auto canopy = level::object_body_id(l, 2);
        CHECK(geo::find_supporters(canopy, scene).contains(best.target));
        // One threatened pig, wooden-or-ice support: 0.8 x 1.
        CHECK(best.utility == doctest::Approx(0.8));
    }
}

TEST_CASE("property: strategy candidates only use clear paths")
{
    const EnvInfo env;
    for (const auto &l : level::load_pack(test_support::levels_dir())) {
        const auto p = percept_of(l);
        const auto scene = proto::percept_scene(p, env.map);
        for (const auto &c : agents::strategy_candidates(p, env)) {
            CHECK(std::isfinite(c.utility));
            const auto *t = geo::find_object(scene, c.target);
            REQUIRE(t != nullptr);
            bool matched = false;
            for (const auto &aim : agents::aims_at(agents::target_point(*t), p, env, scene))
                if (aim.angle == c.shot.angle) {
                    matched = true;
                    if (c.strategy != agents::Strategy::multi_pig)
                        CHECK_FALSE(geo::first_obstruction(aim.path, scene, t->id).has_value());
                }
            CHECK(matched);
        }
    }
}

TEST_CASE("simulation: best candidate ranking")
{
    using agents::SimCandidate;
    std::vector<SimCandidate> r(4);
    r[0].pigs_killed = 0;
    r[1].pigs_killed = 1;
    r[1].destroyed = 2;
    r[2].pigs_killed = 1;
    r[2].destroyed = 4;
    r[3].pigs_killed = 1;
    r[3].destroyed = 4;
    CHECK(agents::best_candidate(r) == 2);
    r[0].pigs_killed = 2;
    CHECK(agents::best_candidate(r) == 0);
}

TEST_CASE("simulation: 40-shot grid on L03 matches a serial oracle")
{
    const auto l = test_support::load_pack_level("L03");
    const EnvInfo env;
    const auto p = percept_of(l);
    std::vector<agents::Shot> grid;
    for (int i = 0; i < 20; ++i)
        for (double speed : {1.0, 0.85}) {
            agents::Shot s;
            s.angle = 0.05 + 0.06 * i;
            s.speed_fraction = speed;
            grid.push_back(s);
        }
    REQUIRE(grid.size() == 40);

    agents::SimulationParams params;
    params.threads = 4;
    const auto parallel = agents::evaluate_grid(p, env, grid, params);

    // Serial oracle: one private world per shot, plain loop, plain argmax.
    std::size_t oracle_best = 0;
    std::vector<std::pair<int, int>> oracle;
    for (const auto &s : grid) {
        auto w = agents::reconstruct_world(p, env);
        const auto out = phys::simulate_shot(w, s.command(), params.settle);
        int pigs = 0, destroyed = 0;
        for (std::size_t i = out.first_event; i < w.events().size(); ++i) {
            const auto k = w.events()[i].kind;
            pigs += k == phys::EventKind::pig_killed ? 1 : 0;
            destroyed += k == phys::EventKind::destroyed || k == phys::EventKind::tnt_detonated ? 1 : 0;
        }
        oracle.emplace_back(pigs, destroyed);
        if (oracle.back() > oracle[oracle_best])
            oracle_best = oracle.size() - 1;
    }
    REQUIRE(parallel.size() == 40);
    for (std::size_t i = 0; i < 40; ++i) {
        CHECK(parallel[i].pigs_killed == oracle[i].first);
        CHECK(parallel[i].destroyed == oracle[i].second);
    }
    CHECK(agents::best_candidate(parallel) == oracle_best);
    CHECK(oracle[oracle_best].first > 0);

    params.threads = 1;
    const auto serial = agents::evaluate_grid(p, env, grid, params);
    CHECK(agents::best_candidate(serial) == agents::best_candidate(parallel));
}

TEST_CASE("simulation agent solves the covered pig")
{
    const auto l = test_support::load_pack_level("L04");
    auto w = level::build_world(l);
    agents::SimulationAgent agent;
    const auto shot = agent.select(percept_of(l), EnvInfo{});
    phys::simulate_shot(w, shot.command());
    CHECK(w.solved());
}

TEST_CASE("property: every agent is deterministic and its shots are accepted on the whole pack")
{
    proto::RoundConfig cfg;
    cfg.levels = level::load_pack(test_support::levels_dir());
    proto::Server server(cfg);
    for (const char *kind : {"naive", "blocking", "strategy", "simulation"}) {
        for (const auto &l : cfg.levels) {
            const auto p = percept_of(l);
            const auto a = agents::make_agent(kind, 9)->select(p, EnvInfo{});
            const auto b = agents::make_agent(kind, 9)->select(p, EnvInfo{});
            CHECK(a.angle == b.angle);
            CHECK(a.tap_ms == b.tap_ms);
            CHECK(a.angle >= 0.0);
            CHECK(a.angle < kPi / 2);
        }
        sdk::Client client(std::make_unique<sdk::LoopbackTransport>(server));
        auto agent = agents::make_agent(kind, 3);
        sdk::RoundRobinSelector selector;
        sdk::PlayOptions options;
        options.agent_id = kind;
        options.max_attempts = static_cast<int>(cfg.levels.size());
        // Any error other than round closure propagates as ClientError.
        CHECK_NOTHROW(sdk::play_round(client, *agent, selector, options));
    }
    CHECK_THROWS_AS(agents::make_agent("oracle", 0), std::invalid_argument);
}
