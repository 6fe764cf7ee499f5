// SPDX-License-Identifier: Apache-2.0
#include "birdbench/agents.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>
#include <tuple>

namespace birdbench::agents {

namespace {

constexpr double kMaxAngle = kPi / 2.0;

bool is_terrain(const geo::SceneObject &o) { return o.kind == ObjectKind::terrain; }

std::vector<geo::SceneObject> terrain_only(std::span<const geo::SceneObject> scene)
{
    std::vector<geo::SceneObject> out;
    std::copy_if(scene.begin(), scene.end(), std::back_inserter(out), is_terrain);
    return out;
}

std::vector<const geo::SceneObject *> of_kind(std::span<const geo::SceneObject> scene, ObjectKind kind)
{
    std::vector<const geo::SceneObject *> out;
    for (const auto &o : scene)
        if (o.kind == kind)
            out.push_back(&o);
    return out;
}

BirdType bird_of(const proto::Percept &p) { return p.current_bird.value_or(BirdType::red); }

int full_length_tap(const proto::Percept &p, double flight_time)
{
    return tap_policy(bird_of(p), flight_time, TapPolicy::total_length);
}

// Best effort towards the pig nearest to the slingshot when nothing is usable.
Shot fallback_shot(const proto::Percept &p, const EnvInfo &env, std::span<const geo::SceneObject> scene)
{
    const Vec2 launch = launch_point(p, env);
    const geo::SceneObject *nearest = nullptr;
    double best = std::numeric_limits<double>::infinity();
    for (const auto *pig : of_kind(scene, ObjectKind::pig)) {
        const double d = (target_point(*pig) - launch).length();
        if (d < best) {
            best = d;
            nearest = pig;
        }
    }
    Shot s;
    s.rationale = "fallback";
    if (!nearest) {
        s.angle = deg_to_rad(45.0);
        return s;
    }
    const Vec2 rel = target_point(*nearest) - launch;
    double angle = rel.x > 0.0 ? geo::boundary_launch_angle(env.v_max, env.gravity, rel) : deg_to_rad(45.0);
    angle = std::clamp(angle, 0.0, kMaxAngle - 1e-6);
    s.angle = angle;
    if (rel.x > 0.0)
        s.tap_ms = full_length_tap(p, geo::time_to_x(angle, env.v_max, rel.x));
    return s;
}

geo::Polyline path_to(Vec2 launch, double angle, double v, double g, double flight_time, Vec2 target)
{
    auto path = geo::sample_trajectory(angle, v, g, geo::kDefaultSampleDt,
                                       std::max(flight_time, geo::kDefaultSampleDt), launch);
    // Cut at the flight time and end exactly on the target point.
    while (path.points.size() > 1 &&
           static_cast<double>(path.points.size() - 1) * geo::kDefaultSampleDt > flight_time)
        path.points.pop_back();
    if ((path.points.back() - target).length() > 1e-12)
        path.points.push_back(target);
    return path;
}

} // namespace

// ---------------------------------------------------------------- tap policy

double tap_fraction(BirdType bird)
{
    switch (bird) {
    case BirdType::red:
        return 0.0;
    case BirdType::blue:
        return 0.80;
    case BirdType::yellow:
        return 0.85;
    case BirdType::black:
        return 0.98;
    case BirdType::white:
        return 0.90;
    }
    return 0.0;
}

int tap_policy(BirdType bird, double time_s, TapPolicy)
{
    if (!(time_s > 0.0))
        throw DomainError("trajectory time must be positive");
    if (ability_of(bird) == Ability::none)
        return 0;
    return static_cast<int>(std::llround(tap_fraction(bird) * time_s * 1000.0));
}

// ---------------------------------------------------------------- aiming

Vec2 launch_point(const proto::Percept &p, const EnvInfo &env) { return env.map.to_world(p.slingshot); }

Vec2 target_point(const geo::SceneObject &o) { return geo::bounds(o).center(); }

std::vector<Aim> aims_at(Vec2 target,
                         const proto::Percept &p,
                         const EnvInfo &env,
                         std::span<const geo::SceneObject> scene)
{
    std::vector<Aim> out;
    const Vec2 launch = launch_point(p, env);
    const Vec2 rel = target - launch;
    if (rel.x <= 1e-9)
        return out;
    const auto sol = geo::solve_launch_angles(env.v_max, env.gravity, rel);
    if (!sol.reachable)
        return out;
    const auto terrain = terrain_only(scene);
    const double top = env.world_size().y;
    for (const auto &[angle, high] : {std::pair{sol.low_angle, false}, std::pair{sol.high_angle, true}}) {
        if (!(angle >= 0.0 && angle < kMaxAngle))
            continue;
        const double vy = env.v_max * std::sin(angle);
        if (launch.y + vy * vy / (2.0 * env.gravity) > top)
            continue;
        const double t = geo::time_to_x(angle, env.v_max, rel.x);
        auto path = path_to(launch, angle, env.v_max, env.gravity, t, target);
        if (geo::first_obstruction(path, terrain))
            continue;
        out.push_back({angle, high, t, std::move(path)});
    }
    return out;
}

// ---------------------------------------------------------------- naive

Shot NaiveAgent::select(const proto::Percept &percept, const EnvInfo &env)
{
    const auto scene = proto::percept_scene(percept, env.map);
    std::vector<std::vector<Aim>> options;
    for (const auto *pig : of_kind(scene, ObjectKind::pig)) {
        auto aims = aims_at(target_point(*pig), percept, env, scene);
        if (!aims.empty())
            options.push_back(std::move(aims));
    }
    if (options.empty())
        return fallback_shot(percept, env, scene);
    const auto &aims = options[rng_() % options.size()];
    const Aim &aim = aims[aims.size() > 1 ? rng_() % aims.size() : 0];
    Shot s;
    s.angle = aim.angle;
    s.tap_ms = full_length_tap(percept, aim.flight_time);
    s.rationale = aim.high ? "naive_high" : "naive_low";
    return s;
}

// ---------------------------------------------------------------- blocking

double blocking_penalty(std::optional<BirdType> bird, Material m, const phys::PhysicsConfig &config)
{
    if (m == Material::none)
        return 0.0;
    return config.props(m).hp_per_area * (2.0 - effectiveness(bird, m));
}

std::vector<BlockingChoice> blocking_candidates(const proto::Percept &percept, const EnvInfo &env)
{
    const auto scene = proto::percept_scene(percept, env.map);
    std::vector<BlockingChoice> out;
    for (const auto &target : scene) {
        if (target.kind != ObjectKind::pig && target.kind != ObjectKind::tnt)
            continue;
        for (auto &aim : aims_at(target_point(target), percept, env, scene)) {
            BlockingChoice c;
            c.target = target.id;
            c.high = aim.high;
            for (const auto &obs : geo::all_obstructions(aim.path, scene, target.id)) {
                const auto *o = geo::find_object(scene, obs.id);
                if (o->kind != ObjectKind::block)
                    continue;
                ++c.counts[o->material];
                c.penalty += blocking_penalty(percept.current_bird, o->material);
            }
            c.shot.angle = aim.angle;
            c.shot.tap_ms = full_length_tap(percept, aim.flight_time);
            c.shot.rationale = "blocking";
            out.push_back(std::move(c));
        }
    }
    return out;
}

Shot BlockingAgent::select(const proto::Percept &percept, const EnvInfo &env)
{
    const auto cands = blocking_candidates(percept, env);
    if (cands.empty())
        return fallback_shot(percept, env, proto::percept_scene(percept, env.map));
    const auto key = [](const BlockingChoice &c) { return std::tuple(c.penalty, c.high, c.target); };
    return std::min_element(cands.begin(), cands.end(), [&](const auto &a, const auto &b) { return key(a) < key(b); })
        ->shot;
}

// ---------------------------------------------------------------- strategies

std::string_view to_string(Strategy s)
{
    switch (s) {
    case Strategy::multi_pig:
        return "multi_pig";
    case Strategy::tnt:
        return "tnt";
    case Strategy::support_collapse:
        return "support_collapse";
    case Strategy::high_round:
        return "high_round";
    case Strategy::pigshooter:
        return "pigshooter";
    case Strategy::fallback:
        return "fallback";
    }
    return "?";
}

std::vector<StrategyScore> strategy_candidates(const proto::Percept &percept,
                                               const EnvInfo &env,
                                               const StrategyWeights &w)
{
    const auto scene = proto::percept_scene(percept, env.map);
    const auto pigs = of_kind(scene, ObjectKind::pig);
    const phys::PhysicsConfig config{};
    std::vector<StrategyScore> out;

    const auto emit = [&](Strategy strategy, const geo::SceneObject &target, const Aim &aim, double utility) {
        Shot s;
        s.angle = aim.angle;
        s.tap_ms = full_length_tap(percept, aim.flight_time);
        s.rationale = std::string(to_string(strategy));
        out.push_back({strategy, target.id, std::move(s), utility});
    };
    const auto clear_aims = [&](const geo::SceneObject &target) {
        auto aims = aims_at(target_point(target), percept, env, scene);
        std::erase_if(aims, [&](const Aim &a) { return geo::first_obstruction(a.path, scene, target.id).has_value(); });
        return aims;
    };

    // Trajectories through as many pigs as possible: only pigs on the way.
    for (const auto *pig : pigs) {
        for (const auto &aim : aims_at(target_point(*pig), percept, env, scene)) {
            int count = 1;
            bool clear = true;
            for (const auto &obs : geo::all_obstructions(aim.path, scene, pig->id)) {
                if (geo::find_object(scene, obs.id)->kind != ObjectKind::pig) {
                    clear = false;
                    break;
                }
                ++count;
            }
            if (clear && count >= 2)
                emit(Strategy::multi_pig, *pig, aim, w.per_pig_on_path * count);
        }
    }

    // TNT valued by what its blast would reach.
    for (const auto *tnt : of_kind(scene, ObjectKind::tnt)) {
        const Vec2 c = target_point(*tnt);
        int n_pigs = 0, n_stone = 0, n_tnt = 0;
        for (const auto &o : scene) {
            if (o.id == tnt->id || (target_point(o) - c).length() >= config.tnt_blast.radius)
                continue;
            if (o.kind == ObjectKind::pig)
                ++n_pigs;
            else if (o.kind == ObjectKind::tnt)
                ++n_tnt;
            else if (o.kind == ObjectKind::block && o.material == Material::stone)
                ++n_stone;
        }
        const double utility = w.tnt_per_pig * n_pigs + w.tnt_per_stone * n_stone + w.tnt_per_tnt * n_tnt;
        if (utility > 0.0)
            for (const auto &aim : clear_aims(*tnt))
                emit(Strategy::tnt, *tnt, aim, utility);
    }

    // Supporters of blocks that hang over pigs: bring the load down on them.
    std::map<ObjectId, double> support_value;
    for (const auto &b : scene) {
        if (b.kind != ObjectKind::block)
            continue;
        const auto bb = geo::bounds(b);
        int threatened = 0;
        for (const auto *pig : pigs) {
            const auto pb = geo::bounds(*pig);
            const bool near = pb.max.x >= bb.min.x - w.near_pig_radius && pb.min.x <= bb.max.x + w.near_pig_radius;
            if (near && bb.min.y >= pb.max.y - 0.05)
                ++threatened;
        }
        if (threatened == 0)
            continue;
        for (auto sid : geo::find_supporters(b.id, scene)) {
            const auto *s = geo::find_object(scene, sid);
            if (s->kind != ObjectKind::block)
                continue;
            const double factor = s->material == Material::stone ? w.support_stone_factor : 1.0;
            auto &v = support_value[sid];
            v = std::max(v, w.support_per_pig * threatened * factor);
        }
    }
    for (const auto &[sid, utility] : support_value) {
        const auto *s = geo::find_object(scene, sid);
        for (const auto &aim : clear_aims(*s))
            emit(Strategy::support_collapse, *s, aim, utility);
    }

    // Round blocks resting above pigs can roll or fall onto them.
    for (const auto &b : scene) {
        if (b.kind != ObjectKind::block || !std::holds_alternative<geo::Circle>(b.shape))
            continue;
        const Vec2 c = target_point(b);
        int below = 0;
        for (const auto *pig : pigs) {
            const auto pb = geo::bounds(*pig);
            if (c.y > pb.max.y && std::abs(target_point(*pig).x - c.x) <= w.round_reach)
                ++below;
        }
        if (below > 0)
            for (const auto &aim : clear_aims(b))
                emit(Strategy::high_round, b, aim, w.round_per_pig * below);
    }

    for (const auto *pig : pigs)
        for (const auto &aim : clear_aims(*pig))
            emit(Strategy::pigshooter, *pig, aim, w.pigshooter);

    return out;
}

Shot StrategyAgent::select(const proto::Percept &percept, const EnvInfo &env)
{
    const auto cands = strategy_candidates(percept, env, weights_);
    if (cands.empty()) {
        BlockingAgent fallback;
        Shot s = fallback.select(percept, env);
        s.rationale = "fallback";
        return s;
    }
    // Highest utility; ties by strategy order, then target id, low branch
    // first (candidates of one target are emitted low first).
    const StrategyScore *best = &cands.front();
    for (const auto &c : cands) {
        const auto better = c.utility > best->utility ||
                            (c.utility == best->utility && std::tuple(c.strategy, c.target) <
                                                               std::tuple(best->strategy, best->target));
        if (better)
            best = &c;
    }
    return best->shot;
}

// ---------------------------------------------------------------- simulation

phys::World reconstruct_world(const proto::Percept &percept, const EnvInfo &env, const phys::PhysicsConfig &base)
{
    phys::PhysicsConfig config = base;
    config.v_max = env.v_max;
    config.gravity = env.gravity;
    config.world_size = env.world_size();
    phys::World world(config);
    for (const auto &o : proto::percept_scene(percept, env.map)) {
        phys::BodyDef def;
        def.kind = o.kind;
        def.material = o.material;
        def.shape = o.shape;
        def.position = o.position;
        def.angle = o.angle;
        world.add_body(def, o.id);
    }
    world.set_launch_point(launch_point(percept, env));
    world.set_birds(percept.birds_remaining);
    return world;
}

std::vector<Shot> simulation_grid(const proto::Percept &percept, const EnvInfo &env, const SimulationParams &params)
{
    const auto scene = proto::percept_scene(percept, env.map);
    const auto pigs = of_kind(scene, ObjectKind::pig);
    std::vector<const geo::SceneObject *> targets = pigs;
    for (const auto *t : of_kind(scene, ObjectKind::tnt))
        targets.push_back(t);
    std::vector<std::pair<double, const geo::SceneObject *>> blocks;
    for (const auto *b : of_kind(scene, ObjectKind::block)) {
        double d = std::numeric_limits<double>::infinity();
        for (const auto *pig : pigs)
            d = std::min(d, (target_point(*b) - target_point(*pig)).length());
        blocks.emplace_back(d, b);
    }
    std::stable_sort(blocks.begin(), blocks.end(), [](const auto &a, const auto &b) { return a.first < b.first; });
    for (const auto &[_, b] : blocks)
        targets.push_back(b);
    if (targets.size() > static_cast<std::size_t>(params.targets))
        targets.resize(static_cast<std::size_t>(params.targets));

    const BirdType bird = bird_of(percept);
    const double f = tap_fraction(bird);
    std::vector<double> fractions{0.0};
    if (ability_of(bird) != Ability::none) {
        fractions = {f, f - 0.15, std::min(f + 0.08, 0.99)};
        fractions.resize(static_cast<std::size_t>(std::clamp(params.tap_variants, 1, 3)));
    }

    std::vector<Shot> grid;
    for (const auto *t : targets) {
        for (const auto &aim : aims_at(target_point(*t), percept, env, scene)) {
            for (double frac : fractions) {
                Shot s;
                s.angle = aim.angle;
                s.tap_ms = static_cast<int>(std::llround(frac * aim.flight_time * 1000.0));
                s.rationale = "simulation";
                grid.push_back(std::move(s));
            }
        }
    }
    return grid;
}

std::vector<SimCandidate> evaluate_grid(const proto::Percept &percept,
                                        const EnvInfo &env,
                                        const std::vector<Shot> &grid,
                                        const SimulationParams &params)
{
    const phys::World base = reconstruct_world(percept, env);
    std::vector<SimCandidate> results(grid.size());
    const auto run = [&](std::size_t i) {
        phys::World w = base;
        SimCandidate &r = results[i];
        r.shot = grid[i];
        if (w.birds_queue().empty())
            return;
        const auto outcome = phys::simulate_shot(w, grid[i].command(), params.settle);
        const auto events = w.events().subspan(outcome.first_event);
        for (const auto &e : events) {
            if (e.kind == phys::EventKind::pig_killed)
                ++r.pigs_killed;
            else if (e.kind == phys::EventKind::destroyed || e.kind == phys::EventKind::tnt_detonated)
                ++r.destroyed;
        }
    };
    unsigned threads = params.threads ? params.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(grid.size()));
    if (threads <= 1) {
        for (std::size_t i = 0; i < grid.size(); ++i)
            run(i);
        return results;
    }
    std::atomic<std::size_t> next{0};
    {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t)
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < grid.size(); i = next++)
                    run(i);
            });
    }
    return results;
}

std::size_t best_candidate(const std::vector<SimCandidate> &results)
{
    std::size_t best = 0;
    for (std::size_t i = 1; i < results.size(); ++i) {
        const auto &a = results[i];
        const auto &b = results[best];
        if (std::tuple(a.pigs_killed, a.destroyed) > std::tuple(b.pigs_killed, b.destroyed))
            best = i;
    }
    return best;
}

Shot SimulationAgent::select(const proto::Percept &percept, const EnvInfo &env)
{
    const auto grid = simulation_grid(percept, env, params_);
    if (grid.empty())
        return fallback_shot(percept, env, proto::percept_scene(percept, env.map));
    const auto results = evaluate_grid(percept, env, grid, params_);
    return results[best_candidate(results)].shot;
}

std::unique_ptr<Agent> make_agent(std::string_view kind, std::uint64_t seed)
{
    if (kind == "naive")
        return std::make_unique<NaiveAgent>(seed);
    if (kind == "blocking")
        return std::make_unique<BlockingAgent>();
    if (kind == "strategy")
        return std::make_unique<StrategyAgent>();
    if (kind == "simulation")
        return std::make_unique<SimulationAgent>();
    throw std::invalid_argument("unknown agent kind: " + std::string(kind));
}

} // namespace birdbench::agents
