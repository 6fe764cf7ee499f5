// SPDX-License-Identifier: Apache-2.0
#include "birdbench/validate.hpp"

#include "birdbench/game.hpp"

#include <cmath>
#include <map>

namespace birdbench::level {

ValidationReport validate_stability(const Level &level, double t_sim, double eps, const phys::PhysicsConfig &config)
{
    phys::World world = build_world(level, config);
    std::map<ObjectId, Vec2> start;
    std::map<ObjectId, Vec2> last;
    for (const auto &b : world.bodies())
        if (!b.is_static())
            start[b.id] = last[b.id] = b.position;

    const auto steps = static_cast<long>(std::llround(t_sim / config.dt));
    for (long i = 0; i < steps; ++i) {
        world.step();
        for (const auto &b : world.bodies())
            if (!b.is_static())
                last[b.id] = b.position;
    }

    ValidationReport r;
    for (const auto &[id, p0] : start)
        r.max_drift = std::max(r.max_drift, (last[id] - p0).length());
    const bool intact = world.events().empty();
    r.stable = intact && r.max_drift < eps;
    return r;
}

ValidationReport validate_solvability(const Level &level,
                                      agents::Agent &probe,
                                      int attempt_budget,
                                      const phys::PhysicsConfig &config,
                                      const phys::SettleParams &settle)
{
    ValidationReport r;
    r.solvable = false;
    const agents::EnvInfo env{config.v_max, config.gravity, proto::ScreenMap::for_world(config.world_size)};
    for (int attempt = 0; attempt < attempt_budget; ++attempt) {
        ++r.probe_attempts;
        proto::GameInstance game(level, config, settle);
        std::vector<phys::ShotCommand> shots;
        while (game.state() == proto::LevelState::playing) {
            const auto shot = probe.select(game.percept(env.map, 0.0, 0), env).command();
            game.shoot(shot);
            shots.push_back(shot);
            ++r.probe_shots;
        }
        if (game.state() == proto::LevelState::solved) {
            r.solvable = true;
            r.solving_shots = std::move(shots);
            break;
        }
    }
    return r;
}

} // namespace birdbench::level
