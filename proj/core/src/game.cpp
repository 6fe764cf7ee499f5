// SPDX-License-Identifier: Apache-2.0
#include "birdbench/game.hpp"

namespace birdbench::proto {

GameInstance::GameInstance(level::Level level, phys::PhysicsConfig config, phys::SettleParams settle)
    : level_(std::move(level)), config_(config), settle_(settle), world_(level::build_world(level_, config_))
{
}

LevelState GameInstance::state() const
{
    if (world_.solved())
        return LevelState::solved;
    if (world_.birds_queue().empty())
        return LevelState::lost;
    return LevelState::playing;
}

level::AttemptScore GameInstance::score() const
{
    return level::score_attempt(world_.events(), static_cast<int>(world_.birds_queue().size()), world_.solved());
}

ShotResult GameInstance::shoot(const phys::ShotCommand &shot)
{
    if (world_.solved())
        throw phys::IllegalActionError("level already solved");
    const long before = score().total;
    const auto outcome = phys::simulate_shot(world_, shot, settle_);
    ShotResult r;
    r.score = score();
    r.score_delta = r.score.total - before;
    r.state = state();
    r.sim_seconds = outcome.sim_seconds;
    r.tapped = outcome.tapped;
    return r;
}

void GameInstance::restart() { world_ = level::build_world(level_, config_); }

Percept GameInstance::percept(const ScreenMap &map, double time_left, int level_index) const
{
    return snapshot_percept(world_, map, state(), score().total, time_left, level_index);
}

} // namespace birdbench::proto
