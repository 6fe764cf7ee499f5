// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "birdbench/level.hpp"
#include "birdbench/percept.hpp"
#include "birdbench/physics.hpp"

namespace birdbench::proto {

struct ShotResult
{
    level::AttemptScore score; // cumulative for the current attempt
    long score_delta{0};
    LevelState state{LevelState::playing};
    double sim_seconds{0.0};
    bool tapped{false};
};

/// One attempt at one level: the world plus its scoring state.
class GameInstance
{
public:
    explicit GameInstance(level::Level level,
                          phys::PhysicsConfig config = {},
                          phys::SettleParams settle = {});

    const level::Level &level() const { return level_; }
    const phys::World &world() const { return world_; }
    const phys::PhysicsConfig &config() const { return config_; }

    LevelState state() const;
    level::AttemptScore score() const;

    /// Throws phys::OutOfBirdsError when the attempt is lost and
    /// phys::IllegalActionError when the level is already solved.
    ShotResult shoot(const phys::ShotCommand &shot);
    void restart();

    Percept percept(const ScreenMap &map, double time_left, int level_index) const;

private:
    level::Level level_;
    phys::PhysicsConfig config_;
    phys::SettleParams settle_;
    phys::World world_;
};

} // namespace birdbench::proto
