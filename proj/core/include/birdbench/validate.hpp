// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "birdbench/agents.hpp"
#include "birdbench/level.hpp"
#include "birdbench/physics.hpp"

#include <optional>
#include <vector>

namespace birdbench::level {

struct ValidationReport
{
    bool stable{false};
    double max_drift{0.0};
    std::optional<bool> solvable; // true only with a recorded solving sequence
    int probe_shots{0};
    int probe_attempts{0};
    std::vector<phys::ShotCommand> solving_shots;
};

/// Simulates the level without a shot for t_sim seconds; stable iff every
/// object ends less than eps from where it started and nothing is destroyed.
ValidationReport validate_stability(const Level &level,
                                    double t_sim = 5.0,
                                    double eps = 0.1,
                                    const phys::PhysicsConfig &config = {});

/// Plays up to `attempt_budget` full attempts with the probe agent. A false
/// result only means "not proven solvable".
ValidationReport validate_solvability(const Level &level,
                                      agents::Agent &probe,
                                      int attempt_budget,
                                      const phys::PhysicsConfig &config = {},
                                      const phys::SettleParams &settle = {});

} // namespace birdbench::level
