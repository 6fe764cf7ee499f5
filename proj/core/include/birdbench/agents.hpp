// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "birdbench/geometry.hpp"
#include "birdbench/percept.hpp"
#include "birdbench/physics.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace birdbench::agents {

/// What the server tells an agent about the game at HELLO time.
struct EnvInfo
{
    double v_max{28.0};
    double gravity{9.8};
    proto::ScreenMap map{};

    Vec2 world_size() const { return {map.width / map.scale, map.height / map.scale}; }
};

struct Shot
{
    double angle{0.0}; // radians, in [0, pi/2)
    double speed_fraction{1.0};
    int tap_ms{0};
    std::string rationale;

    phys::ShotCommand command() const { return {angle, speed_fraction, tap_ms}; }
};

class Agent
{
public:
    virtual ~Agent() = default;
    virtual std::string_view name() const = 0;
    virtual Shot select(const proto::Percept &percept, const EnvInfo &env) = 0;
};

// ---------------------------------------------------------------- tap policy

enum class TapPolicy { total_length, first_obstacle };

/// Fraction of the relevant flight time at which each bird is tapped.
double tap_fraction(BirdType bird);

/// `time_s` is the whole trajectory time for the total-length policy and the
/// time to the first obstacle for the first-obstacle policy. The white bird
/// always behaves as total-length; callers pass its full flight time.
int tap_policy(BirdType bird, double time_s, TapPolicy policy);

// ---------------------------------------------------------------- aiming

struct Aim
{
    double angle{0.0};
    bool high{false};
    double flight_time{0.0};
    geo::Polyline path; // from the launch point to the target point
};

/// World-unit launch point of a percept.
Vec2 launch_point(const proto::Percept &p, const EnvInfo &env);
/// Centre of an object's bounding box in world units.
Vec2 target_point(const geo::SceneObject &o);

/// Usable branches towards `target`, low first: the target must be reachable,
/// the angle within [0, pi/2), the apex below the top of the world, and the
/// path clear of terrain.
std::vector<Aim> aims_at(Vec2 target,
                         const proto::Percept &p,
                         const EnvInfo &env,
                         std::span<const geo::SceneObject> scene);

// ---------------------------------------------------------------- agents

/// Random pig, random branch; portable draws (raw mt19937 output modulo n).
class NaiveAgent : public Agent
{
public:
    explicit NaiveAgent(std::uint64_t seed) : rng_(static_cast<std::mt19937::result_type>(seed)) {}
    std::string_view name() const override { return "naive"; }
    Shot select(const proto::Percept &percept, const EnvInfo &env) override;

private:
    std::mt19937 rng_;
};

/// Penalty of one block of material `m` on the path of `bird`.
double blocking_penalty(std::optional<BirdType> bird, Material m, const phys::PhysicsConfig &config = {});

struct BlockingChoice
{
    ObjectId target{};
    bool high{false};
    double penalty{0.0};
    std::map<Material, int> counts;
    Shot shot;
};

/// Every scored (target, branch) pair, in evaluation order.
std::vector<BlockingChoice> blocking_candidates(const proto::Percept &percept, const EnvInfo &env);

class BlockingAgent : public Agent
{
public:
    std::string_view name() const override { return "blocking"; }
    Shot select(const proto::Percept &percept, const EnvInfo &env) override;
};

enum class Strategy : std::uint8_t { multi_pig, tnt, support_collapse, high_round, pigshooter, fallback };
std::string_view to_string(Strategy s);

struct StrategyWeights
{
    double per_pig_on_path{1.0};
    double tnt_per_pig{0.9};
    double tnt_per_stone{0.1};
    double tnt_per_tnt{0.2};
    double support_per_pig{0.8};
    double support_stone_factor{0.3};
    double round_per_pig{0.6};
    double pigshooter{1.0};
    double near_pig_radius{2.0}; // horizontal reach for "above or near a pig"
    double round_reach{6.0};
};

struct StrategyScore
{
    Strategy strategy{Strategy::pigshooter};
    ObjectId target{};
    Shot shot;
    double utility{0.0};
};

/// Candidates of the five generators; only clear paths are produced.
std::vector<StrategyScore> strategy_candidates(const proto::Percept &percept,
                                               const EnvInfo &env,
                                               const StrategyWeights &w = {});

class StrategyAgent : public Agent
{
public:
    explicit StrategyAgent(StrategyWeights w = {}) : weights_(w) {}
    std::string_view name() const override { return "strategy"; }
    Shot select(const proto::Percept &percept, const EnvInfo &env) override;

private:
    StrategyWeights weights_;
};

/// Rebuilds a world from a percept by inverting the screen map.
phys::World reconstruct_world(const proto::Percept &percept,
                              const EnvInfo &env,
                              const phys::PhysicsConfig &base = {});

struct SimulationParams
{
    int targets{20};
    int tap_variants{3};
    phys::SettleParams settle{0.05, 30, 6.0};
    unsigned threads{0}; // 0: hardware concurrency
};

struct SimCandidate
{
    Shot shot;
    ObjectId target{};
    int pigs_killed{0};
    int destroyed{0};
};

/// Deterministic candidate grid (targets x branches x tap times).
std::vector<Shot> simulation_grid(const proto::Percept &percept, const EnvInfo &env, const SimulationParams &params);
/// Simulates every grid shot, possibly concurrently; results in grid order.
std::vector<SimCandidate> evaluate_grid(const proto::Percept &percept,
                                        const EnvInfo &env,
                                        const std::vector<Shot> &grid,
                                        const SimulationParams &params);
/// Order-independent argmax: most pigs, then most objects destroyed, then
/// lowest grid index.
std::size_t best_candidate(const std::vector<SimCandidate> &results);

class SimulationAgent : public Agent
{
public:
    explicit SimulationAgent(SimulationParams p = {}) : params_(p) {}
    std::string_view name() const override { return "simulation"; }
    Shot select(const proto::Percept &percept, const EnvInfo &env) override;

private:
    SimulationParams params_;
};

/// Factory for the CLI kinds naive|blocking|strategy|simulation.
std::unique_ptr<Agent> make_agent(std::string_view kind, std::uint64_t seed);

} // namespace birdbench::agents
