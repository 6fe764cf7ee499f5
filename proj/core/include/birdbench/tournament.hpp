// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "birdbench/agents.hpp"
#include "birdbench/level.hpp"
#include "birdbench/server.hpp"

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace birdbench::tourney {

enum class StageKind : std::uint8_t { qualification, quarterfinal, semifinal, grandfinal, benchmark, mvm };
std::string_view to_string(StageKind k);
std::optional<StageKind> parse_stage_kind(std::string_view s);

struct Stage
{
    StageKind kind{StageKind::qualification};
    std::string name;
    std::vector<std::vector<std::string>> groups;
    std::vector<std::string> level_ids;
    double budget_s{1800.0};
    proto::Visibility visibility{proto::Visibility::global};
    bool complete{false};
};

/// Stage with the competition defaults for its kind: 1800 s (600 s for mvm),
/// group visibility for quarter-finals only. Throws std::invalid_argument
/// when the groups do not fit the kind.
Stage make_stage(StageKind kind, std::vector<std::vector<std::string>> groups, std::vector<std::string> level_ids = {});

class StageError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

// ------------------------------------------------------------ scoring

struct AttemptRecord
{
    std::string agent;
    int level{0};
    long total{0};
    bool solved{false};
};

/// Per level: max total over solved attempts, 0 when never solved.
std::vector<long> per_level_best(std::span<const AttemptRecord> history, const std::string &agent, int levels);
long combined_score(std::span<const AttemptRecord> history, const std::string &agent, int levels);

struct Standing
{
    std::string agent;
    long combined{0};
    std::vector<long> levels; // per-level bests in level order
};

/// Total order: higher combined score; then the higher single-level score at
/// the earliest level where the two differ; then agent id.
bool ranks_before(const Standing &a, const Standing &b);

struct Leaderboard
{
    std::string stage;
    std::string group;
    std::vector<Standing> ranking;
    std::vector<std::string> tie_breaks; // human-readable log of resolved ties

    std::string to_json() const;
};

Leaderboard make_leaderboard(std::string stage, std::string group, std::vector<Standing> standings);
Standing standing_of(const std::string &agent, std::vector<long> levels);

struct Advancement
{
    std::vector<std::string> selected; // qualified agents, or the champion
    std::optional<Stage> next;
    std::vector<std::string> tie_breaks;
};

/// Moves a completed stage forward. Qualification seeds quarter-final groups
/// by snake order; quarter-finals send the global top four on; semi-finals
/// the top two; the grand final yields the champion. Throws StageError when
/// the stage is not complete.
Advancement advance(const Stage &stage, std::span<const Leaderboard> boards);

/// Snake seeding of ranked agents into ceil(n/4) groups.
std::vector<std::vector<std::string>> snake_groups(const std::vector<std::string> &ranked);

// ------------------------------------------------------------ running

using AgentFactory = std::function<std::unique_ptr<agents::Agent>()>;

struct Entrant
{
    std::string id;
    AgentFactory factory; // returning null or throwing counts as a failed connection
    std::string selector{"round_robin"}; // or "weighted"
    std::uint64_t seed{0};
};

struct StageRunOptions
{
    std::vector<level::Level> levels; // the stage's levels, in order
    double time_scale{1.0};
    proto::ClockMode clock{proto::ClockMode::game};
    int max_attempts{-1}; // per agent; negative: until the budget runs out
    std::optional<std::filesystem::path> run_dir; // persists <run_dir>/<stage>/...
    phys::PhysicsConfig physics{};
    phys::SettleParams settle{};
};

struct StageResult
{
    Stage stage;
    std::vector<Leaderboard> boards; // one per group
    std::vector<proto::ActionRecord> actions; // ordered by (agent, index)
    std::vector<std::string> failed; // agents that never connected
};

StageResult run_stage(Stage stage, std::span<const Entrant> entrants, const StageRunOptions &options);

/// Attempt records implied by the SHOOT actions of a log.
std::vector<AttemptRecord> attempts_of(std::span<const proto::ActionRecord> actions);

/// Re-executes a persisted action log and rebuilds the leaderboards.
std::vector<Leaderboard> replay_stage(const Stage &stage,
                                      std::span<const proto::ActionRecord> actions,
                                      const std::vector<level::Level> &levels,
                                      const phys::PhysicsConfig &physics = {},
                                      const phys::SettleParams &settle = {});

std::string actions_to_jsonl(std::span<const proto::ActionRecord> actions);
std::vector<proto::ActionRecord> actions_from_jsonl(std::string_view text);

struct BenchmarkResult
{
    std::vector<long> levels;
    long total{0};
};

BenchmarkResult benchmark(const Entrant &agent,
                          const std::vector<level::Level> &levels,
                          double budget_s,
                          const StageRunOptions &options = {});

struct MvmRow
{
    std::string name;
    bool human{false};
    long score{0};
};

/// Agents and humans ranked together on the same levels (score descending,
/// then name).
std::vector<MvmRow> mvm_compare(const Leaderboard &agents, const std::vector<std::pair<std::string, long>> &humans);

// ------------------------------------------------------------ configuration

struct AgentSpec
{
    std::string id;
    std::string kind;
    std::uint64_t seed{0};
    std::string selector{"round_robin"};
};

struct StageSpec
{
    StageKind kind{StageKind::qualification};
    std::vector<std::string> levels;
    std::optional<double> budget_s;
};

struct TournamentConfig
{
    std::filesystem::path levels_dir{"levels"};
    std::filesystem::path run_dir{"runs"};
    double time_scale{1.0};
    proto::ClockMode clock{proto::ClockMode::game};
    int max_attempts{-1};
    std::vector<AgentSpec> agents;
    std::vector<StageSpec> stages;
};

/// Throws std::invalid_argument on a malformed document.
TournamentConfig parse_tournament_config(std::string_view document, const std::filesystem::path &base_dir = {});

struct TournamentReport
{
    std::vector<StageResult> stages;
    std::optional<std::string> champion;
};

TournamentReport run_tournament(const TournamentConfig &config, std::ostream *log = nullptr);

} // namespace birdbench::tourney
