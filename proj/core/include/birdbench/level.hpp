// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "birdbench/geometry.hpp"
#include "birdbench/physics.hpp"
#include "birdbench/types.hpp"

#include <filesystem>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace birdbench::level {

struct TerrainSegment
{
    double x0{0.0};
    double x1{0.0};
    double h{0.0};
    bool operator==(const TerrainSegment &) const = default;
};

// Terrain segments are solid from this depth up to their height.
inline constexpr double kTerrainFloor = -5.0;

struct ObjectSpec
{
    ObjectKind kind{ObjectKind::block};
    Material material{Material::none};
    geo::Shape shape;
    Vec2 position;
    double rotation_deg{0.0};
    bool operator==(const ObjectSpec &) const = default;
};

struct Level
{
    std::string id;
    Vec2 slingshot;
    std::vector<BirdType> birds;
    std::vector<TerrainSegment> terrain;
    std::vector<ObjectSpec> objects;
    std::map<std::string, std::string> metadata;

    int pig_count() const;
    bool operator==(const Level &) const = default;
};

class LevelError : public std::runtime_error
{
public:
    enum class Kind { parse, schema, disallowed };

    LevelError(Kind kind, std::string field, const std::string &message)
        : std::runtime_error(message), kind_(kind), field_(std::move(field))
    {
    }

    Kind kind() const { return kind_; }
    // JSON path of the offending field, e.g. "objects[3].shape.type".
    const std::string &field() const { return field_; }

private:
    Kind kind_;
    std::string field_;
};

/// Parses and validates one level document. Throws LevelError.
Level load_level(std::string_view document);
Level load_level_file(const std::filesystem::path &path);
/// Every *.json file of a directory, ordered by file name.
std::vector<Level> load_pack(const std::filesystem::path &dir);
std::string serialize_level(const Level &level);

/// Builds a fresh world: terrain segments first, then objects in file order,
/// so body ids follow document order.
phys::World build_world(const Level &level, const phys::PhysicsConfig &config = {}, std::uint64_t seed = 0);
ObjectId object_body_id(const Level &level, std::size_t object_index);

// ------------------------------------------------------------------ scoring

struct ScoringRules
{
    long pig{5000};
    long destroyed_block{500};
    long damaged_block{200};
    long tnt{1000};
    long bird_bonus{10000};
};

struct AttemptScore
{
    long damage_points{0};
    int pigs_killed{0};
    int birds_remaining{0};
    bool solved{false};
    long total{0};
    bool operator==(const AttemptScore &) const = default;
};

AttemptScore score_attempt(std::span<const phys::DamageEvent> events,
                           int birds_remaining,
                           bool solved,
                           const ScoringRules &rules = {});

} // namespace birdbench::level
