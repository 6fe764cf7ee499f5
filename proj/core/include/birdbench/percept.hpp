// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "birdbench/geometry.hpp"
#include "birdbench/physics.hpp"
#include "birdbench/types.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace birdbench::proto {

/// Fixed affine map between world units (y up) and screen pixels (y down).
struct ScreenMap
{
    double scale{10.0};
    int width{840};
    int height{480};

    static ScreenMap for_world(Vec2 world_size, int width = 840, int height = 480);

    Vec2 to_screen(Vec2 w) const { return {w.x * scale, height - w.y * scale}; }
    Vec2 to_world(Vec2 s) const { return {s.x / scale, (height - s.y) / scale}; }
    bool operator==(const ScreenMap &) const = default;
};

enum class LevelState : std::uint8_t { playing, solved, lost };
std::string_view to_string(LevelState s);
std::optional<LevelState> parse_level_state(std::string_view s);

/// One recognised object. Bounds are integer pixels [x0, y0, x1, y1] with
/// y0 the top edge. The shape carries pixel dimensions in the object's own
/// frame (y up); centre is the shape's reference point in screen pixels and
/// angle is counter-clockwise degrees. Continuous values are quantised to
/// a tenth of a pixel / degree.
struct PerceptObject
{
    ObjectId id{};
    ObjectKind kind{ObjectKind::block};
    Material material{Material::none};
    std::array<int, 4> bounds{};
    geo::Shape shape;
    Vec2 center;
    double angle_deg{0.0};
    bool operator==(const PerceptObject &) const = default;
};

struct Percept
{
    int level{0};
    std::vector<PerceptObject> objects; // ascending id
    std::optional<BirdType> current_bird;
    std::vector<BirdType> birds_remaining; // current bird first
    LevelState state{LevelState::playing};
    long current_score{0};
    double time_left{0.0};
    Vec2 slingshot; // screen pixels

    bool operator==(const Percept &) const = default;
};

/// Pixel tolerance before a bound is rounded outward, so geometry that sits
/// on pixel boundaries maps to those boundaries exactly.
inline constexpr double kBoundsSnap = 0.05;

std::array<int, 4> screen_bounds(const geo::Aabb &world_box, const ScreenMap &map);

/// Object list of the living non-bird bodies (terrain included).
Percept snapshot_percept(const phys::World &world,
                         const ScreenMap &map,
                         LevelState state,
                         long current_score,
                         double time_left,
                         int level_index);

std::string percept_to_json(const Percept &p);
/// Throws std::invalid_argument for documents that do not describe a percept.
Percept percept_from_json(std::string_view document);

/// Inverse of the snapshot: a scene in world units.
std::vector<geo::SceneObject> percept_scene(const Percept &p, const ScreenMap &map);

} // namespace birdbench::proto
