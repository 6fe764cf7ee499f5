// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "birdbench/types.hpp"

#include <array>
#include <optional>
#include <set>
#include <span>
#include <variant>
#include <vector>

namespace birdbench::geo {

struct Circle
{
    double radius{0.0};
    bool operator==(const Circle &) const = default;
};

struct Box
{
    double width{0.0};
    double height{0.0};
    bool operator==(const Box &) const = default;
};

// Convex polygon, vertices relative to the object's reference point.
struct Polygon
{
    std::vector<Vec2> vertices;
    bool operator==(const Polygon &) const = default;
};

// Rectangular frame; collides as its four wall rectangles.
struct HollowBox
{
    double width{0.0};
    double height{0.0};
    double wall{0.0};
    bool operator==(const HollowBox &) const = default;
};

using Shape = std::variant<Circle, Box, Polygon, HollowBox>;

std::string_view shape_tag(const Shape &shape);

inline constexpr std::size_t kMaxPolygonVertices = 8;

struct Aabb
{
    Vec2 min;
    Vec2 max;

    double width() const { return max.x - min.x; }
    double height() const { return max.y - min.y; }
    Vec2 center() const { return (min + max) * 0.5; }
    bool overlaps(const Aabb &o) const
    {
        return min.x <= o.max.x && o.min.x <= max.x && min.y <= o.max.y && o.min.y <= max.y;
    }
    void merge(const Aabb &o);
};

// A circle or convex polygon piece of a shape. Polygon vertices are CCW with
// outward edge normals; normals[i] belongs to edge (i, i+1).
struct ConvexPart
{
    bool is_circle{false};
    Vec2 center;
    double radius{0.0};
    std::array<Vec2, kMaxPolygonVertices> vertices{};
    std::array<Vec2, kMaxPolygonVertices> normals{};
    std::size_t count{0};

    static ConvexPart circle(Vec2 center, double radius);
    static ConvexPart polygon(std::span<const Vec2> ccw_vertices);
    static ConvexPart box(Vec2 center, double width, double height);

    ConvexPart transformed(Vec2 position, double angle) const;
    ConvexPart translated(Vec2 offset) const;
    Aabb bounds() const;
    double area() const;
    Vec2 centroid() const;
    // Second moment of area about the origin of the part's frame.
    double polar_moment_about_origin() const;
};

/// Splits a shape into convex parts expressed in the shape's reference frame.
/// Throws DomainError for degenerate or non-convex input.
std::vector<ConvexPart> decompose(const Shape &shape);

/// Puts polygon vertices in CCW order; throws DomainError unless they form a
/// strictly convex polygon with 3..8 vertices.
std::vector<Vec2> canonical_polygon(std::vector<Vec2> vertices);

// ---------------------------------------------------------------- trajectories

struct TrajectorySolution
{
    double low_angle{0.0};
    double high_angle{0.0};
    bool reachable{false};
};

/// Launch angles whose ideal parabola from the origin passes through `target`.
/// tan(theta) = (v^2 -/+ sqrt(v^4 - g(g x^2 + 2 y v^2))) / (g x).
/// Throws DomainError when target.x <= 0 or speed/gravity are not positive.
TrajectorySolution solve_launch_angles(double launch_speed, double gravity, Vec2 target);

/// Angle at which the two roots merge: the best attempt at an unreachable target.
double boundary_launch_angle(double launch_speed, double gravity, Vec2 target);

/// Height of the ideal parabola at horizontal distance x.
double parabola_height(double angle, double launch_speed, double gravity, double x);

/// Time for the ideal parabola to cover horizontal distance x.
double time_to_x(double angle, double launch_speed, double x);

/// Arc length of the ideal parabola from the origin up to horizontal distance x.
double arc_length_to_x(double angle, double launch_speed, double gravity, double x);

struct Polyline
{
    std::vector<Vec2> points;
    double dt_sample{0.0};
};

inline constexpr double kDefaultSampleDt = 1.0 / 120.0;

/// points[k] = origin + (v cos(a) k dt, v sin(a) k dt - g (k dt)^2 / 2), up to
/// t_max. When floor_y is given, sampling stops after the first point below it.
Polyline sample_trajectory(double angle,
                           double launch_speed,
                           double gravity,
                           double dt_sample,
                           double t_max,
                           Vec2 origin = {},
                           std::optional<double> floor_y = std::nullopt);

// --------------------------------------------------------------- scene queries

struct SceneObject
{
    ObjectId id{};
    ObjectKind kind{ObjectKind::block};
    Material material{Material::none};
    Shape shape;
    Vec2 position; // reference point (box/hollow/circle centre, polygon origin)
    double angle{0.0};
};

std::vector<ConvexPart> world_parts(const SceneObject &object);
Aabb bounds(const SceneObject &object);

struct Obstruction
{
    ObjectId id{};
    Vec2 point;
    std::size_t segment{0};
    double t{0.0}; // parameter along the segment, in [0, 1]
};

/// First object (other than `target`) hit by the path, ordered by segment
/// index, then entry parameter, then id. Throws DomainError when `target` is
/// given but absent from the scene, or when the path has fewer than 2 points.
std::optional<Obstruction> first_obstruction(const Polyline &path,
                                             std::span<const SceneObject> scene,
                                             std::optional<ObjectId> target = std::nullopt);

/// Every object the path enters, each once, in the same order as
/// first_obstruction.
std::vector<Obstruction> all_obstructions(const Polyline &path,
                                          std::span<const SceneObject> scene,
                                          std::optional<ObjectId> target = std::nullopt);

/// Entry parameter in [0,1] of segment a->b into a convex part, if any.
std::optional<double> segment_entry(Vec2 a, Vec2 b, const ConvexPart &part);

/// Fraction of the smaller height used as the resting-contact tolerance.
inline constexpr double kSupportTolerance = 0.02;

/// Objects directly beneath `block` in resting contact: their top lies within
/// tolerance of the block's bottom and they overlap it horizontally. Terrain
/// segments are returned under their own ids. Throws DomainError for an
/// unknown id.
std::set<ObjectId> find_supporters(ObjectId block, std::span<const SceneObject> scene);

const SceneObject *find_object(std::span<const SceneObject> scene, ObjectId id);

} // namespace birdbench::geo
