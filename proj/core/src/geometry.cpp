// SPDX-License-Identifier: Apache-2.0
#include "birdbench/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

namespace birdbench::geo {

namespace {

template <class... Ts>
struct overloaded : Ts...
{
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_positive(double v, const char *what)
{
    if (!(v > 0.0) || !std::isfinite(v))
        throw DomainError(std::string(what) + " must be positive and finite");
}

} // namespace

std::string_view shape_tag(const Shape &shape)
{
    return std::visit(overloaded{
                          [](const Circle &) { return std::string_view{"circle"}; },
                          [](const Box &) { return std::string_view{"box"}; },
                          [](const Polygon &) { return std::string_view{"polygon"}; },
                          [](const HollowBox &) { return std::string_view{"hollow"}; },
                      },
                      shape);
}

void Aabb::merge(const Aabb &o)
{
    min.x = std::min(min.x, o.min.x);
    min.y = std::min(min.y, o.min.y);
    max.x = std::max(max.x, o.max.x);
    max.y = std::max(max.y, o.max.y);
}

// ------------------------------------------------------------------ ConvexPart

ConvexPart ConvexPart::circle(Vec2 center, double radius)
{
    ConvexPart p;
    p.is_circle = true;
    p.center = center;
    p.radius = radius;
    return p;
}

ConvexPart ConvexPart::polygon(std::span<const Vec2> ccw_vertices)
{
    ConvexPart p;
    p.count = ccw_vertices.size();
    Vec2 sum;
    for (std::size_t i = 0; i < p.count; ++i) {
        p.vertices[i] = ccw_vertices[i];
        sum += ccw_vertices[i];
    }
    for (std::size_t i = 0; i < p.count; ++i) {
        const Vec2 edge = p.vertices[(i + 1) % p.count] - p.vertices[i];
        p.normals[i] = normalized(perp_right(edge));
    }
    p.center = sum / static_cast<double>(p.count);
    return p;
}

ConvexPart ConvexPart::box(Vec2 center, double width, double height)
{
    const double hw = width * 0.5;
    const double hh = height * 0.5;
    const std::array<Vec2, 4> v{
        Vec2{center.x - hw, center.y - hh},
        Vec2{center.x + hw, center.y - hh},
        Vec2{center.x + hw, center.y + hh},
        Vec2{center.x - hw, center.y + hh},
    };
    return polygon(v);
}

ConvexPart ConvexPart::transformed(Vec2 position, double angle) const
{
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    auto xf = [&](Vec2 v) { return Vec2{c * v.x - s * v.y + position.x, s * v.x + c * v.y + position.y}; };
    auto rot = [&](Vec2 v) { return Vec2{c * v.x - s * v.y, s * v.x + c * v.y}; };
    ConvexPart out = *this;
    out.center = xf(center);
    for (std::size_t i = 0; i < count; ++i) {
        out.vertices[i] = xf(vertices[i]);
        out.normals[i] = rot(normals[i]);
    }
    return out;
}

ConvexPart ConvexPart::translated(Vec2 offset) const
{
    ConvexPart out = *this;
    out.center += offset;
    for (std::size_t i = 0; i < count; ++i)
        out.vertices[i] += offset;
    return out;
}

Aabb ConvexPart::bounds() const
{
    if (is_circle)
        return {{center.x - radius, center.y - radius}, {center.x + radius, center.y + radius}};
    Aabb b{vertices[0], vertices[0]};
    for (std::size_t i = 1; i < count; ++i)
        b.merge({vertices[i], vertices[i]});
    return b;
}

double ConvexPart::area() const
{
    if (is_circle)
        return kPi * radius * radius;
    double a = 0.0;
    for (std::size_t i = 0; i < count; ++i)
        a += cross(vertices[i], vertices[(i + 1) % count]);
    return 0.5 * a;
}

Vec2 ConvexPart::centroid() const
{
    if (is_circle)
        return center;
    // Relative to the first vertex for better conditioning.
    const Vec2 ref = vertices[0];
    Vec2 c;
    double area2 = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        const Vec2 e1 = vertices[i] - ref;
        const Vec2 e2 = vertices[(i + 1) % count] - ref;
        const double d = cross(e1, e2);
        area2 += d;
        c += (e1 + e2) * d;
    }
    return ref + c / (3.0 * area2);
}

double ConvexPart::polar_moment_about_origin() const
{
    if (is_circle) {
        const double a = area();
        return a * (0.5 * radius * radius + center.length_squared());
    }
    double j = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        const Vec2 p1 = vertices[i];
        const Vec2 p2 = vertices[(i + 1) % count];
        const double d = cross(p1, p2);
        j += d * (dot(p1, p1) + dot(p1, p2) + dot(p2, p2));
    }
    return j / 12.0;
}

std::vector<Vec2> canonical_polygon(std::vector<Vec2> v)
{
    if (v.size() < 3 || v.size() > kMaxPolygonVertices)
        throw DomainError("polygon needs 3.." + std::to_string(kMaxPolygonVertices) + " vertices");
    double area2 = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i)
        area2 += cross(v[i], v[(i + 1) % v.size()]);
    if (std::abs(area2) < 1e-9)
        throw DomainError("degenerate polygon");
    if (area2 < 0.0)
        std::reverse(v.begin(), v.end());
    for (std::size_t i = 0; i < v.size(); ++i) {
        const Vec2 a = v[i];
        const Vec2 b = v[(i + 1) % v.size()];
        const Vec2 c = v[(i + 2) % v.size()];
        if (cross(b - a, c - b) <= 1e-12)
            throw DomainError("polygon is not strictly convex");
    }
    return v;
}

std::vector<ConvexPart> decompose(const Shape &shape)
{
    return std::visit(
        overloaded{
            [](const Circle &c) -> std::vector<ConvexPart> {
                require_positive(c.radius, "circle radius");
                return {ConvexPart::circle({}, c.radius)};
            },
            [](const Box &b) -> std::vector<ConvexPart> {
                require_positive(b.width, "box width");
                require_positive(b.height, "box height");
                return {ConvexPart::box({}, b.width, b.height)};
            },
            [](const Polygon &p) -> std::vector<ConvexPart> {
                const auto v = canonical_polygon(p.vertices);
                return {ConvexPart::polygon(v)};
            },
            [](const HollowBox &h) -> std::vector<ConvexPart> {
                require_positive(h.width, "hollow width");
                require_positive(h.height, "hollow height");
                require_positive(h.wall, "hollow wall");
                if (2.0 * h.wall >= std::min(h.width, h.height))
                    throw DomainError("hollow wall too thick for its box");
                const double hw = h.width * 0.5;
                const double hh = h.height * 0.5;
                const double inner_h = h.height - 2.0 * h.wall;
                return {
                    ConvexPart::box({0.0, -hh + h.wall * 0.5}, h.width, h.wall),
                    ConvexPart::box({hw - h.wall * 0.5, 0.0}, h.wall, inner_h),
                    ConvexPart::box({0.0, hh - h.wall * 0.5}, h.width, h.wall),
                    ConvexPart::box({-hw + h.wall * 0.5, 0.0}, h.wall, inner_h),
                };
            },
        },
        shape);
}

// ---------------------------------------------------------------- trajectories

TrajectorySolution solve_launch_angles(double v, double g, Vec2 target)
{
    require_positive(v, "launch speed");
    require_positive(g, "gravity");
    if (!(target.x > 0.0))
        throw DomainError("target must lie ahead of the launch point (x > 0)");
    const double v2 = v * v;
    const double disc = v2 * v2 - g * (g * target.x * target.x + 2.0 * target.y * v2);
    if (disc < 0.0)
        return {};
    const double root = std::sqrt(disc);
    const double gx = g * target.x;
    // atan2 keeps both roots in (-pi/2, pi/2) without dividing by a tiny gx.
    const double low = std::atan2(v2 - root, gx);
    const double high = std::atan2(v2 + root, gx);
    return {low, high, true};
}

double boundary_launch_angle(double v, double g, Vec2 target)
{
    require_positive(v, "launch speed");
    require_positive(g, "gravity");
    if (!(target.x > 0.0))
        throw DomainError("target must lie ahead of the launch point (x > 0)");
    return std::atan2(v * v, g * target.x);
}

double parabola_height(double angle, double v, double g, double x)
{
    const double vx = v * std::cos(angle);
    const double t = x / vx;
    return v * std::sin(angle) * t - 0.5 * g * t * t;
}

double time_to_x(double angle, double v, double x) { return x / (v * std::cos(angle)); }

double arc_length_to_x(double angle, double v, double g, double x)
{
    const double c = std::cos(angle);
    const double k = g / (v * v * c * c);
    const double u0 = std::tan(angle);
    const double u1 = u0 - k * x;
    auto f = [](double u) { return 0.5 * (u * std::sqrt(1.0 + u * u) + std::asinh(u)); };
    return (f(u0) - f(u1)) / k;
}

Polyline sample_trajectory(double angle,
                           double v,
                           double g,
                           double dt,
                           double t_max,
                           Vec2 origin,
                           std::optional<double> floor_y)
{
    if (!(dt > 0.0))
        throw DomainError("dt_sample must be positive");
    if (!(t_max >= dt))
        throw DomainError("t_max must be at least dt_sample");
    const double vx = v * std::cos(angle);
    const double vy = v * std::sin(angle);
    Polyline out;
    out.dt_sample = dt;
    const auto steps = static_cast<std::size_t>(std::floor(t_max / dt + 1e-9));
    out.points.reserve(steps + 1);
    for (std::size_t k = 0; k <= steps; ++k) {
        const double t = static_cast<double>(k) * dt;
        const Vec2 p{origin.x + vx * t, origin.y + vy * t - 0.5 * g * t * t};
        out.points.push_back(p);
        if (floor_y && k > 0 && p.y < *floor_y)
            break;
    }
    return out;
}

// --------------------------------------------------------------- scene queries

std::vector<ConvexPart> world_parts(const SceneObject &object)
{
    auto parts = decompose(object.shape);
    for (auto &p : parts)
        p = p.transformed(object.position, object.angle);
    return parts;
}

Aabb bounds(const SceneObject &object)
{
    const auto parts = world_parts(object);
    Aabb b = parts.front().bounds();
    for (std::size_t i = 1; i < parts.size(); ++i)
        b.merge(parts[i].bounds());
    return b;
}

const SceneObject *find_object(std::span<const SceneObject> scene, ObjectId id)
{
    for (const auto &o : scene)
        if (o.id == id)
            return &o;
    return nullptr;
}

std::optional<double> segment_entry(Vec2 a, Vec2 b, const ConvexPart &part)
{
    const Vec2 d = b - a;
    if (part.is_circle) {
        const Vec2 m = a - part.center;
        const double c = m.length_squared() - part.radius * part.radius;
        if (c <= 0.0)
            return 0.0;
        const double qa = d.length_squared();
        if (qa == 0.0)
            return std::nullopt;
        const double qb = dot(m, d);
        const double disc = qb * qb - qa * c;
        if (qb > 0.0 || disc < 0.0)
            return std::nullopt;
        const double t = (-qb - std::sqrt(disc)) / qa;
        if (t < 0.0 || t > 1.0)
            return std::nullopt;
        return t;
    }
    double t_enter = 0.0;
    double t_leave = 1.0;
    for (std::size_t i = 0; i < part.count; ++i) {
        const Vec2 n = part.normals[i];
        const double num = dot(n, part.vertices[i] - a);
        const double den = dot(n, d);
        if (den == 0.0) {
            if (num < 0.0)
                return std::nullopt;
            continue;
        }
        const double t = num / den;
        if (den < 0.0)
            t_enter = std::max(t_enter, t);
        else
            t_leave = std::min(t_leave, t);
        if (t_enter > t_leave)
            return std::nullopt;
    }
    return t_enter;
}

namespace {

struct PreparedObject
{
    ObjectId id;
    std::vector<ConvexPart> parts;
    Aabb box;
};

std::vector<PreparedObject> prepare(std::span<const SceneObject> scene, std::optional<ObjectId> target)
{
    if (target && !find_object(scene, *target))
        throw DomainError("unknown target id " + std::to_string(to_underlying(*target)));
    std::vector<PreparedObject> out;
    out.reserve(scene.size());
    for (const auto &o : scene) {
        if (target && o.id == *target)
            continue;
        PreparedObject p{o.id, world_parts(o), {}};
        p.box = p.parts.front().bounds();
        for (std::size_t i = 1; i < p.parts.size(); ++i)
            p.box.merge(p.parts[i].bounds());
        out.push_back(std::move(p));
    }
    return out;
}

std::optional<double> object_entry(Vec2 a, Vec2 b, const PreparedObject &o)
{
    const Aabb seg{{std::min(a.x, b.x), std::min(a.y, b.y)}, {std::max(a.x, b.x), std::max(a.y, b.y)}};
    if (!seg.overlaps(o.box))
        return std::nullopt;
    std::optional<double> best;
    for (const auto &part : o.parts) {
        if (auto t = segment_entry(a, b, part); t && (!best || *t < *best))
            best = t;
    }
    return best;
}

bool before(const Obstruction &l, const Obstruction &r)
{
    return std::tie(l.segment, l.t, l.id) < std::tie(r.segment, r.t, r.id);
}

} // namespace

std::optional<Obstruction> first_obstruction(const Polyline &path,
                                             std::span<const SceneObject> scene,
                                             std::optional<ObjectId> target)
{
    if (path.points.size() < 2)
        throw DomainError("path needs at least two points");
    const auto objects = prepare(scene, target);
    for (std::size_t k = 0; k + 1 < path.points.size(); ++k) {
        const Vec2 a = path.points[k];
        const Vec2 b = path.points[k + 1];
        std::optional<Obstruction> best;
        for (const auto &o : objects) {
            if (auto t = object_entry(a, b, o)) {
                Obstruction hit{o.id, a + (b - a) * *t, k, *t};
                if (!best || before(hit, *best))
                    best = hit;
            }
        }
        if (best)
            return best;
    }
    return std::nullopt;
}

std::vector<Obstruction> all_obstructions(const Polyline &path,
                                          std::span<const SceneObject> scene,
                                          std::optional<ObjectId> target)
{
    if (path.points.size() < 2)
        throw DomainError("path needs at least two points");
    const auto objects = prepare(scene, target);
    std::vector<Obstruction> out;
    for (const auto &o : objects) {
        for (std::size_t k = 0; k + 1 < path.points.size(); ++k) {
            const Vec2 a = path.points[k];
            const Vec2 b = path.points[k + 1];
            if (auto t = object_entry(a, b, o)) {
                out.push_back({o.id, a + (b - a) * *t, k, *t});
                break;
            }
        }
    }
    std::sort(out.begin(), out.end(), before);
    return out;
}

std::set<ObjectId> find_supporters(ObjectId block, std::span<const SceneObject> scene)
{
    const SceneObject *subject = find_object(scene, block);
    if (!subject)
        throw DomainError("unknown object id " + std::to_string(to_underlying(block)));
    const Aabb a = bounds(*subject);
    std::set<ObjectId> out;
    for (const auto &o : scene) {
        if (o.id == block)
            continue;
        const Aabb b = bounds(o);
        const double ref_height = o.kind == ObjectKind::terrain ? a.height() : std::min(a.height(), b.height());
        const double tol = kSupportTolerance * ref_height;
        const double overlap = std::min(a.max.x, b.max.x) - std::max(a.min.x, b.min.x);
        if (overlap > 1e-9 && std::abs(a.min.y - b.max.y) <= tol)
            out.insert(o.id);
    }
    return out;
}

} // namespace birdbench::geo
