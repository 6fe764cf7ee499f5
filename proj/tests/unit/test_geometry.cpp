// SPDX-License-Identifier: Apache-2.0
#include "birdbench/geometry.hpp"

#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>

using namespace birdbench;
using namespace birdbench::geo;

namespace {

SceneObject box_at(std::uint32_t id, Vec2 c, double w, double h, ObjectKind kind = ObjectKind::block)
{
    return {make_id(id), kind, kind == ObjectKind::block ? Material::wood : Material::none, Box{w, h}, c, 0.0};
}

double height_at(double angle, double v, double g, double x)
{
    const double c = std::cos(angle);
    return x * std::tan(angle) - g * x * x / (2.0 * v * v * c * c);
}

// Plain bisection on the analytic flight equation.
double bisect(double v, double g, Vec2 target, double lo, double hi)
{
    const auto f = [&](double a) { return height_at(a, v, g, target.x) - target.y; };
    double flo = f(lo);
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if ((fm < 0) == (flo < 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

bool inside(const ConvexPart &part, Vec2 p)
{
    if (part.is_circle)
        return (p - part.center).length_squared() <= part.radius * part.radius;
    for (std::size_t i = 0; i < part.count; ++i)
        if (dot(part.normals[i], p - part.vertices[i]) > 0.0)
            return false;
    return true;
}

// Dense point sampling of every segment: the first segment and sample at
// which a point lies inside some object.
std::optional<std::pair<std::size_t, ObjectId>> sampled_first_hit(const Polyline &path,
                                                                  std::span<const SceneObject> scene)
{
    constexpr int kSamples = 4000;
    for (std::size_t s = 0; s + 1 < path.points.size(); ++s) {
        for (int k = 0; k <= kSamples; ++k) {
            const double t = static_cast<double>(k) / kSamples;
            const Vec2 p = path.points[s] + (path.points[s + 1] - path.points[s]) * t;
            for (const auto &o : scene)
                for (const auto &part : world_parts(o))
                    if (inside(part, p))
                        return std::pair{s, o.id};
        }
    }
    return std::nullopt;
}

} // namespace

TEST_CASE("launch angles at maximum range coincide at 45 degrees")
{
    const auto s = solve_launch_angles(10.0, 10.0, {10.0, 0.0});
    REQUIRE(s.reachable);
    CHECK(s.low_angle == doctest::Approx(kPi / 4).epsilon(1e-12));
    CHECK(s.high_angle == doctest::Approx(kPi / 4).epsilon(1e-12));
}

TEST_CASE("targets beyond maximum range are unreachable")
{
    CHECK_FALSE(solve_launch_angles(10.0, 10.0, {20.0, 0.0}).reachable);
}

TEST_CASE("launch angles agree with a bisection root finder")
{
    const double v = 20.0;
    const double g = 9.8;
    const Vec2 target{30.0, 5.0};
    const auto s = solve_launch_angles(v, g, target);
    REQUIRE(s.reachable);
    // The height at fixed x peaks where tan(a) = v^2 / (g x); one root on each side.
    const double peak = std::atan(v * v / (g * target.x));
    const double low = bisect(v, g, target, 1e-9, peak);
    const double high = bisect(v, g, target, peak, kPi / 2 - 1e-9);
    CHECK(std::abs(s.low_angle - low) <= 1e-9);
    CHECK(std::abs(s.high_angle - high) <= 1e-9);
    // Frozen values from a 40-digit evaluation of the closed form.
    CHECK(std::abs(s.low_angle - 0.63058819706475657151) <= 1e-12);
    CHECK(std::abs(s.high_angle - 1.105356807144766886) <= 1e-12);
}

TEST_CASE("targets behind or above the launch point are outside the domain")
{
    CHECK_THROWS_AS(solve_launch_angles(10.0, 10.0, {0.0, 1.0}), DomainError);
    CHECK_THROWS_AS(solve_launch_angles(10.0, 10.0, {-3.0, 0.0}), DomainError);
    CHECK_THROWS_AS(solve_launch_angles(0.0, 10.0, {3.0, 0.0}), DomainError);
}

TEST_CASE("property: both branches pass through every reachable target")
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> ux(0.5, 80.0);
    std::uniform_real_distribution<double> uy(-10.0, 30.0);
    int checked = 0;
    while (checked < 2000) {
        const Vec2 t{ux(rng), uy(rng)};
        const auto s = solve_launch_angles(28.0, 9.8, t);
        if (!s.reachable)
            continue;
        ++checked;
        CHECK(s.low_angle <= s.high_angle);
        CHECK(std::abs(parabola_height(s.low_angle, 28.0, 9.8, t.x) - t.y) <= 1e-9);
        CHECK(std::abs(parabola_height(s.high_angle, 28.0, 9.8, t.x) - t.y) <= 1e-9);
    }
}

TEST_CASE("sampled trajectories follow the closed form")
{
    const auto flat = sample_trajectory(0.0, 5.0, 10.0, 0.1, 1.0);
    REQUIRE(flat.points.size() >= 2);
    CHECK(flat.points[0] == Vec2{0.0, 0.0});
    CHECK(flat.points[1].x == doctest::Approx(0.5));
    CHECK(flat.points[1].y == doctest::Approx(-0.05));

    const auto vertical = sample_trajectory(kPi / 2, 10.0, 10.0, 0.05, 2.0);
    for (const auto &p : vertical.points)
        CHECK(std::abs(p.x) < 1e-12);

    const double a = kPi / 4;
    const auto arc = sample_trajectory(a, 10.0, 10.0, 1e-4, 1.5);
    double apex = 0.0;
    for (const auto &p : arc.points)
        apex = std::max(apex, p.y);
    CHECK(std::abs(apex - 2.5) < 1e-7); // sampling resolution bounds the error
    const double t_apex = 10.0 * std::sin(a) / 10.0;
    CHECK(std::abs(parabola_height(a, 10.0, 10.0, 10.0 * std::cos(a) * t_apex) - 2.5) < 1e-9);

    const auto floored = sample_trajectory(a, 10.0, 10.0, 0.01, 10.0, {}, -1.0);
    CHECK(floored.points.back().y < -1.0);
    CHECK(floored.points[floored.points.size() - 2].y >= -1.0);
}

TEST_CASE("obstruction queries")
{
    const auto path = sample_trajectory(0.0, 20.0, 0.0, 0.05, 1.0); // straight line along y = 0
    SUBCASE("empty scene is clear")
    {
        CHECK_FALSE(first_obstruction(path, {}).has_value());
    }
    SUBCASE("a block across the midpoint is returned, the target is skipped")
    {
        const std::vector<SceneObject> scene{box_at(1, {10.0, 0.0}, 1.0, 2.0), box_at(2, {18.0, 0.0}, 1.0, 1.0, ObjectKind::pig)};
        const auto hit = first_obstruction(path, scene, make_id(2));
        REQUIRE(hit);
        CHECK(hit->id == make_id(1));
        CHECK(hit->point.x == doctest::Approx(9.5));
        CHECK_THROWS_AS(first_obstruction(path, scene, make_id(99)), DomainError);
    }
    SUBCASE("the earlier of two blocks wins regardless of scene order")
    {
        std::vector<SceneObject> scene{box_at(5, {14.0, 0.0}, 1.0, 1.0), box_at(3, {6.0, 0.0}, 1.0, 1.0)};
        CHECK(first_obstruction(path, scene)->id == make_id(3));
        std::reverse(scene.begin(), scene.end());
        CHECK(first_obstruction(path, scene)->id == make_id(3));
    }
    SUBCASE("two blocks entered in the same segment are ordered by entry parameter")
    {
        const auto coarse = sample_trajectory(0.0, 20.0, 0.0, 1.0, 1.0); // one segment, 0..20
        const std::vector<SceneObject> scene{box_at(1, {12.0, 0.0}, 1.0, 1.0), box_at(2, {8.0, 0.0}, 1.0, 1.0)};
        const auto hit = first_obstruction(coarse, scene);
        REQUIRE(hit);
        CHECK(hit->id == make_id(2));
        CHECK(hit->segment == 0);
        CHECK(hit->t == doctest::Approx(7.5 / 20.0));
    }
}

TEST_CASE("property: first obstruction matches dense point sampling and ignores scene order")
{
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> ux(3.0, 40.0);
    std::uniform_real_distribution<double> uy(-2.0, 12.0);
    std::uniform_real_distribution<double> us(0.4, 2.5);
    std::uniform_real_distribution<double> ua(0.2, 1.2);
    for (int trial = 0; trial < 150; ++trial) {
        const auto path = sample_trajectory(ua(rng), 25.0, 9.8, 1.0 / 30.0, 3.0);
        std::vector<SceneObject> scene;
        for (std::uint32_t i = 1; i <= 6; ++i) {
            SceneObject o = box_at(i, {ux(rng), uy(rng)}, us(rng), us(rng));
            if (i % 3 == 0)
                o.shape = Circle{us(rng) * 0.5};
            o.angle = ua(rng) - 0.7;
            scene.push_back(o);
        }
        const auto hit = first_obstruction(path, scene);
        const auto oracle = sampled_first_hit(path, scene);
        REQUIRE(hit.has_value() == oracle.has_value());
        if (hit) {
            // The sampled oracle resolves entry points to 1/4000 of a segment.
            CHECK(hit->segment == oracle->first);
            CHECK(hit->id == oracle->second);
        }
        std::shuffle(scene.begin(), scene.end(), rng);
        const auto again = first_obstruction(path, scene);
        REQUIRE(again.has_value() == hit.has_value());
        if (hit)
            CHECK(again->id == hit->id);
    }
}

TEST_CASE("supporters")
{
    const SceneObject ground{make_id(1), ObjectKind::terrain, Material::none, Box{40.0, 2.0}, {20.0, 1.0}, 0.0};
    SUBCASE("a block on terrain rests on the terrain")
    {
        const std::vector<SceneObject> scene{ground, box_at(2, {10.0, 2.5}, 1.0, 1.0)};
        CHECK(find_supporters(make_id(2), scene) == std::set<ObjectId>{make_id(1)});
    }
    SUBCASE("a bridge rests on both pillars")
    {
        const std::vector<SceneObject> scene{ground, box_at(2, {8.0, 3.0}, 0.5, 2.0), box_at(3, {12.0, 3.0}, 0.5, 2.0),
                                             box_at(4, {10.0, 4.25}, 5.0, 0.5)};
        CHECK(find_supporters(make_id(4), scene) == std::set<ObjectId>{make_id(2), make_id(3)});
    }
    SUBCASE("a block in mid air has no supporters")
    {
        const std::vector<SceneObject> scene{ground, box_at(2, {10.0, 8.0}, 1.0, 1.0)};
        CHECK(find_supporters(make_id(2), scene).empty());
        CHECK_THROWS_AS(find_supporters(make_id(7), scene), DomainError);
    }
}

TEST_CASE("property: supporters lie below the supported block")
{
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> ux(0.0, 20.0);
    std::uniform_real_distribution<double> uy(0.5, 6.0);
    std::uniform_int_distribution<int> snap(0, 1);
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<SceneObject> scene;
        for (std::uint32_t i = 1; i <= 8; ++i) {
            // Snap heights to a 0.5 grid so resting contacts actually occur.
            const double h = snap(rng) ? 1.0 : 0.5;
            const double y = std::round(uy(rng) * 2.0) / 2.0 + h / 2.0;
            scene.push_back(box_at(i, {ux(rng), y}, 1.5, h));
        }
        for (const auto &a : scene) {
            const auto ab = bounds(a);
            for (const auto id : find_supporters(a.id, scene)) {
                const auto bb = bounds(*find_object(scene, id));
                const double tol = kSupportTolerance * std::min(ab.height(), bb.height());
                CHECK(bb.max.y <= ab.min.y + tol + 1e-12);
            }
        }
    }
}

TEST_CASE("shape decomposition")
{
    CHECK(decompose(HollowBox{3.0, 2.0, 0.25}).size() == 4);
    CHECK(decompose(Box{2.0, 1.0}).front().area() == doctest::Approx(2.0));
    const auto tri = canonical_polygon({{0.0, 0.0}, {0.0, 1.0}, {1.0, 0.0}}); // clockwise input
    CHECK(cross(tri[1] - tri[0], tri[2] - tri[0]) > 0.0);
    CHECK_THROWS_AS(canonical_polygon({{0.0, 0.0}, {1.0, 0.0}, {2.0, 0.0}}), DomainError);
    CHECK_THROWS_AS(canonical_polygon({{0, 0}, {2, 0}, {1, 0.2}, {2, 2}, {0, 2}}), DomainError);
}
