// SPDX-License-Identifier: Apache-2.0
#include "birdbench/level.hpp"
#include "birdbench/physics.hpp"

#include "doctest.h"
#include "support.hpp"

#include <cmath>
#include <random>

using namespace birdbench;
using namespace birdbench::phys;

namespace {

PhysicsConfig zero_gravity()
{
    PhysicsConfig c;
    c.gravity = 0.0;
    c.angular_damping = 0.0;
    return c;
}

BodyDef ball(Vec2 p, Vec2 v, double r = 0.5, double density = 1.0)
{
    BodyDef d;
    d.kind = ObjectKind::pig; // no material, so no material-dependent behaviour
    d.shape = geo::Circle{r};
    d.position = p;
    d.velocity = v;
    d.density = density;
    d.friction = 0.0;
    d.restitution = 1.0;
    d.hp = 1e9;
    return d;
}

BodyDef static_box(Vec2 c, double w, double h)
{
    BodyDef d;
    d.kind = ObjectKind::terrain;
    d.shape = geo::Box{w, h};
    d.position = c;
    d.friction = 0.0;
    d.restitution = 1.0;
    return d;
}

const Body &body(const World &w, ObjectId id)
{
    const Body *b = w.find(id);
    REQUIRE(b != nullptr);
    return *b;
}

// Head-on one-dimensional collision: v1' = (m1 v1 + m2 v2 + e m2 (v2 - v1)) / (m1 + m2).
std::pair<double, double> collision_oracle(double m1, double v1, double m2, double v2, double e)
{
    const double p = m1 * v1 + m2 * v2;
    return {(p + e * m2 * (v2 - v1)) / (m1 + m2), (p + e * m1 * (v1 - v2)) / (m1 + m2)};
}

} // namespace

TEST_CASE("free fall follows the analytic drop within 2%")
{
    World w;
    BodyDef d = ball({40.0, 30.0}, {}, 0.5);
    const ObjectId id = w.add_body(d);
    for (int i = 0; i < 60; ++i)
        w.step(1.0 / 60.0);
    const double drop = 30.0 - body(w, id).position.y;
    CHECK(drop == doctest::Approx(0.5 * 9.8).epsilon(0.02));
    CHECK_THROWS_AS(w.step(0.01), std::invalid_argument);
}

TEST_CASE("a scene at rest produces no events")
{
    auto w = level::build_world(test_support::load_fixture("box_on_terrain"));
    for (int i = 0; i < 600; ++i)
        w.step();
    CHECK(w.events().empty());
    CHECK(w.step_index() == 600);
}

TEST_CASE("equal-mass elastic head-on collision exchanges velocities")
{
    World w(zero_gravity());
    const ObjectId a = w.add_body(ball({40.0, 20.0}, {3.0, 0.0}));
    const ObjectId b = w.add_body(ball({42.0, 20.0}, {-1.5, 0.0}));
    for (int i = 0; i < 60; ++i)
        w.step();
    CHECK(std::abs(body(w, a).velocity.x - (-1.5)) < 1e-6);
    CHECK(std::abs(body(w, b).velocity.x - 3.0) < 1e-6);
    CHECK(std::abs(body(w, a).velocity.y) < 1e-6);
}

TEST_CASE("property: isolated frictionless collisions conserve momentum and match the oracle")
{
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> uv(1.5, 6.0);
    std::uniform_real_distribution<double> ud(0.3, 3.0);
    std::uniform_real_distribution<double> ue(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        World w(zero_gravity());
        BodyDef da = ball({38.0, 20.0}, {uv(rng), 0.0}, 0.5, ud(rng));
        BodyDef db = ball({41.0, 20.0}, {-uv(rng), 0.0}, 0.5, ud(rng));
        const double e = ue(rng);
        da.restitution = e;
        db.restitution = e;
        const ObjectId a = w.add_body(da);
        const ObjectId b = w.add_body(db);
        const double ma = body(w, a).mass;
        const double mb = body(w, b).mass;
        const double p0 = ma * da.velocity.x + mb * db.velocity.x;
        for (int i = 0; i < 90; ++i)
            w.step();
        const double va = body(w, a).velocity.x;
        const double vb = body(w, b).velocity.x;
        CHECK(std::abs(ma * va + mb * vb - p0) <= 1e-6 * (std::abs(p0) + ma + mb));
        // Restitution applies only above the threshold approach speed.
        const double approach = da.velocity.x - db.velocity.x;
        const auto [ea, eb] = collision_oracle(ma, da.velocity.x, mb, db.velocity.x,
                                               approach > w.config().restitution_threshold ? e : 0.0);
        CHECK(std::abs(va - ea) < 1e-6);
        CHECK(std::abs(vb - eb) < 1e-6);
    }
}

TEST_CASE("launching birds")
{
    World w;
    w.set_launch_point({6.0, 4.0});
    w.set_birds({BirdType::red, BirdType::yellow});
    w.launch_bird(kPi / 4, 1.0);
    const auto &bird = body(w, w.active_bird()->id);
    CHECK(bird.velocity.x == doctest::Approx(28.0 / std::sqrt(2.0)).epsilon(1e-12));
    CHECK(bird.velocity.y == doctest::Approx(28.0 / std::sqrt(2.0)).epsilon(1e-12));
    CHECK_FALSE(w.active_bird()->tap_armed);
    CHECK_THROWS_AS(w.launch_bird(0.3, 1.0), IllegalActionError);
    w.end_shot();

    w.launch_bird(0.3, 0.0);
    const auto &dropped = body(w, w.active_bird()->id);
    CHECK(dropped.position == Vec2{6.0, 4.0});
    CHECK(dropped.velocity == Vec2{0.0, 0.0});
    CHECK(w.active_bird()->tap_armed);
    w.end_shot();

    CHECK_THROWS_AS(w.launch_bird(0.3, 1.0), OutOfBirdsError);
}

TEST_CASE("bird abilities")
{
    World w(zero_gravity());
    w.set_launch_point({20.0, 20.0});
    SUBCASE("yellow scales its velocity by 1.7")
    {
        w.set_birds({BirdType::yellow});
        const Vec2 v{10.0, -2.0};
        w.launch_bird(std::atan2(v.y, v.x), v.length() / 28.0);
        w.activate_ability();
        const Vec2 after = body(w, w.active_bird()->id).velocity;
        CHECK(std::abs(after.x - 17.0) < 1e-9);
        CHECK(std::abs(after.y - -3.4) < 1e-9);
        CHECK_THROWS_AS(w.activate_ability(), IllegalActionError);
    }
    SUBCASE("red has no ability and the world is left untouched")
    {
        w.set_birds({BirdType::red});
        w.launch_bird(0.2, 0.5);
        const auto before = w.state_hash();
        CHECK_THROWS_AS(w.activate_ability(), IllegalActionError);
        CHECK(w.state_hash() == before);
    }
    SUBCASE("blue splits into three birds fanned 15 degrees apart")
    {
        w.set_birds({BirdType::blue});
        w.launch_bird(0.0, 0.5);
        const double mass = body(w, w.active_bird()->id).mass;
        w.activate_ability();
        std::vector<double> headings;
        double total_mass = 0.0;
        for (const auto &b : w.bodies()) {
            if (b.kind != ObjectKind::bird)
                continue;
            headings.push_back(std::atan2(b.velocity.y, b.velocity.x));
            CHECK(b.velocity.length() == doctest::Approx(14.0).epsilon(1e-12));
            total_mass += b.mass;
        }
        REQUIRE(headings.size() == 3);
        CHECK(headings[0] == doctest::Approx(-deg_to_rad(15.0)).epsilon(1e-12));
        CHECK(std::abs(headings[1]) < 1e-12);
        CHECK(headings[2] == doctest::Approx(deg_to_rad(15.0)).epsilon(1e-12));
        CHECK(total_mass == doctest::Approx(mass).epsilon(1e-12));
    }
    SUBCASE("black explodes and disappears")
    {
        w.set_birds({BirdType::black});
        BodyDef block;
        block.material = Material::wood;
        block.shape = geo::Box{1.0, 1.0};
        block.position = {22.0, 20.0};
        block.hp = 1e9;
        const ObjectId target = w.add_body(block);
        w.launch_bird(0.0, 0.1);
        w.activate_ability();
        CHECK(w.find(w.active_bird()->id) == nullptr);
        CHECK(body(w, target).velocity.x > 0.0);
    }
    SUBCASE("white lifts off and drops an egg")
    {
        w.set_birds({BirdType::white});
        w.launch_bird(0.0, 0.5);
        w.activate_ability();
        int eggs = 0;
        for (const auto &b : w.bodies()) {
            if (b.explodes_on_contact) {
                ++eggs;
                CHECK(b.velocity.x == 0.0);
                CHECK(b.velocity.y < 0.0);
                CHECK(b.position.y < 20.0);
            }
        }
        CHECK(eggs == 1);
        CHECK(body(w, w.active_bird()->id).velocity.y == doctest::Approx(8.0));
    }
}

TEST_CASE("damage rule")
{
    const double mass = 2.0;
    const double threshold = 0.5 * mass;
    for (auto m : {Material::wood, Material::ice, Material::stone, Material::none})
        CHECK(compute_damage(m, mass, 0.0, BirdType::red) == 0.0);
    CHECK(compute_damage(Material::wood, mass, threshold, std::nullopt) == 0.0);
    CHECK(compute_damage(Material::wood, mass, threshold + 1.0, std::nullopt) == doctest::Approx(1.0));
    CHECK(compute_damage(Material::wood, mass, 5.0, BirdType::yellow) ==
          doctest::Approx(2.0 * compute_damage(Material::wood, mass, 5.0, BirdType::red)));
    CHECK(compute_damage(Material::ice, mass, 5.0, BirdType::blue) == doctest::Approx(8.0));
    CHECK(compute_damage(Material::stone, mass, 5.0, BirdType::black) == doctest::Approx(8.0));
    CHECK_THROWS_AS(compute_damage(Material::wood, mass, -1.0, std::nullopt), DomainError);
}

TEST_CASE("settle detection")
{
    SUBCASE("a static world settles after exactly k steps")
    {
        auto w = level::build_world(test_support::load_fixture("box_on_terrain"));
        settle(w, {0.05, 30, 15.0}); // let contacts come to rest first
        const auto r = settle(w, {0.05, 30, 15.0});
        CHECK(r.settled);
        CHECK(r.steps_taken == 30);
    }
    SUBCASE("a bouncing ball with restitution 0.3 comes to rest before the cap")
    {
        World w;
        BodyDef floor = static_box({42.0, 1.0}, 84.0, 2.0);
        floor.restitution = 0.0;
        w.add_body(floor);
        BodyDef b = ball({42.0, 10.0}, {});
        b.restitution = 0.3;
        b.friction = 0.5;
        const ObjectId id = w.add_body(b);
        const auto r = settle(w, {0.05, 30, 10.0});
        CHECK(r.settled);
        CHECK(r.steps_taken < 600);
        CHECK(body(w, id).velocity.length() < 0.05);
    }
    SUBCASE("perpetual motion runs into the cap")
    {
        World w(zero_gravity());
        w.add_body(static_box({30.0, 20.0}, 1.0, 10.0));
        w.add_body(static_box({50.0, 20.0}, 1.0, 10.0));
        w.add_body(ball({40.0, 20.0}, {4.0, 0.0}));
        const auto r = settle(w, {0.05, 30, 10.0});
        CHECK_FALSE(r.settled);
        CHECK(r.steps_taken == 600);
    }
    CHECK_THROWS_AS(
        [] {
            World w;
            settle(w, {0.0, 30, 1.0});
        }(),
        std::invalid_argument);
}

TEST_CASE("property: identical inputs give identical state hashes at every step")
{
    const auto lvl = test_support::load_pack_level("L03");
    auto a = level::build_world(lvl);
    auto b = level::build_world(lvl);
    a.launch_bird(0.3, 0.9);
    b.launch_bird(0.3, 0.9);
    for (int i = 0; i < 400; ++i) {
        a.step();
        b.step();
        REQUIRE(a.state_hash() == b.state_hash());
    }
    CHECK(std::equal(a.events().begin(), a.events().end(), b.events().begin(), b.events().end()));
}

TEST_CASE("pack levels at rest keep penetration below 1% of the smaller body")
{
    for (const auto &lvl : level::load_pack(test_support::levels_dir())) {
        CAPTURE(lvl.id);
        auto w = level::build_world(lvl);
        double worst = 0.0;
        for (int i = 0; i < 180; ++i) {
            w.step();
            worst = std::max(worst, w.max_relative_penetration());
        }
        CHECK(worst < 0.01);
    }
}

TEST_CASE("pig deaths and the solved predicate")
{
    const auto lvl = test_support::load_pack_level("L01");
    auto w = level::build_world(lvl);
    CHECK(w.living_pigs() == 1);
    CHECK_FALSE(w.solved());
    const auto out = simulate_shot(w, {geo::solve_launch_angles(28.0, 9.8, Vec2{40.0, 2.5} - lvl.slingshot).low_angle, 1.0, 0});
    CHECK(out.steps > 0);
    int killed = 0;
    for (const auto &e : w.events())
        killed += e.kind == EventKind::pig_killed ? 1 : 0;
    CHECK(killed == 1);
    CHECK(w.solved());
    for (const auto &b : w.bodies())
        CHECK((b.kind != ObjectKind::pig || b.hp > 0.0));
}

TEST_CASE("blast impulse falls off with distance and stops at the radius")
{
    World w(zero_gravity());
    std::vector<std::pair<double, ObjectId>> probes;
    for (double d : {0.5, 1.0, 2.0, 3.0, 3.9, 4.1, 6.0}) {
        BodyDef b = ball({40.0 + d, 20.0}, {}, 0.2);
        b.hp = 1e9;
        probes.emplace_back(d, w.add_body(b));
    }
    const BlastSpec spec{4.0, 6.0};
    w.apply_blast({40.0, 20.0}, spec, std::nullopt);
    double previous = std::numeric_limits<double>::infinity();
    for (const auto &[d, id] : probes) {
        const auto &b = body(w, id);
        const double impulse = b.velocity.length() * b.mass;
        CHECK(impulse <= previous + 1e-12);
        previous = impulse;
        if (d >= spec.radius)
            CHECK(b.velocity == Vec2{0.0, 0.0});
        else
            CHECK(impulse == doctest::Approx(spec.impulse * (1.0 - d / spec.radius)));
    }
}

TEST_CASE("tnt detonates on any damage and chains")
{
    const auto lvl = test_support::load_pack_level("L03");
    auto w = level::build_world(lvl);
    const auto target = Vec2{38.0, 2.5} - lvl.slingshot;
    simulate_shot(w, {geo::solve_launch_angles(28.0, 9.8, target).low_angle, 1.0, 0});
    int detonations = 0;
    for (const auto &e : w.events())
        detonations += e.kind == EventKind::tnt_detonated ? 1 : 0;
    CHECK(detonations >= 2);
}
