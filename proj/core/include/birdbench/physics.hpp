// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "birdbench/geometry.hpp"
#include "birdbench/types.hpp"

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <tuple>
#include <vector>

namespace birdbench::phys {

struct MaterialProps
{
    double density{1.0};
    double friction{0.5};
    double restitution{0.1};
    double hp_per_area{1.0};
};

struct BlastSpec
{
    double radius{4.0};
    double impulse{6.0}; // impulse at the centre, falling linearly to 0 at radius
};

struct DamageRules
{
    double threshold_per_mass{0.5};
    double gain{1.0};
};

struct BirdProps
{
    double radius{0.35};
    double density{0.4};
};

/// Every engine constant in one place. All values are artifact choices.
struct PhysicsConfig
{
    double dt{1.0 / 60.0};
    int velocity_iterations{4};
    double gravity{9.8};
    double v_max{28.0};
    Vec2 world_size{84.0, 48.0};
    double kill_margin{5.0};

    double restitution_threshold{1.0};
    double linear_slop{0.002};
    double baumgarte{0.2};
    double angular_damping{0.3};
    double rolling_resistance{0.05}; // for contacts involving a round part

    MaterialProps wood{1.0, 0.6, 0.1, 1.0};
    MaterialProps ice{0.9, 0.2, 0.1, 0.5};
    MaterialProps stone{3.0, 0.8, 0.05, 3.0};
    MaterialProps pig{1.0, 0.5, 0.3, 0.0};
    MaterialProps tnt{1.0, 0.5, 0.1, 0.0};
    MaterialProps terrain{0.0, 0.8, 0.0, 0.0};
    double pig_hp{0.75};
    double tnt_hp{1.0};
    double bird_friction{0.5};
    double bird_restitution{0.3};

    BirdProps red{0.35, 0.4};
    BirdProps blue{0.25, 0.4};
    BirdProps yellow{0.35, 0.4};
    BirdProps black{0.45, 0.4};
    BirdProps white{0.45, 0.4};

    DamageRules damage{};
    BlastSpec tnt_blast{4.0, 6.0};
    BlastSpec black_blast{5.5, 8.0};
    BlastSpec egg_blast{3.0, 5.0};

    double blue_split_angle{deg_to_rad(15.0)};
    double yellow_boost{1.7};
    double white_lift_speed{8.0};
    double egg_radius{0.3};
    double egg_density{3.0};
    double egg_speed{10.0};

    const MaterialProps &props(Material m) const;
    const BirdProps &bird(BirdType b) const;
};

/// Damage dealt to a body of the given material and mass by an impulse.
/// Zero at or below the threshold (threshold_per_mass * mass); above it the
/// excess times gain times the bird's effectiveness against the material.
double compute_damage(Material material,
                      double mass,
                      double impulse,
                      std::optional<BirdType> bird,
                      const DamageRules &rules = {});

struct Body
{
    ObjectId id{};
    ObjectKind kind{ObjectKind::block};
    Material material{Material::none};
    geo::Shape shape;
    std::optional<BirdType> bird;
    bool explodes_on_contact{false}; // white bird egg

    Vec2 position; // centre of mass
    double angle{0.0};
    Vec2 velocity;
    double angular_velocity{0.0};

    double mass{0.0};
    double inv_mass{0.0};
    double inertia{0.0};
    double inv_inertia{0.0};
    double friction{0.5};
    double restitution{0.0};

    double hp{0.0};
    double initial_hp{0.0};
    bool alive{true};

    Vec2 local_centroid;                // centre of mass in the shape frame
    std::vector<geo::ConvexPart> parts; // relative to the centre of mass
    double bounding_radius{0.0};

    bool is_static() const { return inv_mass == 0.0; }
    Vec2 reference_position() const;
    geo::SceneObject scene_object() const;
    geo::Aabb bounds() const;
    double speed_measure() const { return velocity.length() + std::abs(angular_velocity) * bounding_radius; }
};

struct BodyDef
{
    ObjectKind kind{ObjectKind::block};
    Material material{Material::none};
    geo::Shape shape;
    Vec2 position; // reference point of the shape
    double angle{0.0};
    Vec2 velocity;
    double angular_velocity{0.0};
    std::optional<BirdType> bird;
    std::optional<double> density;     // overrides the material density
    std::optional<double> friction;    // overrides the material friction
    std::optional<double> restitution; // overrides the material restitution
    std::optional<double> hp;          // overrides the material hit points
};

enum class EventKind : std::uint8_t { damaged, destroyed, pig_killed, tnt_detonated };
std::string_view to_string(EventKind k);

struct DamageEvent
{
    std::int64_t step{0};
    ObjectId subject{};
    ObjectKind subject_kind{ObjectKind::block};
    EventKind kind{EventKind::damaged};
    double amount{0.0};
    bool operator==(const DamageEvent &) const = default;
};

struct ActiveBird
{
    ObjectId id{};
    BirdType type{BirdType::red};
    bool tap_armed{false};
};

class OutOfBirdsError : public std::runtime_error
{
public:
    OutOfBirdsError() : std::runtime_error("no birds left to launch") {}
};

class IllegalActionError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Mutable physics state of one game instance. Confined to a single thread;
/// copying a World gives an independent instance (used for look-ahead).
class World
{
public:
    explicit World(PhysicsConfig config = {}, std::uint64_t seed = 0);

    ObjectId add_body(const BodyDef &def);
    /// Adds a body under a caller-chosen id, which must exceed every id in use.
    ObjectId add_body(const BodyDef &def, ObjectId id);
    void set_launch_point(Vec2 p) { launch_point_ = p; }
    Vec2 launch_point() const { return launch_point_; }
    void set_birds(std::vector<BirdType> birds);

    /// Advances by exactly one fixed step; throws std::invalid_argument when dt
    /// differs from the configured step.
    void step(double dt);
    void step() { step(config_.dt); }

    /// Puts the front bird in flight at the launch point.
    void launch_bird(double angle, double speed_fraction);
    /// Triggers the in-flight bird's ability. Throws IllegalActionError (state
    /// untouched) when there is no armed bird or the bird has no ability.
    void activate_ability();
    /// Removes every bird body and ends the current shot.
    void end_shot();

    const PhysicsConfig &config() const { return config_; }
    const std::vector<Body> &bodies() const { return bodies_; }
    const Body *find(ObjectId id) const;
    std::span<const DamageEvent> events() const { return events_; }
    const std::deque<BirdType> &birds_queue() const { return birds_; }
    const std::optional<ActiveBird> &active_bird() const { return active_; }
    double time() const { return time_; }
    std::int64_t step_index() const { return step_index_; }
    std::uint64_t seed() const { return seed_; }

    int living_pigs() const;
    bool solved() const { return living_pigs() == 0; }
    std::vector<geo::SceneObject> scene(bool include_birds = false) const;

    /// Largest body speed measure (linear + angular * bounding radius).
    double max_speed() const;
    /// Deepest current overlap between two bodies relative to the smaller
    /// body's minimum dimension.
    double max_relative_penetration() const;
    /// FNV-1a over the exact bit patterns of the full dynamic state.
    std::uint64_t state_hash() const;

    /// Applies a radial blast immediately (same mechanics as TNT).
    void apply_blast(Vec2 center, const BlastSpec &spec, std::optional<BirdType> source, ObjectId exclude = {});

private:
    struct ContactPoint
    {
        Vec2 ra;
        Vec2 rb;
        double separation{0.0};
        double normal_mass{0.0};
        double tangent_mass{0.0};
        double normal_impulse{0.0};
        double tangent_impulse{0.0};
        double bias_impulse{0.0};
        double velocity_bias{0.0};
        std::uint32_t feature{0};
    };

    struct Contact
    {
        std::size_t a{0};
        std::size_t b{0};
        std::uint8_t part_a{0};
        std::uint8_t part_b{0};
        Vec2 normal; // from a to b
        double friction{0.0};
        double restitution{0.0};
        double impact_impulse{0.0};
        double rolling_radius{0.0};
        double rolling_impulse{0.0};
        int count{0};
        ContactPoint points[2];
    };

    using ContactKey = std::tuple<std::uint32_t, std::uint32_t, std::uint8_t, std::uint8_t, std::uint32_t>;

    void collide(std::vector<Contact> &contacts) const;
    void apply_damage(std::size_t index, double amount);
    void process_deaths();
    void remove_out_of_bounds();
    void remove_dead();
    std::size_t index_of(ObjectId id) const;
    Body make_body(const BodyDef &def, ObjectId id) const;

    PhysicsConfig config_;
    std::uint64_t seed_{0};
    std::vector<Body> bodies_; // sorted by id
    std::uint32_t next_id_{1};
    std::deque<BirdType> birds_;
    std::optional<ActiveBird> active_;
    Vec2 launch_point_;
    double time_{0.0};
    std::int64_t step_index_{0};
    std::vector<DamageEvent> events_;
    std::map<ContactKey, std::pair<double, double>> warm_cache_;
    std::vector<std::tuple<Vec2, BlastSpec, std::optional<BirdType>, ObjectId>> pending_blasts_;
    std::vector<Vec2> pseudo_velocity_;
    std::vector<double> pseudo_angular_;
};

struct SettleParams
{
    double v_eps{0.05};
    int k_steps{30};
    double t_cap{15.0};
};

struct SettleResult
{
    int steps_taken{0};
    bool settled{false};
};

/// Steps until every body's speed stays below v_eps for k_steps consecutive
/// steps, or t_cap seconds elapse. Throws std::invalid_argument for v_eps <= 0
/// or k_steps < 1.
SettleResult settle(World &world, const SettleParams &params = {});

struct ShotCommand
{
    double angle{0.0};
    double speed_fraction{1.0};
    int tap_ms{0}; // 0: never tap
};

struct ShotOutcome
{
    int steps{0};
    double sim_seconds{0.0};
    bool tapped{false};
    std::size_t first_event{0}; // index of the first event caused by the shot
};

/// Launches the front bird, taps at tap_ms after launch (when the bird can),
/// settles, and clears the birds.
ShotOutcome simulate_shot(World &world, const ShotCommand &shot, const SettleParams &params = {});

} // namespace birdbench::phys
