// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace birdbench {

struct Vec2
{
    double x{0.0};
    double y{0.0};

    constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    constexpr Vec2 operator-() const { return {-x, -y}; }
    constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
    constexpr Vec2 operator/(double s) const { return {x / s, y / s}; }
    constexpr Vec2 &operator+=(Vec2 o)
    {
        x += o.x;
        y += o.y;
        return *this;
    }
    constexpr Vec2 &operator-=(Vec2 o)
    {
        x -= o.x;
        y -= o.y;
        return *this;
    }
    constexpr Vec2 &operator*=(double s)
    {
        x *= s;
        y *= s;
        return *this;
    }
    constexpr bool operator==(const Vec2 &) const = default;

    double length() const { return std::sqrt(x * x + y * y); }
    constexpr double length_squared() const { return x * x + y * y; }
};

constexpr Vec2 operator*(double s, Vec2 v) { return {v.x * s, v.y * s}; }
constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
// w x v for a scalar angular rate w.
constexpr Vec2 cross(double w, Vec2 v) { return {-w * v.y, w * v.x}; }
// v x 1: right-hand perpendicular.
constexpr Vec2 perp_right(Vec2 v) { return {v.y, -v.x}; }
inline Vec2 rotate(Vec2 v, double angle)
{
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    return {c * v.x - s * v.y, s * v.x + c * v.y};
}
inline Vec2 normalized(Vec2 v)
{
    const double len = v.length();
    return len > 0.0 ? v / len : Vec2{0.0, 0.0};
}

inline constexpr double kPi = 3.14159265358979323846;
constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }
constexpr double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

// Object ids are unique within one World and stable for its lifetime.
enum class ObjectId : std::uint32_t {};

constexpr std::uint32_t to_underlying(ObjectId id) { return static_cast<std::uint32_t>(id); }
constexpr ObjectId make_id(std::uint32_t v) { return static_cast<ObjectId>(v); }

enum class ObjectKind : std::uint8_t { block, pig, bird, tnt, terrain };
enum class Material : std::uint8_t { wood, ice, stone, none };
enum class BirdType : std::uint8_t { red, blue, yellow, black, white };
enum class Ability : std::uint8_t { none, split3, boost, blast, egg_bomb };

std::string_view to_string(ObjectKind k);
std::string_view to_string(Material m);
std::string_view to_string(BirdType b);
std::string_view to_string(Ability a);

std::optional<ObjectKind> parse_object_kind(std::string_view s);
std::optional<Material> parse_material(std::string_view s);
std::optional<BirdType> parse_bird_type(std::string_view s);

constexpr Ability ability_of(BirdType b)
{
    switch (b) {
    case BirdType::red:
        return Ability::none;
    case BirdType::blue:
        return Ability::split3;
    case BirdType::yellow:
        return Ability::boost;
    case BirdType::black:
        return Ability::blast;
    case BirdType::white:
        return Ability::egg_bomb;
    }
    return Ability::none;
}

/// Damage multiplier of a bird against a block material ("penetration factor").
/// Non-material subjects (pigs, TNT) and non-bird impacts always use 1.
double effectiveness(std::optional<BirdType> bird, Material material);

/// Thrown when an argument lies outside an operation's domain (unknown id,
/// target behind the slingshot, ...).
class DomainError : public std::domain_error
{
public:
    using std::domain_error::domain_error;
};

} // namespace birdbench
