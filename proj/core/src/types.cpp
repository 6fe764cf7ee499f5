// SPDX-License-Identifier: Apache-2.0
#include "birdbench/types.hpp"

#include <array>
#include <utility>

namespace birdbench {

namespace {

constexpr std::array<std::pair<ObjectKind, std::string_view>, 5> kKinds{{
    {ObjectKind::block, "block"},
    {ObjectKind::pig, "pig"},
    {ObjectKind::bird, "bird"},
    {ObjectKind::tnt, "tnt"},
    {ObjectKind::terrain, "terrain"},
}};

constexpr std::array<std::pair<Material, std::string_view>, 4> kMaterials{{
    {Material::wood, "wood"},
    {Material::ice, "ice"},
    {Material::stone, "stone"},
    {Material::none, "none"},
}};

constexpr std::array<std::pair<BirdType, std::string_view>, 5> kBirds{{
    {BirdType::red, "red"},
    {BirdType::blue, "blue"},
    {BirdType::yellow, "yellow"},
    {BirdType::black, "black"},
    {BirdType::white, "white"},
}};

template <typename E, std::size_t N>
std::string_view name_of(const std::array<std::pair<E, std::string_view>, N> &table, E value)
{
    for (const auto &[e, name] : table)
        if (e == value)
            return name;
    return "?";
}

template <typename E, std::size_t N>
std::optional<E> value_of(const std::array<std::pair<E, std::string_view>, N> &table, std::string_view s)
{
    for (const auto &[e, name] : table)
        if (name == s)
            return e;
    return std::nullopt;
}

} // namespace

std::string_view to_string(ObjectKind k) { return name_of(kKinds, k); }
std::string_view to_string(Material m) { return name_of(kMaterials, m); }
std::string_view to_string(BirdType b) { return name_of(kBirds, b); }

std::string_view to_string(Ability a)
{
    switch (a) {
    case Ability::none:
        return "none";
    case Ability::split3:
        return "split3";
    case Ability::boost:
        return "boost";
    case Ability::blast:
        return "blast";
    case Ability::egg_bomb:
        return "egg_bomb";
    }
    return "?";
}

std::optional<ObjectKind> parse_object_kind(std::string_view s) { return value_of(kKinds, s); }
std::optional<Material> parse_material(std::string_view s) { return value_of(kMaterials, s); }
std::optional<BirdType> parse_bird_type(std::string_view s) { return value_of(kBirds, s); }

double effectiveness(std::optional<BirdType> bird, Material material)
{
    if (!bird || material == Material::none)
        return 1.0;
    constexpr double strong = 2.0;
    constexpr double weak = 0.75;
    switch (*bird) {
    case BirdType::red:
        return 1.0;
    case BirdType::blue:
        return material == Material::ice ? strong : weak;
    case BirdType::yellow:
        if (material == Material::wood)
            return strong;
        return material == Material::stone ? weak : 1.0;
    case BirdType::black:
        return material == Material::stone ? strong : 1.0;
    case BirdType::white:
        return material == Material::stone ? weak : 1.0;
    }
    return 1.0;
}

} // namespace birdbench
