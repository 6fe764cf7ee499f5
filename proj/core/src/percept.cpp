// SPDX-License-Identifier: Apache-2.0
#include "birdbench/percept.hpp"

#include "json_codec.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace birdbench::proto {

namespace {

double tenth(double v) { return std::round(v * 10.0) / 10.0; }

geo::Shape scale_shape(const geo::Shape &shape, double s, bool quantise)
{
    const auto q = [&](double v) { return quantise ? tenth(v * s) : v * s; };
    if (const auto *b = std::get_if<geo::Box>(&shape))
        return geo::Box{q(b->width), q(b->height)};
    if (const auto *c = std::get_if<geo::Circle>(&shape))
        return geo::Circle{q(c->radius)};
    if (const auto *h = std::get_if<geo::HollowBox>(&shape))
        return geo::HollowBox{q(h->width), q(h->height), q(h->wall)};
    geo::Polygon p = std::get<geo::Polygon>(shape);
    for (auto &v : p.vertices)
        v = {q(v.x), q(v.y)};
    return p;
}

} // namespace

ScreenMap ScreenMap::for_world(Vec2 world_size, int width, int height)
{
    return {width / world_size.x, width, height};
}

std::string_view to_string(LevelState s)
{
    switch (s) {
    case LevelState::playing:
        return "playing";
    case LevelState::solved:
        return "solved";
    case LevelState::lost:
        return "lost";
    }
    return "?";
}

std::optional<LevelState> parse_level_state(std::string_view s)
{
    if (s == "playing")
        return LevelState::playing;
    if (s == "solved")
        return LevelState::solved;
    if (s == "lost")
        return LevelState::lost;
    return std::nullopt;
}

std::array<int, 4> screen_bounds(const geo::Aabb &box, const ScreenMap &map)
{
    const Vec2 top_left = map.to_screen({box.min.x, box.max.y});
    const Vec2 bottom_right = map.to_screen({box.max.x, box.min.y});
    const auto clamp_x = [&](double v) { return static_cast<int>(std::clamp(v, 0.0, double(map.width))); };
    const auto clamp_y = [&](double v) { return static_cast<int>(std::clamp(v, 0.0, double(map.height))); };
    return {clamp_x(std::floor(top_left.x + kBoundsSnap)), clamp_y(std::floor(top_left.y + kBoundsSnap)),
            clamp_x(std::ceil(bottom_right.x - kBoundsSnap)), clamp_y(std::ceil(bottom_right.y - kBoundsSnap))};
}

Percept snapshot_percept(const phys::World &world,
                         const ScreenMap &map,
                         LevelState state,
                         long current_score,
                         double time_left,
                         int level_index)
{
    Percept p;
    p.level = level_index;
    for (const auto &b : world.bodies()) {
        if (!b.alive || b.kind == ObjectKind::bird)
            continue;
        PerceptObject o;
        o.id = b.id;
        o.kind = b.kind;
        o.material = b.material;
        o.bounds = screen_bounds(b.bounds(), map);
        o.shape = scale_shape(b.shape, map.scale, true);
        const Vec2 c = map.to_screen(b.reference_position());
        o.center = {tenth(c.x), tenth(c.y)};
        o.angle_deg = tenth(rad_to_deg(b.angle));
        if (o.angle_deg == 0.0)
            o.angle_deg = 0.0; // no negative zero on the wire
        p.objects.push_back(std::move(o));
    }
    p.birds_remaining.assign(world.birds_queue().begin(), world.birds_queue().end());
    if (!p.birds_remaining.empty())
        p.current_bird = p.birds_remaining.front();
    p.state = state;
    p.current_score = current_score;
    p.time_left = time_left;
    const Vec2 sling = map.to_screen(world.launch_point());
    p.slingshot = {tenth(sling.x), tenth(sling.y)};
    return p;
}

std::vector<geo::SceneObject> percept_scene(const Percept &p, const ScreenMap &map)
{
    std::vector<geo::SceneObject> scene;
    scene.reserve(p.objects.size());
    for (const auto &o : p.objects)
        scene.push_back({o.id, o.kind, o.material, scale_shape(o.shape, 1.0 / map.scale, false), map.to_world(o.center),
                         deg_to_rad(o.angle_deg)});
    return scene;
}

std::string percept_to_json(const Percept &p) { return codec::to_value(p).dump(); }

Percept percept_from_json(std::string_view document)
{
    try {
        return codec::percept_from_value(codec::json::parse(document.begin(), document.end()));
    } catch (const codec::json::exception &e) {
        throw std::invalid_argument(std::string("bad percept: ") + e.what());
    }
}

// -------------------------------------------------------------------- codec

namespace codec {

namespace {

json shape_fields(const geo::Shape &shape)
{
    json j = json::object();
    if (const auto *b = std::get_if<geo::Box>(&shape)) {
        j["size"] = {b->width, b->height};
    } else if (const auto *c = std::get_if<geo::Circle>(&shape)) {
        j["radius"] = c->radius;
    } else if (const auto *h = std::get_if<geo::HollowBox>(&shape)) {
        j["size"] = {h->width, h->height};
        j["wall"] = h->wall;
    } else if (const auto *poly = std::get_if<geo::Polygon>(&shape)) {
        json verts = json::array();
        for (const auto &v : poly->vertices)
            verts.push_back({v.x, v.y});
        j["vertices"] = verts;
    }
    return j;
}

geo::Shape shape_from(const json &o)
{
    const std::string tag = o.at("shape").get<std::string>();
    if (tag == "box")
        return geo::Box{o.at("size").at(0).get<double>(), o.at("size").at(1).get<double>()};
    if (tag == "circle")
        return geo::Circle{o.at("radius").get<double>()};
    if (tag == "hollow")
        return geo::HollowBox{o.at("size").at(0).get<double>(), o.at("size").at(1).get<double>(),
                              o.at("wall").get<double>()};
    if (tag == "polygon") {
        geo::Polygon p;
        for (const auto &v : o.at("vertices"))
            p.vertices.push_back({v.at(0).get<double>(), v.at(1).get<double>()});
        return p;
    }
    throw std::invalid_argument("unknown shape tag " + tag);
}

template <typename E, typename F>
E parse_enum(const json &j, F parse)
{
    const auto s = j.get<std::string>();
    const auto v = parse(s);
    if (!v)
        throw std::invalid_argument("unknown value " + s);
    return *v;
}

} // namespace

json to_value(const Percept &p)
{
    json objects = json::array();
    for (const auto &o : p.objects) {
        json j = shape_fields(o.shape);
        j["id"] = to_underlying(o.id);
        j["kind"] = std::string(to_string(o.kind));
        j["material"] = std::string(to_string(o.material));
        j["bounds"] = o.bounds;
        j["shape"] = std::string(geo::shape_tag(o.shape));
        j["center"] = {o.center.x, o.center.y};
        j["angle"] = o.angle_deg;
        objects.push_back(std::move(j));
    }
    json birds = json::array();
    for (auto b : p.birds_remaining)
        birds.push_back(std::string(to_string(b)));
    return json{{"level", p.level},
                {"objects", objects},
                {"current_bird", p.current_bird ? json(std::string(to_string(*p.current_bird))) : json(nullptr)},
                {"birds_remaining", birds},
                {"level_state", std::string(to_string(p.state))},
                {"current_score", p.current_score},
                {"time_left", p.time_left},
                {"slingshot", {p.slingshot.x, p.slingshot.y}}};
}

Percept percept_from_value(const json &j)
{
    Percept p;
    p.level = j.at("level").get<int>();
    for (const auto &o : j.at("objects")) {
        PerceptObject po;
        po.id = make_id(o.at("id").get<std::uint32_t>());
        po.kind = parse_enum<ObjectKind>(o.at("kind"), parse_object_kind);
        po.material = parse_enum<Material>(o.at("material"), parse_material);
        po.bounds = o.at("bounds").get<std::array<int, 4>>();
        po.shape = shape_from(o);
        po.center = {o.at("center").at(0).get<double>(), o.at("center").at(1).get<double>()};
        po.angle_deg = o.at("angle").get<double>();
        p.objects.push_back(std::move(po));
    }
    if (!j.at("current_bird").is_null())
        p.current_bird = parse_enum<BirdType>(j.at("current_bird"), parse_bird_type);
    for (const auto &b : j.at("birds_remaining"))
        p.birds_remaining.push_back(parse_enum<BirdType>(b, parse_bird_type));
    p.state = parse_enum<LevelState>(j.at("level_state"), parse_level_state);
    p.current_score = j.at("current_score").get<long>();
    p.time_left = j.at("time_left").get<double>();
    p.slingshot = {j.at("slingshot").at(0).get<double>(), j.at("slingshot").at(1).get<double>()};
    return p;
}

json to_value(const level::AttemptScore &s)
{
    return json{{"damage_points", s.damage_points},
                {"pigs_killed", s.pigs_killed},
                {"birds_remaining", s.birds_remaining},
                {"solved", s.solved},
                {"total", s.total}};
}

level::AttemptScore score_from_value(const json &j)
{
    level::AttemptScore s;
    s.damage_points = j.at("damage_points").get<long>();
    s.pigs_killed = j.at("pigs_killed").get<int>();
    s.birds_remaining = j.at("birds_remaining").get<int>();
    s.solved = j.at("solved").get<bool>();
    s.total = j.at("total").get<long>();
    return s;
}

json to_value(const ScreenMap &m) { return json{{"scale", m.scale}, {"width", m.width}, {"height", m.height}}; }

ScreenMap screen_map_from_value(const json &j)
{
    return {j.at("scale").get<double>(), j.at("width").get<int>(), j.at("height").get<int>()};
}

} // namespace codec

} // namespace birdbench::proto
