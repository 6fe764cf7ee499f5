// SPDX-License-Identifier: Apache-2.0
#include "birdbench/level.hpp"

#include "json.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace birdbench::level {

namespace {

using nlohmann::json;

constexpr double kWorldWidth = 84.0;
constexpr double kWorldHeight = 48.0;
// Objects may touch the world edge; this absorbs representation error.
constexpr double kBoundsSlack = 1e-9;

[[noreturn]] void schema_error(const std::string &field, const std::string &what)
{
    throw LevelError(LevelError::Kind::schema, field, field + ": " + what);
}

[[noreturn]] void disallowed(const std::string &field, const std::string &value)
{
    throw LevelError(LevelError::Kind::disallowed, field, field + ": object type '" + value + "' is not allowed");
}

const json &member(const json &obj, const char *key, const std::string &path)
{
    if (!obj.is_object())
        schema_error(path, "expected an object");
    const auto it = obj.find(key);
    if (it == obj.end())
        schema_error(path.empty() ? key : path + "." + key, "missing");
    return *it;
}

double number(const json &obj, const char *key, const std::string &path)
{
    const json &v = member(obj, key, path);
    if (!v.is_number())
        schema_error(path.empty() ? key : path + "." + key, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d))
        schema_error(path + "." + key, "must be finite");
    return d;
}

std::string string_of(const json &obj, const char *key, const std::string &path)
{
    const json &v = member(obj, key, path);
    if (!v.is_string())
        schema_error(path.empty() ? key : path + "." + key, "expected a string");
    return v.get<std::string>();
}

geo::Shape parse_shape(const json &j, const std::string &path)
{
    const std::string type = string_of(j, "type", path);
    if (type == "box")
        return geo::Box{number(j, "w", path), number(j, "h", path)};
    if (type == "circle")
        return geo::Circle{number(j, "r", path)};
    if (type == "hollow")
        return geo::HollowBox{number(j, "w", path), number(j, "h", path), number(j, "wall", path)};
    if (type == "polygon") {
        const json &verts = member(j, "vertices", path);
        if (!verts.is_array())
            schema_error(path + ".vertices", "expected an array");
        geo::Polygon poly;
        for (std::size_t i = 0; i < verts.size(); ++i) {
            const json &v = verts[i];
            if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
                schema_error(path + ".vertices[" + std::to_string(i) + "]", "expected [x, y]");
            poly.vertices.push_back({v[0].get<double>(), v[1].get<double>()});
        }
        return poly;
    }
    disallowed(path + ".type", type);
}

json shape_json(const geo::Shape &shape)
{
    json j;
    j["type"] = std::string(geo::shape_tag(shape));
    if (const auto *b = std::get_if<geo::Box>(&shape)) {
        j["w"] = b->width;
        j["h"] = b->height;
    } else if (const auto *c = std::get_if<geo::Circle>(&shape)) {
        j["r"] = c->radius;
    } else if (const auto *h = std::get_if<geo::HollowBox>(&shape)) {
        j["w"] = h->width;
        j["h"] = h->height;
        j["wall"] = h->wall;
    } else if (const auto *p = std::get_if<geo::Polygon>(&shape)) {
        json verts = json::array();
        for (const auto &v : p->vertices)
            verts.push_back({v.x, v.y});
        j["vertices"] = verts;
    }
    return j;
}

void check_inside(const geo::Aabb &box, const std::string &path)
{
    if (box.min.x < -kBoundsSlack || box.max.x > kWorldWidth + kBoundsSlack || box.min.y < -kBoundsSlack ||
        box.max.y > kWorldHeight + kBoundsSlack)
        schema_error(path, "lies outside the world bounds");
}

Level parse(const json &doc)
{
    if (!doc.is_object())
        schema_error("", "document must be a JSON object");
    static const std::set<std::string> known{"id", "slingshot", "birds", "terrain", "objects", "metadata"};
    for (const auto &[key, _] : doc.items())
        if (!known.contains(key))
            schema_error(key, "unknown key");

    Level level;
    level.id = string_of(doc, "id", "");
    if (level.id.empty())
        schema_error("id", "must not be empty");
    const json &sling = member(doc, "slingshot", "");
    level.slingshot = {number(sling, "x", "slingshot"), number(sling, "y", "slingshot")};
    if (level.slingshot.x < 0.0 || level.slingshot.x > kWorldWidth || level.slingshot.y < 0.0 ||
        level.slingshot.y > kWorldHeight)
        schema_error("slingshot", "lies outside the world bounds");

    const json &birds = member(doc, "birds", "");
    if (!birds.is_array())
        schema_error("birds", "expected an array");
    for (std::size_t i = 0; i < birds.size(); ++i) {
        const std::string path = "birds[" + std::to_string(i) + "]";
        if (!birds[i].is_string())
            schema_error(path, "expected a bird name");
        const auto b = parse_bird_type(birds[i].get<std::string>());
        if (!b)
            disallowed(path, birds[i].get<std::string>());
        level.birds.push_back(*b);
    }
    if (level.birds.empty())
        schema_error("birds", "at least one bird is required");

    const json &terrain = member(doc, "terrain", "");
    if (!terrain.is_array())
        schema_error("terrain", "expected an array");
    for (std::size_t i = 0; i < terrain.size(); ++i) {
        const std::string path = "terrain[" + std::to_string(i) + "]";
        TerrainSegment seg{number(terrain[i], "x0", path), number(terrain[i], "x1", path), number(terrain[i], "h", path)};
        if (!(seg.x0 < seg.x1) || seg.x0 < 0.0 || seg.x1 > kWorldWidth)
            schema_error(path, "needs 0 <= x0 < x1 <= world width");
        if (seg.h < 0.0 || seg.h > kWorldHeight)
            schema_error(path + ".h", "outside the world height");
        level.terrain.push_back(seg);
    }
    auto sorted = level.terrain;
    std::sort(sorted.begin(), sorted.end(), [](const auto &a, const auto &b) { return a.x0 < b.x0; });
    for (std::size_t i = 1; i < sorted.size(); ++i)
        if (sorted[i].x0 < sorted[i - 1].x1)
            schema_error("terrain", "segments overlap");

    const json &objects = member(doc, "objects", "");
    if (!objects.is_array())
        schema_error("objects", "expected an array");
    for (std::size_t i = 0; i < objects.size(); ++i) {
        const std::string path = "objects[" + std::to_string(i) + "]";
        const json &o = objects[i];
        ObjectSpec spec;
        const std::string kind = string_of(o, "kind", path);
        if (kind == "block")
            spec.kind = ObjectKind::block;
        else if (kind == "pig")
            spec.kind = ObjectKind::pig;
        else if (kind == "tnt")
            spec.kind = ObjectKind::tnt;
        else
            disallowed(path + ".kind", kind);

        if (o.contains("material")) {
            const std::string mat = string_of(o, "material", path);
            const auto m = parse_material(mat);
            if (!m)
                disallowed(path + ".material", mat);
            spec.material = *m;
        }
        if (spec.kind == ObjectKind::block && spec.material == Material::none)
            schema_error(path + ".material", "blocks need wood, ice or stone");
        if (spec.kind != ObjectKind::block && spec.material != Material::none)
            schema_error(path + ".material", "only blocks carry a material");

        spec.shape = parse_shape(member(o, "shape", path), path + ".shape");
        spec.position = {number(o, "x", path), number(o, "y", path)};
        spec.rotation_deg = o.contains("rot") ? number(o, "rot", path) : 0.0;
        try {
            geo::SceneObject so{{}, spec.kind, spec.material, spec.shape, spec.position, deg_to_rad(spec.rotation_deg)};
            check_inside(geo::bounds(so), path);
        } catch (const DomainError &e) {
            schema_error(path + ".shape", e.what());
        }
        level.objects.push_back(std::move(spec));
    }
    if (level.pig_count() == 0)
        schema_error("objects", "at least one pig is required");

    if (doc.contains("metadata")) {
        const json &meta = doc["metadata"];
        if (!meta.is_object())
            schema_error("metadata", "expected an object");
        for (const auto &[key, value] : meta.items()) {
            if (!value.is_string())
                schema_error("metadata." + key, "expected a string");
            level.metadata[key] = value.get<std::string>();
        }
    }
    return level;
}

} // namespace

int Level::pig_count() const
{
    return static_cast<int>(
        std::count_if(objects.begin(), objects.end(), [](const ObjectSpec &o) { return o.kind == ObjectKind::pig; }));
}

Level load_level(std::string_view document)
{
    json doc;
    try {
        doc = json::parse(document.begin(), document.end());
    } catch (const json::parse_error &e) {
        throw LevelError(LevelError::Kind::parse, "", e.what());
    }
    return parse(doc);
}

Level load_level_file(const std::filesystem::path &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw LevelError(LevelError::Kind::parse, "", "cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return load_level(buf.str());
}

std::vector<Level> load_pack(const std::filesystem::path &dir)
{
    std::vector<std::filesystem::path> files;
    for (const auto &entry : std::filesystem::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".json")
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    std::vector<Level> pack;
    pack.reserve(files.size());
    for (const auto &f : files)
        pack.push_back(load_level_file(f));
    return pack;
}

std::string serialize_level(const Level &level)
{
    json doc;
    doc["id"] = level.id;
    doc["slingshot"] = {{"x", level.slingshot.x}, {"y", level.slingshot.y}};
    json birds = json::array();
    for (auto b : level.birds)
        birds.push_back(std::string(to_string(b)));
    doc["birds"] = birds;
    json terrain = json::array();
    for (const auto &t : level.terrain)
        terrain.push_back({{"x0", t.x0}, {"x1", t.x1}, {"h", t.h}});
    doc["terrain"] = terrain;
    json objects = json::array();
    for (const auto &o : level.objects) {
        json j{{"kind", std::string(to_string(o.kind))},
               {"shape", shape_json(o.shape)},
               {"x", o.position.x},
               {"y", o.position.y},
               {"rot", o.rotation_deg}};
        if (o.material != Material::none)
            j["material"] = std::string(to_string(o.material));
        objects.push_back(j);
    }
    doc["objects"] = objects;
    if (!level.metadata.empty())
        doc["metadata"] = level.metadata;
    return doc.dump(2) + "\n";
}

phys::World build_world(const Level &level, const phys::PhysicsConfig &config, std::uint64_t seed)
{
    phys::World world(config, seed);
    for (const auto &t : level.terrain) {
        phys::BodyDef def;
        def.kind = ObjectKind::terrain;
        def.shape = geo::Box{t.x1 - t.x0, t.h - kTerrainFloor};
        def.position = {0.5 * (t.x0 + t.x1), 0.5 * (t.h + kTerrainFloor)};
        world.add_body(def);
    }
    for (const auto &o : level.objects) {
        phys::BodyDef def;
        def.kind = o.kind;
        def.material = o.material;
        def.shape = o.shape;
        def.position = o.position;
        def.angle = deg_to_rad(o.rotation_deg);
        world.add_body(def);
    }
    world.set_launch_point(level.slingshot);
    world.set_birds(level.birds);
    return world;
}

ObjectId object_body_id(const Level &level, std::size_t object_index)
{
    return make_id(static_cast<std::uint32_t>(level.terrain.size() + object_index + 1));
}

AttemptScore score_attempt(std::span<const phys::DamageEvent> events,
                           int birds_remaining,
                           bool solved,
                           const ScoringRules &rules)
{
    AttemptScore s;
    s.birds_remaining = birds_remaining;
    s.solved = solved;
    std::set<ObjectId> damaged_blocks;
    std::set<ObjectId> destroyed_blocks;
    int tnt = 0;
    for (const auto &e : events) {
        switch (e.kind) {
        case phys::EventKind::pig_killed:
            ++s.pigs_killed;
            break;
        case phys::EventKind::tnt_detonated:
            ++tnt;
            break;
        case phys::EventKind::destroyed:
            if (e.subject_kind == ObjectKind::block)
                destroyed_blocks.insert(e.subject);
            break;
        case phys::EventKind::damaged:
            if (e.subject_kind == ObjectKind::block)
                damaged_blocks.insert(e.subject);
            break;
        }
    }
    long surviving_damaged = 0;
    for (auto id : damaged_blocks)
        if (!destroyed_blocks.contains(id))
            ++surviving_damaged;
    s.damage_points = rules.pig * s.pigs_killed + rules.destroyed_block * static_cast<long>(destroyed_blocks.size()) +
                      rules.damaged_block * surviving_damaged + rules.tnt * tnt;
    s.total = s.damage_points + (solved ? rules.bird_bonus * birds_remaining : 0);
    return s;
}

} // namespace birdbench::level
