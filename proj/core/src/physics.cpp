// SPDX-License-Identifier: Apache-2.0
#include "birdbench/physics.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

namespace birdbench::phys {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------- narrowphase

struct ManifoldPoint
{
    Vec2 point;
    double separation{0.0};
    std::uint32_t feature{0};
};

struct Manifold
{
    Vec2 normal; // from part a to part b
    int count{0};
    ManifoldPoint points[2];
};

struct ClipVertex
{
    Vec2 v;
    std::uint32_t id{0};
};

constexpr std::uint32_t pack_feature(std::uint32_t ia, std::uint32_t ib, std::uint32_t ta, std::uint32_t tb)
{
    return (ia & 0xffu) | ((ib & 0xffu) << 8) | ((ta & 0xffu) << 16) | ((tb & 0xffu) << 24);
}

constexpr std::uint32_t swap_feature(std::uint32_t f)
{
    const std::uint32_t ia = f & 0xffu;
    const std::uint32_t ib = (f >> 8) & 0xffu;
    const std::uint32_t ta = (f >> 16) & 0xffu;
    const std::uint32_t tb = (f >> 24) & 0xffu;
    return pack_feature(ib, ia, tb, ta);
}

constexpr std::uint32_t kVertex = 0;
constexpr std::uint32_t kFace = 1;

bool collide_circles(const geo::ConvexPart &a, const geo::ConvexPart &b, Manifold &m)
{
    const Vec2 d = b.center - a.center;
    const double r = a.radius + b.radius;
    const double dist2 = d.length_squared();
    if (dist2 > r * r)
        return false;
    const double dist = std::sqrt(dist2);
    m.normal = dist > 1e-12 ? d / dist : Vec2{0.0, 1.0};
    const double sep = dist - r;
    m.count = 1;
    m.points[0] = {a.center + m.normal * (a.radius + 0.5 * sep), sep, 0};
    return true;
}

// Normal points from the polygon to the circle.
bool collide_polygon_circle(const geo::ConvexPart &poly, const geo::ConvexPart &circ, Manifold &m)
{
    const Vec2 c = circ.center;
    const double r = circ.radius;
    double best = -kInf;
    std::size_t edge = 0;
    for (std::size_t i = 0; i < poly.count; ++i) {
        const double s = dot(poly.normals[i], c - poly.vertices[i]);
        if (s > r)
            return false;
        if (s > best) {
            best = s;
            edge = i;
        }
    }
    const Vec2 v1 = poly.vertices[edge];
    const Vec2 v2 = poly.vertices[(edge + 1) % poly.count];
    Vec2 n;
    double sep = 0.0;
    std::uint32_t feature = pack_feature(static_cast<std::uint32_t>(edge), 0, kFace, kVertex);
    if (best < 1e-12) {
        n = poly.normals[edge];
        sep = best - r;
    } else {
        const double u1 = dot(c - v1, v2 - v1);
        const double u2 = dot(c - v2, v1 - v2);
        if (u1 <= 0.0 || u2 <= 0.0) {
            const Vec2 corner = u1 <= 0.0 ? v1 : v2;
            const Vec2 d = c - corner;
            const double dist2 = d.length_squared();
            if (dist2 > r * r)
                return false;
            const double dist = std::sqrt(dist2);
            n = dist > 1e-12 ? d / dist : poly.normals[edge];
            sep = dist - r;
            const auto vi = u1 <= 0.0 ? edge : (edge + 1) % poly.count;
            feature = pack_feature(static_cast<std::uint32_t>(vi), 0, kVertex, kVertex);
        } else {
            n = poly.normals[edge];
            sep = best - r;
        }
    }
    m.normal = n;
    m.count = 1;
    m.points[0] = {c - n * (r + 0.5 * sep), sep, feature};
    return true;
}

double find_max_separation(const geo::ConvexPart &p1, const geo::ConvexPart &p2, std::size_t &edge)
{
    double best = -kInf;
    for (std::size_t i = 0; i < p1.count; ++i) {
        const Vec2 n = p1.normals[i];
        const Vec2 v = p1.vertices[i];
        double si = kInf;
        for (std::size_t j = 0; j < p2.count; ++j)
            si = std::min(si, dot(n, p2.vertices[j] - v));
        if (si > best) {
            best = si;
            edge = i;
        }
    }
    return best;
}

void find_incident_edge(ClipVertex out[2], const geo::ConvexPart &ref, std::size_t edge, const geo::ConvexPart &inc)
{
    const Vec2 n = ref.normals[edge];
    std::size_t index = 0;
    double min_dot = kInf;
    for (std::size_t i = 0; i < inc.count; ++i) {
        const double d = dot(n, inc.normals[i]);
        if (d < min_dot) {
            min_dot = d;
            index = i;
        }
    }
    const std::size_t i1 = index;
    const std::size_t i2 = (i1 + 1) % inc.count;
    const auto e = static_cast<std::uint32_t>(edge);
    out[0] = {inc.vertices[i1], pack_feature(e, static_cast<std::uint32_t>(i1), kFace, kVertex)};
    out[1] = {inc.vertices[i2], pack_feature(e, static_cast<std::uint32_t>(i2), kFace, kVertex)};
}

int clip_segment(ClipVertex out[2], const ClipVertex in[2], Vec2 normal, double offset, std::uint32_t vertex_a)
{
    int n = 0;
    const double d0 = dot(normal, in[0].v) - offset;
    const double d1 = dot(normal, in[1].v) - offset;
    if (d0 <= 0.0)
        out[n++] = in[0];
    if (d1 <= 0.0)
        out[n++] = in[1];
    if (d0 * d1 < 0.0) {
        const double interp = d0 / (d0 - d1);
        const std::uint32_t ib = (in[0].id >> 8) & 0xffu;
        out[n++] = {in[0].v + (in[1].v - in[0].v) * interp, pack_feature(vertex_a, ib, kVertex, kFace)};
    }
    return n;
}

bool collide_polygons(const geo::ConvexPart &a, const geo::ConvexPart &b, Manifold &m, double slop)
{
    std::size_t edge_a = 0;
    const double sep_a = find_max_separation(a, b, edge_a);
    if (sep_a > 0.0)
        return false;
    std::size_t edge_b = 0;
    const double sep_b = find_max_separation(b, a, edge_b);
    if (sep_b > 0.0)
        return false;

    const geo::ConvexPart *p1 = &a;
    const geo::ConvexPart *p2 = &b;
    std::size_t edge1 = edge_a;
    bool flip = false;
    if (sep_b > sep_a + 0.1 * slop) {
        p1 = &b;
        p2 = &a;
        edge1 = edge_b;
        flip = true;
    }

    ClipVertex incident[2];
    find_incident_edge(incident, *p1, edge1, *p2);

    const std::size_t iv1 = edge1;
    const std::size_t iv2 = (edge1 + 1) % p1->count;
    const Vec2 v11 = p1->vertices[iv1];
    const Vec2 v12 = p1->vertices[iv2];
    const Vec2 tangent = normalized(v12 - v11);
    const Vec2 normal = perp_right(tangent);
    const double front = dot(normal, v11);
    const double side1 = -dot(tangent, v11);
    const double side2 = dot(tangent, v12);

    ClipVertex c1[2];
    ClipVertex c2[2];
    if (clip_segment(c1, incident, -tangent, side1, static_cast<std::uint32_t>(iv1)) < 2)
        return false;
    if (clip_segment(c2, c1, tangent, side2, static_cast<std::uint32_t>(iv2)) < 2)
        return false;

    m.normal = flip ? -normal : normal;
    m.count = 0;
    for (const auto &cv : c2) {
        const double sep = dot(normal, cv.v) - front;
        if (sep <= 0.0) {
            auto &p = m.points[m.count++];
            p.point = cv.v - normal * (0.5 * sep);
            p.separation = sep;
            p.feature = flip ? swap_feature(cv.id) : cv.id;
        }
    }
    return m.count > 0;
}

bool collide_parts(const geo::ConvexPart &a, const geo::ConvexPart &b, Manifold &m, double slop)
{
    if (a.is_circle && b.is_circle)
        return collide_circles(a, b, m);
    if (!a.is_circle && b.is_circle)
        return collide_polygon_circle(a, b, m);
    if (a.is_circle && !b.is_circle) {
        if (!collide_polygon_circle(b, a, m))
            return false;
        m.normal = -m.normal;
        return true;
    }
    return collide_polygons(a, b, m, slop);
}

bool damageable(const Body &b)
{
    return b.kind == ObjectKind::block || b.kind == ObjectKind::pig || b.kind == ObjectKind::tnt;
}

void hash_bytes(std::uint64_t &h, std::uint64_t v)
{
    for (int i = 0; i < 8; ++i) {
        h ^= (v >> (8 * i)) & 0xffu;
        h *= 0x100000001b3ull;
    }
}

void hash_double(std::uint64_t &h, double v) { hash_bytes(h, std::bit_cast<std::uint64_t>(v)); }

} // namespace

// ------------------------------------------------------------------- config

const MaterialProps &PhysicsConfig::props(Material m) const
{
    switch (m) {
    case Material::wood:
        return wood;
    case Material::ice:
        return ice;
    case Material::stone:
        return stone;
    case Material::none:
        break;
    }
    return wood;
}

const BirdProps &PhysicsConfig::bird(BirdType b) const
{
    switch (b) {
    case BirdType::red:
        return red;
    case BirdType::blue:
        return blue;
    case BirdType::yellow:
        return yellow;
    case BirdType::black:
        return black;
    case BirdType::white:
        return white;
    }
    return red;
}

std::string_view to_string(EventKind k)
{
    switch (k) {
    case EventKind::damaged:
        return "damaged";
    case EventKind::destroyed:
        return "destroyed";
    case EventKind::pig_killed:
        return "pig_killed";
    case EventKind::tnt_detonated:
        return "tnt_detonated";
    }
    return "?";
}

double compute_damage(Material material,
                      double mass,
                      double impulse,
                      std::optional<BirdType> bird,
                      const DamageRules &rules)
{
    if (impulse < 0.0)
        throw DomainError("impulse must be non-negative");
    const double threshold = rules.threshold_per_mass * mass;
    if (impulse <= threshold)
        return 0.0;
    return (impulse - threshold) * rules.gain * effectiveness(bird, material);
}

// --------------------------------------------------------------------- body

Vec2 Body::reference_position() const { return position - rotate(local_centroid, angle); }

geo::SceneObject Body::scene_object() const
{
    return {id, kind, material, shape, reference_position(), angle};
}

geo::Aabb Body::bounds() const
{
    geo::Aabb box = parts.front().transformed(position, angle).bounds();
    for (std::size_t i = 1; i < parts.size(); ++i)
        box.merge(parts[i].transformed(position, angle).bounds());
    return box;
}

// -------------------------------------------------------------------- world

World::World(PhysicsConfig config, std::uint64_t seed) : config_(config), seed_(seed) {}

Body World::make_body(const BodyDef &def, ObjectId id) const
{
    Body b;
    b.id = id;
    b.kind = def.kind;
    b.material = def.material;
    b.shape = def.shape;
    b.bird = def.bird;
    b.angle = def.angle;
    b.velocity = def.velocity;
    b.angular_velocity = def.angular_velocity;

    auto parts = geo::decompose(def.shape);
    double area = 0.0;
    Vec2 weighted;
    double polar = 0.0;
    for (const auto &p : parts) {
        const double a = p.area();
        area += a;
        weighted += p.centroid() * a;
        polar += p.polar_moment_about_origin();
    }
    const Vec2 centroid = weighted / area;
    b.local_centroid = centroid;
    b.position = def.position + rotate(centroid, def.angle);
    for (auto &p : parts)
        p = p.translated(-centroid);
    for (const auto &p : parts) {
        if (p.is_circle)
            b.bounding_radius = std::max(b.bounding_radius, p.center.length() + p.radius);
        else
            for (std::size_t i = 0; i < p.count; ++i)
                b.bounding_radius = std::max(b.bounding_radius, p.vertices[i].length());
    }
    b.parts = std::move(parts);

    MaterialProps props;
    switch (def.kind) {
    case ObjectKind::block:
        props = config_.props(def.material);
        break;
    case ObjectKind::pig:
        props = config_.pig;
        break;
    case ObjectKind::tnt:
        props = config_.tnt;
        break;
    case ObjectKind::terrain:
        props = config_.terrain;
        break;
    case ObjectKind::bird:
        props = {def.bird ? config_.bird(*def.bird).density : 1.0, config_.bird_friction, config_.bird_restitution, 0.0};
        break;
    }
    b.friction = def.friction.value_or(props.friction);
    b.restitution = def.restitution.value_or(props.restitution);

    if (def.kind == ObjectKind::terrain) {
        b.mass = kInf;
        b.inertia = kInf;
        b.velocity = {};
        b.angular_velocity = 0.0;
        b.hp = b.initial_hp = kInf;
        return b;
    }

    const double density = def.density.value_or(props.density);
    if (!(density > 0.0))
        throw DomainError("density must be positive");
    b.mass = density * area;
    b.inertia = density * (polar - area * centroid.length_squared());
    b.inv_mass = 1.0 / b.mass;
    b.inv_inertia = b.inertia > 0.0 ? 1.0 / b.inertia : 0.0;

    switch (def.kind) {
    case ObjectKind::block:
        b.hp = props.hp_per_area * area;
        break;
    case ObjectKind::pig:
        b.hp = config_.pig_hp;
        break;
    case ObjectKind::tnt:
        b.hp = config_.tnt_hp;
        break;
    default:
        b.hp = kInf;
        break;
    }
    if (def.hp)
        b.hp = *def.hp;
    b.initial_hp = b.hp;
    b.alive = b.hp > 0.0;
    return b;
}

ObjectId World::add_body(const BodyDef &def)
{
    const ObjectId id = make_id(next_id_++);
    bodies_.push_back(make_body(def, id));
    return id;
}

ObjectId World::add_body(const BodyDef &def, ObjectId id)
{
    if (to_underlying(id) < next_id_)
        throw DomainError("body id must exceed every id in use");
    next_id_ = to_underlying(id);
    return add_body(def);
}

void World::set_birds(std::vector<BirdType> birds) { birds_.assign(birds.begin(), birds.end()); }

const Body *World::find(ObjectId id) const
{
    const auto it =
        std::lower_bound(bodies_.begin(), bodies_.end(), id, [](const Body &b, ObjectId v) { return b.id < v; });
    return it != bodies_.end() && it->id == id ? &*it : nullptr;
}

std::size_t World::index_of(ObjectId id) const
{
    const auto it =
        std::lower_bound(bodies_.begin(), bodies_.end(), id, [](const Body &b, ObjectId v) { return b.id < v; });
    return it != bodies_.end() && it->id == id ? static_cast<std::size_t>(it - bodies_.begin()) : bodies_.size();
}

int World::living_pigs() const
{
    return static_cast<int>(
        std::count_if(bodies_.begin(), bodies_.end(), [](const Body &b) { return b.kind == ObjectKind::pig && b.alive; }));
}

std::vector<geo::SceneObject> World::scene(bool include_birds) const
{
    std::vector<geo::SceneObject> out;
    out.reserve(bodies_.size());
    for (const auto &b : bodies_) {
        if (!b.alive || (!include_birds && b.kind == ObjectKind::bird))
            continue;
        out.push_back(b.scene_object());
    }
    return out;
}

double World::max_speed() const
{
    double v = 0.0;
    for (const auto &b : bodies_)
        if (!b.is_static() && b.alive)
            v = std::max(v, b.speed_measure());
    return v;
}

void World::collide(std::vector<Contact> &contacts) const
{
    const std::size_t n = bodies_.size();
    std::vector<std::vector<geo::ConvexPart>> parts(n);
    std::vector<geo::Aabb> boxes(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Body &b = bodies_[i];
        parts[i].reserve(b.parts.size());
        for (const auto &p : b.parts)
            parts[i].push_back(p.transformed(b.position, b.angle));
        boxes[i] = parts[i].front().bounds();
        for (std::size_t k = 1; k < parts[i].size(); ++k)
            boxes[i].merge(parts[i][k].bounds());
    }
    for (std::size_t i = 0; i < n; ++i) {
        const Body &a = bodies_[i];
        if (!a.alive)
            continue;
        for (std::size_t j = i + 1; j < n; ++j) {
            const Body &b = bodies_[j];
            if (!b.alive || (a.is_static() && b.is_static()))
                continue;
            if (a.kind == ObjectKind::bird && b.kind == ObjectKind::bird)
                continue;
            if (!boxes[i].overlaps(boxes[j]))
                continue;
            for (std::size_t pa = 0; pa < parts[i].size(); ++pa) {
                for (std::size_t pb = 0; pb < parts[j].size(); ++pb) {
                    if (parts[i].size() * parts[j].size() > 1 && !parts[i][pa].bounds().overlaps(parts[j][pb].bounds()))
                        continue;
                    Manifold m;
                    if (!collide_parts(parts[i][pa], parts[j][pb], m, config_.linear_slop))
                        continue;
                    Contact c;
                    c.a = i;
                    c.b = j;
                    c.part_a = static_cast<std::uint8_t>(pa);
                    c.part_b = static_cast<std::uint8_t>(pb);
                    c.normal = m.normal;
                    c.friction = std::sqrt(a.friction * b.friction);
                    c.restitution = std::max(a.restitution, b.restitution);
                    c.count = m.count;
                    const auto &ppa = parts[i][pa];
                    const auto &ppb = parts[j][pb];
                    if (ppa.is_circle || ppb.is_circle)
                        c.rolling_radius = std::min(ppa.is_circle ? ppa.radius : kInf, ppb.is_circle ? ppb.radius : kInf);
                    for (int k = 0; k < m.count; ++k) {
                        c.points[k].ra = m.points[k].point - a.position;
                        c.points[k].rb = m.points[k].point - b.position;
                        c.points[k].separation = m.points[k].separation;
                        c.points[k].feature = m.points[k].feature;
                    }
                    contacts.push_back(c);
                }
            }
        }
    }
}

double World::max_relative_penetration() const
{
    std::vector<Contact> contacts;
    collide(contacts);
    double worst = 0.0;
    for (const auto &c : contacts) {
        const auto min_dim = [](const Body &b) {
            const auto box = b.bounds();
            return std::min(box.width(), box.height());
        };
        const Body &a = bodies_[c.a];
        const Body &b = bodies_[c.b];
        double dim = kInf;
        if (!a.is_static())
            dim = std::min(dim, min_dim(a));
        if (!b.is_static())
            dim = std::min(dim, min_dim(b));
        for (int k = 0; k < c.count; ++k)
            worst = std::max(worst, -c.points[k].separation / dim);
    }
    return worst;
}

void World::apply_damage(std::size_t index, double amount)
{
    Body &b = bodies_[index];
    if (!(amount > 0.0) || !b.alive || !damageable(b))
        return;
    events_.push_back({step_index_, b.id, b.kind, EventKind::damaged, amount});
    b.hp = b.kind == ObjectKind::tnt ? 0.0 : b.hp - amount;
    if (b.hp > 0.0)
        return;
    b.alive = false;
    switch (b.kind) {
    case ObjectKind::pig:
        events_.push_back({step_index_, b.id, b.kind, EventKind::pig_killed, 0.0});
        break;
    case ObjectKind::tnt:
        events_.push_back({step_index_, b.id, b.kind, EventKind::tnt_detonated, 0.0});
        pending_blasts_.emplace_back(b.position, config_.tnt_blast, std::nullopt, b.id);
        break;
    default:
        events_.push_back({step_index_, b.id, b.kind, EventKind::destroyed, 0.0});
        break;
    }
}

void World::apply_blast(Vec2 center, const BlastSpec &spec, std::optional<BirdType> source, ObjectId exclude)
{
    for (std::size_t i = 0; i < bodies_.size(); ++i) {
        Body &b = bodies_[i];
        if (!b.alive || b.is_static() || b.id == exclude)
            continue;
        const Vec2 d = b.position - center;
        const double dist = d.length();
        if (dist >= spec.radius)
            continue;
        const double impulse = spec.impulse * (1.0 - dist / spec.radius);
        const Vec2 dir = dist > 1e-9 ? d / dist : Vec2{0.0, 1.0};
        b.velocity += dir * (impulse * b.inv_mass);
        apply_damage(i, compute_damage(b.material, b.mass, impulse, source, config_.damage));
    }
}

void World::process_deaths()
{
    // Blasts can queue further blasts (TNT chains); drain FIFO.
    for (std::size_t k = 0; k < pending_blasts_.size(); ++k) {
        const auto [center, spec, source, exclude] = pending_blasts_[k];
        apply_blast(center, spec, source, exclude);
    }
    pending_blasts_.clear();
}

void World::remove_out_of_bounds()
{
    const double m = config_.kill_margin;
    for (std::size_t i = 0; i < bodies_.size(); ++i) {
        Body &b = bodies_[i];
        if (!b.alive || b.is_static())
            continue;
        const bool out = b.position.x < -m || b.position.x > config_.world_size.x + m || b.position.y < -m;
        if (!out)
            continue;
        if (b.kind == ObjectKind::bird)
            b.alive = false;
        else
            apply_damage(i, b.hp);
    }
}

void World::remove_dead()
{
    std::erase_if(bodies_, [](const Body &b) { return !b.alive; });
}

void World::step(double dt)
{
    if (std::abs(dt - config_.dt) > 1e-12)
        throw std::invalid_argument("step dt must equal the configured fixed step");
    const double inv_dt = 1.0 / dt;

    for (auto &b : bodies_) {
        if (b.is_static())
            continue;
        b.velocity.y -= config_.gravity * dt;
        b.angular_velocity *= 1.0 / (1.0 + dt * config_.angular_damping);
    }

    std::vector<Contact> contacts;
    collide(contacts);

    std::map<ContactKey, std::pair<double, double>> next_cache;
    for (auto &c : contacts) {
        const Body &a = bodies_[c.a];
        const Body &b = bodies_[c.b];
        const Vec2 n = c.normal;
        const Vec2 t = perp_right(n);
        double approach = 0.0;
        for (int k = 0; k < c.count; ++k) {
            auto &p = c.points[k];
            const double rna = cross(p.ra, n);
            const double rnb = cross(p.rb, n);
            const double kn = a.inv_mass + b.inv_mass + a.inv_inertia * rna * rna + b.inv_inertia * rnb * rnb;
            p.normal_mass = kn > 0.0 ? 1.0 / kn : 0.0;
            const double rta = cross(p.ra, t);
            const double rtb = cross(p.rb, t);
            const double kt = a.inv_mass + b.inv_mass + a.inv_inertia * rta * rta + b.inv_inertia * rtb * rtb;
            p.tangent_mass = kt > 0.0 ? 1.0 / kt : 0.0;

            const Vec2 dv =
                b.velocity + cross(b.angular_velocity, p.rb) - a.velocity - cross(a.angular_velocity, p.ra);
            const double vn = dot(dv, n);
            p.velocity_bias = vn < -config_.restitution_threshold ? -c.restitution * vn : 0.0;
            approach = std::max(approach, -vn);

            const ContactKey key{to_underlying(a.id), to_underlying(b.id), c.part_a, c.part_b, p.feature};
            if (auto it = warm_cache_.find(key); it != warm_cache_.end()) {
                p.normal_impulse = it->second.first;
                p.tangent_impulse = it->second.second;
            }
        }
        const double inv_mass_sum = a.inv_mass + b.inv_mass;
        c.impact_impulse = inv_mass_sum > 0.0 ? approach / inv_mass_sum : 0.0;
    }

    auto apply = [this](Contact &c, Vec2 impulse, const ContactPoint &p) {
        Body &a = bodies_[c.a];
        Body &b = bodies_[c.b];
        a.velocity -= impulse * a.inv_mass;
        a.angular_velocity -= a.inv_inertia * cross(p.ra, impulse);
        b.velocity += impulse * b.inv_mass;
        b.angular_velocity += b.inv_inertia * cross(p.rb, impulse);
    };

    // Warm start.
    for (auto &c : contacts) {
        const Vec2 t = perp_right(c.normal);
        for (int k = 0; k < c.count; ++k) {
            const auto &p = c.points[k];
            apply(c, c.normal * p.normal_impulse + t * p.tangent_impulse, p);
        }
    }

    pseudo_velocity_.assign(bodies_.size(), Vec2{});
    pseudo_angular_.assign(bodies_.size(), 0.0);

    for (int iter = 0; iter < config_.velocity_iterations; ++iter) {
        for (auto &c : contacts) {
            const Vec2 n = c.normal;
            const Vec2 t = perp_right(n);
            if (c.rolling_radius > 0.0) {
                Body &a = bodies_[c.a];
                Body &b = bodies_[c.b];
                const double k = a.inv_inertia + b.inv_inertia;
                if (k > 0.0) {
                    double load = 0.0;
                    for (int q = 0; q < c.count; ++q)
                        load += c.points[q].normal_impulse;
                    const double max_impulse = config_.rolling_resistance * c.rolling_radius * load;
                    const double old = c.rolling_impulse;
                    c.rolling_impulse =
                        std::clamp(old - (b.angular_velocity - a.angular_velocity) / k, -max_impulse, max_impulse);
                    const double delta = c.rolling_impulse - old;
                    a.angular_velocity -= a.inv_inertia * delta;
                    b.angular_velocity += b.inv_inertia * delta;
                }
            }
            for (int k = 0; k < c.count; ++k) {
                auto &p = c.points[k];
                const Body &a = bodies_[c.a];
                const Body &b = bodies_[c.b];
                const Vec2 dv =
                    b.velocity + cross(b.angular_velocity, p.rb) - a.velocity - cross(a.angular_velocity, p.ra);
                const double vt = dot(dv, t);
                const double max_friction = c.friction * p.normal_impulse;
                const double old = p.tangent_impulse;
                p.tangent_impulse = std::clamp(old - p.tangent_mass * vt, -max_friction, max_friction);
                apply(c, t * (p.tangent_impulse - old), p);
            }
            for (int k = 0; k < c.count; ++k) {
                auto &p = c.points[k];
                const Body &a = bodies_[c.a];
                const Body &b = bodies_[c.b];
                const Vec2 dv =
                    b.velocity + cross(b.angular_velocity, p.rb) - a.velocity - cross(a.angular_velocity, p.ra);
                const double vn = dot(dv, n);
                const double old = p.normal_impulse;
                p.normal_impulse = std::max(old - p.normal_mass * (vn - p.velocity_bias), 0.0);
                apply(c, n * (p.normal_impulse - old), p);
            }
            // Split-impulse position correction on pseudo velocities.
            for (int k = 0; k < c.count; ++k) {
                auto &p = c.points[k];
                const Body &a = bodies_[c.a];
                const Body &b = bodies_[c.b];
                const Vec2 dvp = pseudo_velocity_[c.b] + cross(pseudo_angular_[c.b], p.rb) - pseudo_velocity_[c.a] -
                                 cross(pseudo_angular_[c.a], p.ra);
                const double vn = dot(dvp, n);
                const double bias = config_.baumgarte * inv_dt * std::max(0.0, -p.separation - config_.linear_slop);
                const double old = p.bias_impulse;
                p.bias_impulse = std::max(old - p.normal_mass * (vn - bias), 0.0);
                const Vec2 impulse = n * (p.bias_impulse - old);
                pseudo_velocity_[c.a] -= impulse * a.inv_mass;
                pseudo_angular_[c.a] -= a.inv_inertia * cross(p.ra, impulse);
                pseudo_velocity_[c.b] += impulse * b.inv_mass;
                pseudo_angular_[c.b] += b.inv_inertia * cross(p.rb, impulse);
            }
        }
    }

    for (std::size_t i = 0; i < bodies_.size(); ++i) {
        Body &b = bodies_[i];
        if (b.is_static())
            continue;
        b.position += (b.velocity + pseudo_velocity_[i]) * dt;
        b.angle += (b.angular_velocity + pseudo_angular_[i]) * dt;
    }

    for (const auto &c : contacts) {
        for (int k = 0; k < c.count; ++k) {
            const auto &p = c.points[k];
            next_cache[{to_underlying(bodies_[c.a].id), to_underlying(bodies_[c.b].id), c.part_a, c.part_b,
                        p.feature}] = {p.normal_impulse, p.tangent_impulse};
        }
    }
    warm_cache_ = std::move(next_cache);

    // Impact damage, in contact order (sorted by body-id pair).
    for (const auto &c : contacts) {
        Body &a = bodies_[c.a];
        Body &b = bodies_[c.b];
        if (a.explodes_on_contact && b.kind != ObjectKind::bird && a.alive) {
            a.alive = false;
            pending_blasts_.emplace_back(a.position, config_.egg_blast, a.bird, a.id);
        }
        if (b.explodes_on_contact && a.kind != ObjectKind::bird && b.alive) {
            b.alive = false;
            pending_blasts_.emplace_back(b.position, config_.egg_blast, b.bird, b.id);
        }
        if (c.impact_impulse <= 0.0)
            continue;
        const auto source_for = [](const Body &other) {
            return other.kind == ObjectKind::bird ? other.bird : std::nullopt;
        };
        apply_damage(c.a, compute_damage(a.material, a.mass, c.impact_impulse, source_for(b), config_.damage));
        apply_damage(c.b, compute_damage(b.material, b.mass, c.impact_impulse, source_for(a), config_.damage));
    }
    process_deaths();
    remove_out_of_bounds();
    process_deaths();
    remove_dead();

    time_ += dt;
    ++step_index_;
}

void World::launch_bird(double angle, double speed_fraction)
{
    if (active_)
        throw IllegalActionError("a bird is already in flight");
    if (birds_.empty())
        throw OutOfBirdsError();
    if (!(speed_fraction >= 0.0 && speed_fraction <= 1.0))
        throw DomainError("speed fraction must lie in [0, 1]");
    if (!std::isfinite(angle))
        throw DomainError("launch angle must be finite");
    const BirdType type = birds_.front();
    birds_.pop_front();
    BodyDef def;
    def.kind = ObjectKind::bird;
    def.bird = type;
    def.shape = geo::Circle{config_.bird(type).radius};
    def.position = launch_point_;
    const double speed = config_.v_max * speed_fraction;
    def.velocity = {speed * std::cos(angle), speed * std::sin(angle)};
    const ObjectId id = add_body(def);
    active_ = ActiveBird{id, type, ability_of(type) != Ability::none};
}

void World::activate_ability()
{
    if (!active_)
        throw IllegalActionError("no bird in flight");
    if (ability_of(active_->type) == Ability::none)
        throw IllegalActionError("bird has no ability");
    if (!active_->tap_armed)
        throw IllegalActionError("ability already used");
    const std::size_t idx = index_of(active_->id);
    if (idx == bodies_.size())
        throw IllegalActionError("bird is no longer in the world");

    const Body bird = bodies_[idx];
    switch (ability_of(active_->type)) {
    case Ability::split3: {
        bodies_[idx].alive = false;
        remove_dead();
        const double speed = bird.velocity.length();
        const double heading = std::atan2(bird.velocity.y, bird.velocity.x);
        const double radius = config_.bird(BirdType::blue).radius;
        const double density = bird.mass / 3.0 / (kPi * radius * radius);
        ObjectId middle{};
        for (int k = -1; k <= 1; ++k) {
            const double h = heading + k * config_.blue_split_angle;
            BodyDef def;
            def.kind = ObjectKind::bird;
            def.bird = BirdType::blue;
            def.shape = geo::Circle{radius};
            def.position = bird.position;
            def.velocity = {speed * std::cos(h), speed * std::sin(h)};
            def.density = density;
            const ObjectId id = add_body(def);
            if (k == 0)
                middle = id;
        }
        active_->id = middle;
        break;
    }
    case Ability::boost:
        bodies_[idx].velocity *= config_.yellow_boost;
        break;
    case Ability::blast:
        bodies_[idx].alive = false;
        apply_blast(bird.position, config_.black_blast, BirdType::black, bird.id);
        process_deaths();
        remove_dead();
        break;
    case Ability::egg_bomb: {
        bodies_[idx].velocity.y = config_.white_lift_speed;
        BodyDef egg;
        egg.kind = ObjectKind::bird;
        egg.bird = BirdType::white;
        egg.shape = geo::Circle{config_.egg_radius};
        egg.position = bird.position - Vec2{0.0, config_.bird(BirdType::white).radius + config_.egg_radius + 0.01};
        egg.velocity = {0.0, -config_.egg_speed};
        egg.density = config_.egg_density;
        const ObjectId id = add_body(egg);
        bodies_[index_of(id)].explodes_on_contact = true;
        break;
    }
    case Ability::none:
        break;
    }
    active_->tap_armed = false;
}

void World::end_shot()
{
    std::erase_if(bodies_, [](const Body &b) { return b.kind == ObjectKind::bird; });
    active_.reset();
}

std::uint64_t World::state_hash() const
{
    std::uint64_t h = 0xcbf29ce484222325ull;
    hash_bytes(h, static_cast<std::uint64_t>(step_index_));
    hash_double(h, time_);
    for (const auto &b : bodies_) {
        hash_bytes(h, to_underlying(b.id));
        hash_bytes(h, static_cast<std::uint64_t>(b.kind));
        hash_double(h, b.position.x);
        hash_double(h, b.position.y);
        hash_double(h, b.angle);
        hash_double(h, b.velocity.x);
        hash_double(h, b.velocity.y);
        hash_double(h, b.angular_velocity);
        hash_double(h, b.hp);
        hash_bytes(h, b.alive ? 1 : 0);
    }
    hash_bytes(h, events_.size());
    for (const auto &e : events_) {
        hash_bytes(h, static_cast<std::uint64_t>(e.step));
        hash_bytes(h, to_underlying(e.subject));
        hash_bytes(h, static_cast<std::uint64_t>(e.kind));
        hash_double(h, e.amount);
    }
    for (auto b : birds_)
        hash_bytes(h, static_cast<std::uint64_t>(b));
    if (active_) {
        hash_bytes(h, to_underlying(active_->id));
        hash_bytes(h, active_->tap_armed ? 1 : 0);
    }
    return h;
}

// ------------------------------------------------------------------- settle

SettleResult settle(World &world, const SettleParams &params)
{
    if (!(params.v_eps > 0.0))
        throw std::invalid_argument("settle v_eps must be positive");
    if (params.k_steps < 1)
        throw std::invalid_argument("settle k_steps must be at least 1");
    const double dt = world.config().dt;
    const auto max_steps = static_cast<int>(std::llround(params.t_cap / dt));
    int quiet = 0;
    int steps = 0;
    while (steps < max_steps) {
        world.step(dt);
        ++steps;
        if (world.max_speed() < params.v_eps) {
            if (++quiet >= params.k_steps)
                return {steps, true};
        } else {
            quiet = 0;
        }
    }
    return {steps, false};
}

ShotOutcome simulate_shot(World &world, const ShotCommand &shot, const SettleParams &params)
{
    ShotOutcome out;
    out.first_event = world.events().size();
    world.launch_bird(shot.angle, shot.speed_fraction);
    const double dt = world.config().dt;
    const auto cap = static_cast<int>(std::llround(params.t_cap / dt));
    if (shot.tap_ms > 0) {
        const auto tap_step = static_cast<int>(std::ceil(shot.tap_ms / 1000.0 / dt - 1e-9));
        while (out.steps < tap_step && out.steps < cap) {
            world.step(dt);
            ++out.steps;
        }
        const auto &active = world.active_bird();
        if (out.steps == tap_step && active && active->tap_armed && world.find(active->id)) {
            world.activate_ability();
            out.tapped = true;
        }
    }
    SettleParams rest = params;
    rest.t_cap = std::max(0.0, params.t_cap - out.steps * dt);
    out.steps += settle(world, rest).steps_taken;
    out.sim_seconds = out.steps * dt;
    world.end_shot();
    return out;
}

} // namespace birdbench::phys
