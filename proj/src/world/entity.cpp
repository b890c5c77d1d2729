#include "openverse/world/entity.hpp"

#include <array>
#include <cmath>

#include "openverse/error.hpp"

namespace openverse {

namespace {

constexpr std::array<std::string_view, 9> kTransformFields = {
    "px", "py", "pz", "rx", "ry", "rz", "sx", "sy", "sz"};

double number_field(const FieldMap& data, std::string_view field, std::string_view path) {
    const std::string where = std::string(path) + "." + std::string(field);
    auto it = data.find(std::string(field));
    if (it == data.end()) {
        throw Error(ErrorCode::InvalidComponent, where, "missing transform field " + where);
    }
    const double* v = std::get_if<double>(&it->second);
    if (v == nullptr) {
        throw Error(ErrorCode::InvalidComponent, where, "transform field " + where + " is not a number");
    }
    if (!std::isfinite(*v)) {
        throw Error(ErrorCode::InvalidComponent, where, "transform field " + where + " is not finite");
    }
    return *v;
}

}  // namespace

double normalize_degrees(double deg) noexcept {
    double r = std::fmod(deg, 360.0);
    if (r < 0) r += 360.0;
    // fmod of a tiny negative value plus 360 rounds up to exactly 360.
    if (r >= 360.0) r = 0.0;
    // Collapse -0.0 so that encodings stay canonical.
    return r == 0.0 ? 0.0 : r;
}

Transform parse_transform(const FieldMap& data, std::string_view path) {
    Transform t;
    t.px = number_field(data, "px", path);
    t.py = number_field(data, "py", path);
    t.pz = number_field(data, "pz", path);
    t.rx = number_field(data, "rx", path);
    t.ry = number_field(data, "ry", path);
    t.rz = number_field(data, "rz", path);
    t.sx = number_field(data, "sx", path);
    t.sy = number_field(data, "sy", path);
    t.sz = number_field(data, "sz", path);
    for (auto [field, value] : {std::pair{"sx", t.sx}, {"sy", t.sy}, {"sz", t.sz}}) {
        if (!(value > 0)) {
            const std::string where = std::string(path) + "." + field;
            throw Error(ErrorCode::InvalidComponent, where, "scale " + where + " must be > 0");
        }
    }
    return t;
}

ComponentState make_transform_component(const Transform& t, std::uint64_t version) {
    ComponentState c;
    c.name = std::string(kTransform);
    c.version = version;
    const std::array<double, 9> values = {t.px,
                                          t.py,
                                          t.pz,
                                          normalize_degrees(t.rx),
                                          normalize_degrees(t.ry),
                                          normalize_degrees(t.rz),
                                          t.sx,
                                          t.sy,
                                          t.sz};
    for (std::size_t i = 0; i < kTransformFields.size(); ++i) {
        c.data.emplace(std::string(kTransformFields[i]), values[i]);
    }
    return c;
}

Transform transform_of(const EntityRecord& entity) {
    auto it = entity.components.find(std::string(kTransform));
    if (it == entity.components.end()) {
        throw Error(ErrorCode::InvalidComponent, entity.entity_id + ".transform",
                    "entity " + entity.entity_id + " has no transform");
    }
    return parse_transform(it->second.data, entity.entity_id + ".transform");
}

EntityRecord apply_component_update(EntityRecord entity, const ComponentState& update,
                                    std::uint64_t update_seq) {
    if (update.name.empty()) {
        throw Error(ErrorCode::InvalidComponent, "name", "component name is empty");
    }
    ComponentState stored;
    if (update.name == kTransform) {
        stored = make_transform_component(parse_transform(update.data), update_seq);
    } else {
        stored = update;
        stored.version = update_seq;
    }
    if (update_seq <= entity.seq) return entity;

    entity.seq = update_seq;
    entity.components[stored.name] = std::move(stored);
    return entity;
}

}  // namespace openverse
