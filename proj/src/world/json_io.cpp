#include "openverse/world/json_io.hpp"

#include <fstream>
#include <sstream>

namespace openverse {

namespace {

struct Codes {
    ErrorCode missing;
    ErrorCode type;
};

Codes codes_for(ErrorCode code) {
    if (code == ErrorCode::SyntaxError || code == ErrorCode::MissingField) {
        return {ErrorCode::MissingField, ErrorCode::SyntaxError};
    }
    return {code, code};
}

const json& require(const json& j, const char* key, const std::string& path, Codes codes) {
    if (!j.is_object()) {
        throw Error(codes.type, path, path + " must be an object");
    }
    auto it = j.find(key);
    if (it == j.end()) {
        const std::string where = path.empty() ? key : path + "." + key;
        throw Error(codes.missing, where, "missing field " + where);
    }
    return *it;
}

std::string join(const std::string& path, const char* key) {
    return path.empty() ? std::string(key) : path + "." + key;
}

std::string string_at(const json& j, const char* key, const std::string& path, Codes codes) {
    const json& v = require(j, key, path, codes);
    if (!v.is_string()) {
        throw Error(codes.type, join(path, key), join(path, key) + " must be a string");
    }
    return v.get<std::string>();
}

bool bool_or(const json& j, const char* key, bool fallback, const std::string& path, Codes codes) {
    auto it = j.find(key);
    if (it == j.end()) return fallback;
    if (!it->is_boolean()) {
        throw Error(codes.type, join(path, key), join(path, key) + " must be a boolean");
    }
    return it->get<bool>();
}

std::uint64_t uint_or(const json& j, const char* key, std::uint64_t fallback,
                      const std::string& path, Codes codes) {
    auto it = j.find(key);
    if (it == j.end()) return fallback;
    if (!it->is_number_unsigned() && !(it->is_number_integer() && it->get<std::int64_t>() >= 0)) {
        throw Error(codes.type, join(path, key), join(path, key) + " must be an unsigned integer");
    }
    return it->get<std::uint64_t>();
}

double number_at(const json& j, const char* key, const std::string& path, Codes codes) {
    const json& v = require(j, key, path, codes);
    if (!v.is_number()) {
        throw Error(codes.type, join(path, key), join(path, key) + " must be a number");
    }
    return v.get<double>();
}

const json& array_at(const json& j, const char* key, const std::string& path, Codes codes) {
    const json& v = require(j, key, path, codes);
    if (!v.is_array()) {
        throw Error(codes.type, join(path, key), join(path, key) + " must be an array");
    }
    return v;
}

std::string index_path(const char* key, std::size_t i) {
    return std::string(key) + "[" + std::to_string(i) + "]";
}

}  // namespace

json to_json(const FieldMap& data) {
    json j = json::object();
    for (const auto& [key, value] : data) {
        std::visit([&](const auto& v) { j[key] = v; }, value);
    }
    return j;
}

FieldMap field_map_from_json(const json& j, const std::string& path, ErrorCode code) {
    const Codes codes = codes_for(code);
    if (!j.is_object()) {
        throw Error(codes.type, path, path + " must be an object");
    }
    FieldMap out;
    for (const auto& [key, value] : j.items()) {
        if (value.is_number()) {
            out.emplace(key, value.get<double>());
        } else if (value.is_string()) {
            out.emplace(key, value.get<std::string>());
        } else if (value.is_boolean()) {
            out.emplace(key, value.get<bool>());
        } else {
            throw Error(codes.type, join(path, key.c_str()),
                        join(path, key.c_str()) + " must be a number, string or boolean");
        }
    }
    return out;
}

json to_json(const Transform& t) {
    return to_json(make_transform_component(t).data);
}

Transform transform_from_json(const json& j, const std::string& path, ErrorCode code) {
    const Codes codes = codes_for(code);
    Transform t;
    t.px = number_at(j, "px", path, codes);
    t.py = number_at(j, "py", path, codes);
    t.pz = number_at(j, "pz", path, codes);
    t.rx = number_at(j, "rx", path, codes);
    t.ry = number_at(j, "ry", path, codes);
    t.rz = number_at(j, "rz", path, codes);
    t.sx = number_at(j, "sx", path, codes);
    t.sy = number_at(j, "sy", path, codes);
    t.sz = number_at(j, "sz", path, codes);
    return t;
}

json to_json(const EntityRecord& entity) {
    json components = json::object();
    for (const auto& [name, component] : entity.components) {
        components[name] = {{"data", to_json(component.data)}, {"version", component.version}};
    }
    return {{"entity_id", entity.entity_id},
            {"owner", entity.owner},
            {"creator", entity.creator},
            {"seq", entity.seq},
            {"persistent", entity.persistent},
            {"transferable", entity.transferable},
            {"components", std::move(components)}};
}

EntityRecord entity_from_json(const json& j, const std::string& path, ErrorCode code) {
    const Codes codes = codes_for(code);
    EntityRecord e;
    e.entity_id = string_at(j, "entity_id", path, codes);
    if (j.contains("owner")) e.owner = string_at(j, "owner", path, codes);
    if (j.contains("creator")) e.creator = string_at(j, "creator", path, codes);
    e.seq = uint_or(j, "seq", 0, path, codes);
    e.persistent = bool_or(j, "persistent", false, path, codes);
    e.transferable = bool_or(j, "transferable", true, path, codes);
    const json& components = require(j, "components", path, codes);
    const std::string cpath = join(path, "components");
    if (!components.is_object()) {
        throw Error(codes.type, cpath, cpath + " must be an object");
    }
    for (const auto& [name, value] : components.items()) {
        const std::string npath = cpath + "." + name;
        ComponentState c;
        c.name = name;
        c.data = field_map_from_json(require(value, "data", npath, codes), npath + ".data", code);
        c.version = uint_or(value, "version", 0, npath, codes);
        e.components.emplace(name, std::move(c));
    }
    return e;
}

json to_json(const WorldDescription& world) {
    json entities = json::array();
    for (const auto& e : world.static_entities) entities.push_back(to_json(e));
    json portals = json::array();
    for (const auto& p : world.portals) {
        portals.push_back({{"portal_id", p.portal_id},
                           {"position", to_json(p.position)},
                           {"target_url", p.target_url},
                           {"open_mode", p.open_mode == OpenMode::new_window ? "new_window" : "replace"}});
    }
    json assets = json::array();
    for (const auto& a : world.assets) {
        assets.push_back({{"asset_id", a.asset_id}, {"path", a.path}, {"media_type", a.media_type}});
    }
    json regions = json::array();
    for (const auto& r : world.bounds_regions) {
        regions.push_back({{"rx", r.rx}, {"rz", r.rz}, {"side", kRegionSide}});
    }
    return {{"world_id", world.world_id}, {"title", world.title},
            {"spawn", to_json(world.spawn)},  {"entities", std::move(entities)},
            {"portals", std::move(portals)},  {"assets", std::move(assets)},
            {"regions", std::move(regions)}};
}

WorldDescription world_from_json(const json& j) {
    const Codes codes = codes_for(ErrorCode::InvalidWorld);
    WorldDescription w;
    w.world_id = string_at(j, "world_id", "", codes);
    w.title = string_at(j, "title", "", codes);
    w.spawn = transform_from_json(require(j, "spawn", "", codes), "spawn");

    const json& entities = array_at(j, "entities", "", codes);
    for (std::size_t i = 0; i < entities.size(); ++i) {
        w.static_entities.push_back(entity_from_json(entities[i], index_path("entities", i)));
    }
    const json& portals = array_at(j, "portals", "", codes);
    for (std::size_t i = 0; i < portals.size(); ++i) {
        const std::string path = index_path("portals", i);
        Portal p;
        p.portal_id = string_at(portals[i], "portal_id", path, codes);
        p.position = transform_from_json(require(portals[i], "position", path, codes), path + ".position");
        p.target_url = string_at(portals[i], "target_url", path, codes);
        const std::string mode = string_at(portals[i], "open_mode", path, codes);
        if (mode == "new_window") {
            p.open_mode = OpenMode::new_window;
        } else if (mode == "replace") {
            p.open_mode = OpenMode::replace;
        } else {
            throw Error(ErrorCode::InvalidWorld, path + ".open_mode",
                        "open_mode must be replace or new_window");
        }
        w.portals.push_back(std::move(p));
    }
    const json& assets = array_at(j, "assets", "", codes);
    for (std::size_t i = 0; i < assets.size(); ++i) {
        const std::string path = index_path("assets", i);
        w.assets.push_back({string_at(assets[i], "asset_id", path, codes),
                            string_at(assets[i], "path", path, codes),
                            string_at(assets[i], "media_type", path, codes)});
    }
    const json& regions = array_at(j, "regions", "", codes);
    for (std::size_t i = 0; i < regions.size(); ++i) {
        const std::string path = index_path("regions", i);
        const json& r = regions[i];
        for (const char* key : {"rx", "rz"}) {
            if (!require(r, key, path, codes).is_number_integer()) {
                throw Error(ErrorCode::InvalidWorld, path + "." + key, "region index must be an integer");
            }
        }
        if (r.contains("side") && (!r["side"].is_number() || r["side"].get<double>() != kRegionSide)) {
            throw Error(ErrorCode::InvalidWorld, path + ".side", "region side is fixed at 256");
        }
        w.bounds_regions.push_back({r["rx"].get<std::int64_t>(), r["rz"].get<std::int64_t>()});
    }
    return w;
}

std::string canonical_encoding(const EntityRecord& entity) {
    return to_json(entity).dump();
}

WorldDescription load_world_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::InvalidWorld, path.string(), "cannot read " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    json j = json::parse(buffer.str(), nullptr, false);
    if (j.is_discarded()) {
        throw Error(ErrorCode::InvalidWorld, path.string(), "malformed JSON in " + path.string());
    }
    return world_from_json(j);
}

void save_world_file(const WorldDescription& world, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << to_json(world).dump(2) << '\n';
    if (!out) {
        throw Error(ErrorCode::InvalidWorld, path.string(), "cannot write " + path.string());
    }
}

}  // namespace openverse
