#include "openverse/protocol/codec.hpp"

#include <array>
#include <cmath>

namespace openverse {

namespace {

constexpr std::array<std::string_view, 13> kKindNames = {
    "Hello",        "Welcome",          "Snapshot",       "EntityCreate", "EntityUpdate",
    "EntityDelete", "OwnershipRequest", "OwnershipGrant", "Presence",     "Ping",
    "Pong",         "Bye",              "Error"};

[[noreturn]] void missing(const std::string& path) {
    throw Error(ErrorCode::MissingField, path, "missing field " + path);
}

[[noreturn]] void bad_type(const std::string& path, const std::string& expected) {
    throw Error(ErrorCode::SyntaxError, path, path + " must be " + expected);
}

const json& field(const json& obj, const char* key, const std::string& path) {
    auto it = obj.find(key);
    if (it == obj.end()) missing(path);
    return *it;
}

std::string string_field(const json& obj, const char* key, const std::string& path) {
    const json& v = field(obj, key, path);
    if (!v.is_string()) bad_type(path, "a string");
    return v.get<std::string>();
}

std::string optional_string(const json& obj, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end()) return {};
    if (!it->is_string()) bad_type(key, "a string");
    return it->get<std::string>();
}

bool is_unsigned(const json& v) {
    return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
}

void check_transform_body(const json& data, const std::string& path) {
    for (const char* key : {"px", "py", "pz", "rx", "ry", "rz", "sx", "sy", "sz"}) {
        const std::string where = path + "." + key;
        const json& v = field(data, key, where);
        if (!v.is_number() || !std::isfinite(v.get<double>())) bad_type(where, "a finite number");
        if (key[0] == 's' && !(v.get<double>() > 0)) bad_type(where, "> 0");
    }
}

void check_component_data(const json& data, const std::string& path, bool transform) {
    if (!data.is_object()) bad_type(path, "an object");
    if (transform) {
        check_transform_body(data, path);
        return;
    }
    for (const auto& [key, value] : data.items()) {
        if (!(value.is_number() || value.is_string() || value.is_boolean())) {
            bad_type(path + "." + key, "a number, string or boolean");
        }
    }
}

void check_body(const WireMessage& m) {
    const json& body = m.body;
    switch (m.kind) {
        case MessageKind::Hello:
            if (!field(body, "version", "body.version").is_number_integer()) {
                bad_type("body.version", "an integer");
            }
            break;
        case MessageKind::Welcome:
            string_field(body, "session", "body.session");
            if (!field(body, "version", "body.version").is_number_integer()) {
                bad_type("body.version", "an integer");
            }
            if (!field(field(body, "snapshot", "body.snapshot"), "entities", "body.snapshot.entities")
                     .is_array()) {
                bad_type("body.snapshot.entities", "an array");
            }
            break;
        case MessageKind::Snapshot:
            if (body.contains("entities") && !body["entities"].is_array()) {
                bad_type("body.entities", "an array");
            }
            break;
        case MessageKind::EntityCreate: {
            const json& components = field(body, "components", "body.components");
            if (!components.is_object()) bad_type("body.components", "an object");
            if (!components.contains(kTransform)) missing("body.components.transform");
            for (const auto& [name, data] : components.items()) {
                if (name.empty()) bad_type("body.components", "keyed by non-empty names");
                check_component_data(data, "body.components." + name, name == kTransform);
            }
            if (body.contains("persistent") && !body["persistent"].is_boolean()) {
                bad_type("body.persistent", "a boolean");
            }
            break;
        }
        case MessageKind::EntityUpdate: {
            std::string component{kTransform};
            if (auto it = body.find("component"); it != body.end()) {
                if (!it->is_string() || it->get<std::string>().empty()) {
                    bad_type("body.component", "a non-empty string");
                }
                component = it->get<std::string>();
            }
            if (component == kTransform) {
                check_transform_body(body, "body");
            } else {
                check_component_data(body, "body", false);
            }
            break;
        }
        case MessageKind::OwnershipGrant:
            string_field(body, "owner", "body.owner");
            break;
        case MessageKind::Error:
            string_field(body, "code", "body.code");
            string_field(body, "detail", "body.detail");
            break;
        default:
            break;
    }
    if (m.kind == MessageKind::OwnershipRequest && m.entity.empty()) missing("entity");
}

}  // namespace

std::string_view to_string(MessageKind kind) noexcept {
    return kKindNames[static_cast<std::size_t>(kind)];
}

std::optional<MessageKind> kind_from_string(std::string_view name) noexcept {
    for (std::size_t i = 0; i < kKindNames.size(); ++i) {
        if (kKindNames[i] == name) return static_cast<MessageKind>(i);
    }
    return std::nullopt;
}

std::string encode(const WireMessage& msg) {
    nlohmann::ordered_json frame;
    frame["kind"] = to_string(msg.kind);
    frame["room"] = msg.room;
    frame["sender"] = msg.sender;
    frame["entity"] = msg.entity;
    frame["seq"] = msg.seq;
    frame["body"] = msg.body;
    frame["ts"] = msg.ts;
    return frame.dump();
}

WireMessage decode(std::string_view frame) {
    json j = json::parse(frame.begin(), frame.end(), nullptr, false);
    if (j.is_discarded()) throw Error(ErrorCode::SyntaxError, "", "frame is not valid JSON");
    if (!j.is_object()) throw Error(ErrorCode::SyntaxError, "", "frame must be a JSON object");

    WireMessage m;
    const std::string kind = string_field(j, "kind", "kind");
    auto parsed = kind_from_string(kind);
    if (!parsed) throw Error(ErrorCode::UnknownKind, "kind", "unknown message kind " + kind);
    m.kind = *parsed;
    m.room = string_field(j, "room", "room");
    m.sender = optional_string(j, "sender");

    if (is_update_bearing(m.kind)) {
        m.entity = string_field(j, "entity", "entity");
        if (m.entity.empty()) missing("entity");
        const json& seq = field(j, "seq", "seq");
        if (!is_unsigned(seq)) bad_type("seq", "an unsigned integer");
        m.seq = seq.get<std::uint64_t>();
    } else {
        m.entity = optional_string(j, "entity");
        if (auto it = j.find("seq"); it != j.end()) {
            if (!is_unsigned(*it)) bad_type("seq", "an unsigned integer");
            m.seq = it->get<std::uint64_t>();
        }
    }
    if (auto it = j.find("body"); it != j.end()) {
        if (!it->is_object()) bad_type("body", "an object");
        m.body = std::move(*it);
    }
    if (auto it = j.find("ts"); it != j.end()) {
        if (!it->is_number_integer()) bad_type("ts", "an integer");
        m.ts = it->get<std::int64_t>();
    }
    check_body(m);
    return m;
}

WireMessage make_error(std::string room, ErrorCode code, std::string detail, std::string entity) {
    WireMessage m;
    m.kind = MessageKind::Error;
    m.room = std::move(room);
    m.sender = std::string(kServerOwner);
    m.entity = std::move(entity);
    m.body = {{"code", to_string(code)}, {"detail", std::move(detail)}};
    return m;
}

ComponentState update_component(const WireMessage& update) {
    ComponentState c;
    c.name = update.body.value("component", std::string(kTransform));
    json data = update.body;
    data.erase("component");
    if (c.name == kTransform) {
        // Only the nine transform fields are state; other keys ride along in
        // the relayed frame.
        json t = json::object();
        for (const char* key : {"px", "py", "pz", "rx", "ry", "rz", "sx", "sy", "sz"}) {
            if (data.contains(key)) t[key] = data[key];
        }
        data = std::move(t);
    }
    c.data = field_map_from_json(data, "body", ErrorCode::SyntaxError);
    c.version = update.seq;
    return c;
}

EntityRecord created_entity(const WireMessage& create) {
    EntityRecord e;
    e.entity_id = create.entity;
    e.owner = create.sender;
    e.creator = create.sender;
    e.persistent = create.body.value("persistent", false);
    e.transferable = true;
    e.seq = create.seq;
    for (const auto& [name, data] : create.body.at("components").items()) {
        const std::string path = "body.components." + name;
        if (name == kTransform) {
            e.components.emplace(name, make_transform_component(
                                           transform_from_json(data, path, ErrorCode::SyntaxError),
                                           create.seq));
        } else {
            e.components.emplace(
                name, ComponentState{name, field_map_from_json(data, path, ErrorCode::SyntaxError),
                                     create.seq});
        }
    }
    return e;
}

json snapshot_body(std::string_view world_id, const std::map<std::string, EntityRecord>& entities) {
    json list = json::array();
    for (const auto& [id, entity] : entities) list.push_back(to_json(entity));
    return {{"world", world_id}, {"entities", std::move(list)}};
}

}  // namespace openverse
