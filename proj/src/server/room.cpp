#include "openverse/server/room.hpp"

#include <set>

#include "openverse/protocol/ownership.hpp"

namespace openverse {

namespace {

std::vector<SessionId> everyone_but(const RoomState& room, const SessionId& excluded) {
    std::vector<SessionId> out;
    out.reserve(room.sessions.size());
    for (const auto& [id, s] : room.sessions) {
        if (id != excluded) out.push_back(id);
    }
    return out;
}

std::vector<SessionId> everyone(const RoomState& room) {
    return everyone_but(room, {});
}

WireMessage server_frame(const RoomState& room, MessageKind kind) {
    WireMessage m;
    m.kind = kind;
    m.room = room.room_id;
    m.sender = std::string(kServerOwner);
    return m;
}

WireMessage presence(const RoomState& room, const char* event, const SessionId& session) {
    WireMessage m = server_frame(room, MessageKind::Presence);
    m.body = {{"event", event}, {"session", session}};
    return m;
}

void send_error(FanoutPlan& plan, const RoomState& room, const SessionId& to, const Error& e,
                const std::string& entity) {
    plan.push_back({make_error(room.room_id, e.code(), e.what(), entity), {to}});
}

bool has_avatar_component(const EntityRecord& e) {
    return e.components.contains("avatar");
}

// Moves or removes everything a departing session owns. Returns true when
// the entity set changed.
bool release_session(RoomState& room, const SessionId& session, FanoutPlan& plan) {
    bool changed = false;
    for (auto it = room.entities.begin(); it != room.entities.end();) {
        EntityRecord& e = it->second;
        if (e.owner != session) {
            ++it;
            continue;
        }
        changed = true;
        if (e.persistent) {
            WireMessage request;
            request.room = room.room_id;
            request.sender = std::string(kServerOwner);
            request.entity = e.entity_id;
            auto outcome = *resolve_ownership(&e, request);
            room.ownership[e.entity_id] = outcome.record;
            e = std::move(outcome.entity);
            plan.push_back({std::move(outcome.grant), everyone_but(room, session)});
            ++it;
        } else {
            WireMessage del = server_frame(room, MessageKind::EntityDelete);
            del.entity = e.entity_id;
            del.seq = e.seq + 1;
            plan.push_back({std::move(del), everyone_but(room, session)});
            room.ownership.erase(e.entity_id);
            it = room.entities.erase(it);
        }
    }
    return changed;
}

struct Emitted {
    Delivery delivery;
    // Set for fanned-out transform updates, which are coalesced per entity.
    std::string coalesce_key;
};

void handle(RoomState& room, const Inbound& in, std::vector<Emitted>& out,
            std::vector<SessionId>& departed) {
    auto push = [&](WireMessage m, std::vector<SessionId> to, std::string key = {}) {
        out.push_back({{std::move(m), std::move(to)}, std::move(key)});
    };
    auto reject = [&](const Error& e, const std::string& entity) {
        FanoutPlan errors;
        send_error(errors, room, in.from, e, entity);
        push(std::move(errors.front().msg), {in.from});
    };

    auto session = room.sessions.find(in.from);
    if (session == room.sessions.end()) return;
    session->second.last_heartbeat_ms = std::max(session->second.last_heartbeat_ms, in.recv_ms);

    WireMessage msg = in.msg;
    msg.sender = in.from;
    if (msg.room != room.room_id) {
        reject(Error(ErrorCode::Forbidden, "room", "session is admitted to room " + room.room_id),
               msg.entity);
        return;
    }

    switch (msg.kind) {
        case MessageKind::Ping: {
            WireMessage pong = server_frame(room, MessageKind::Pong);
            pong.body = {{"echo_ts", msg.ts}};
            push(std::move(pong), {in.from});
            return;
        }
        case MessageKind::Snapshot: {
            WireMessage snap = server_frame(room, MessageKind::Snapshot);
            snap.body = snapshot_body(room.world ? room.world->world_id : world_of_room(room.room_id),
                                      room.entities);
            push(std::move(snap), {in.from});
            return;
        }
        case MessageKind::Bye: {
            FanoutPlan plan;
            if (release_session(room, in.from, plan)) room.dirty = true;
            room.sessions.erase(in.from);
            for (auto& d : plan) {
                // Recipients were computed before the session was erased.
                std::erase(d.recipients, in.from);
                push(std::move(d.msg), std::move(d.recipients));
            }
            push(presence(room, "leave", in.from), everyone(room));
            departed.push_back(in.from);
            return;
        }
        case MessageKind::EntityCreate: {
            if (room.entities.contains(msg.entity)) {
                reject(Error(ErrorCode::Forbidden, "entity", "entity " + msg.entity + " already exists"),
                       msg.entity);
                return;
            }
            EntityRecord e;
            try {
                e = created_entity(msg);
            } catch (const Error& err) {
                reject(err, msg.entity);
                return;
            }
            if (has_avatar_component(e)) session->second.avatar_entity = e.entity_id;
            room.ownership[e.entity_id] = {e.entity_id, in.from, e.seq};
            room.entities.emplace(e.entity_id, std::move(e));
            room.dirty = true;
            push(msg, everyone_but(room, in.from));
            return;
        }
        case MessageKind::EntityUpdate:
        case MessageKind::EntityDelete: {
            auto it = room.entities.find(msg.entity);
            if (it == room.entities.end()) {
                reject(Error(ErrorCode::NoSuchEntity, "entity", "no entity " + msg.entity), msg.entity);
                return;
            }
            EntityRecord& e = it->second;
            if (msg.seq <= e.seq) return;
            if (e.owner != in.from) {
                reject(Error(ErrorCode::Forbidden, "entity", "entity " + msg.entity + " is owned by " + e.owner),
                       msg.entity);
                return;
            }
            if (msg.kind == MessageKind::EntityDelete) {
                if (session->second.avatar_entity == e.entity_id) session->second.avatar_entity.clear();
                room.ownership.erase(msg.entity);
                room.entities.erase(it);
                room.dirty = true;
                push(msg, everyone_but(room, in.from));
                return;
            }
            ComponentState component;
            try {
                component = update_component(msg);
                e = apply_component_update(std::move(e), component, msg.seq);
            } catch (const Error& err) {
                reject(Error(ErrorCode::SyntaxError, err.path(), err.what()), msg.entity);
                return;
            }
            room.dirty = true;
            std::string key = component.name == kTransform ? msg.entity : std::string{};
            push(msg, everyone_but(room, in.from), std::move(key));
            return;
        }
        case MessageKind::OwnershipRequest: {
            auto it = room.entities.find(msg.entity);
            try {
                auto outcome = resolve_ownership(it == room.entities.end() ? nullptr : &it->second, msg);
                if (!outcome) return;
                room.ownership[msg.entity] = outcome->record;
                it->second = std::move(outcome->entity);
                room.dirty = true;
                push(std::move(outcome->grant), everyone(room));
            } catch (const Error& err) {
                reject(err, msg.entity);
            }
            return;
        }
        default:
            reject(Error(ErrorCode::Forbidden, "kind",
                         std::string(to_string(msg.kind)) + " is not accepted from clients here"),
                   msg.entity);
            return;
    }
}

}  // namespace

std::string world_of_room(std::string_view room_id) {
    return std::string(room_id.substr(0, room_id.find('~')));
}

bool is_valid_room_id(std::string_view room_id) noexcept {
    const auto tilde = room_id.find('~');
    if (tilde == std::string_view::npos) return is_valid_world_id(room_id);
    return is_valid_world_id(room_id.substr(0, tilde)) && is_valid_world_id(room_id.substr(tilde + 1));
}

RoomState make_room(std::string room_id, std::shared_ptr<const WorldDescription> world) {
    RoomState room;
    room.room_id = std::move(room_id);
    room.world = std::move(world);
    if (room.world) {
        for (EntityRecord e : room.world->static_entities) {
            e.owner = std::string(kServerOwner);
            room.ownership[e.entity_id] = {e.entity_id, std::string(kServerOwner), e.seq};
            room.entities.insert_or_assign(e.entity_id, std::move(e));
        }
    }
    return room;
}

StepResult join_session(RoomState room, const SessionId& session, std::int64_t now_ms) {
    StepResult r;
    room.sessions[session] = SessionState{session, room.room_id, now_ms, {}, 0};
    r.plan.push_back({presence(room, "join", session), everyone_but(room, session)});
    r.state = std::move(room);
    return r;
}

StepResult leave_session(RoomState room, const SessionId& session) {
    WireMessage bye;
    bye.kind = MessageKind::Bye;
    bye.room = room.room_id;
    const Inbound in{session, bye, 0};
    return room_step(std::move(room), std::span<const Inbound>(&in, 1));
}

StepResult room_step(RoomState room, std::span<const Inbound> batch) {
    std::vector<Emitted> emitted;
    StepResult r;
    for (const auto& in : batch) handle(room, in, emitted, r.departed);

    // Keep only the last fanned-out transform update per entity.
    std::map<std::string, std::size_t> last;
    for (std::size_t i = 0; i < emitted.size(); ++i) {
        if (!emitted[i].coalesce_key.empty()) last[emitted[i].coalesce_key] = i;
    }
    for (std::size_t i = 0; i < emitted.size(); ++i) {
        const auto& key = emitted[i].coalesce_key;
        if (!key.empty() && last[key] != i) continue;
        if (emitted[i].delivery.recipients.empty()) continue;
        r.plan.push_back(std::move(emitted[i].delivery));
    }
    r.state = std::move(room);
    return r;
}

SweepResult heartbeat_sweep(RoomState room, std::int64_t now_ms, std::int64_t timeout_ms) {
    SweepResult r;
    std::vector<SessionId> stale;
    for (const auto& [id, s] : room.sessions) {
        if (now_ms - s.last_heartbeat_ms > timeout_ms) stale.push_back(id);
    }
    for (const auto& id : stale) {
        auto step = leave_session(std::move(room), id);
        room = std::move(step.state);
        for (auto& d : step.plan) r.plan.push_back(std::move(d));
    }
    for (auto& d : r.plan) {
        std::erase_if(d.recipients, [&](const SessionId& s) { return !room.sessions.contains(s); });
    }
    std::erase_if(r.plan, [](const Delivery& d) { return d.recipients.empty(); });
    r.evictions = std::move(stale);
    r.state = std::move(room);
    return r;
}

std::vector<std::string> check_room_invariants(const RoomState& room) {
    std::vector<std::string> out;
    for (const auto& [id, e] : room.entities) {
        if (id != e.entity_id) out.push_back("entity key " + id + " != entity_id " + e.entity_id);
        if (!e.components.contains(std::string(kTransform))) out.push_back(id + " has no transform");
        if (e.owner != kServerOwner && !room.sessions.contains(e.owner)) {
            out.push_back(id + " owned by departed session " + e.owner);
        }
        auto rec = room.ownership.find(id);
        if (rec == room.ownership.end()) {
            out.push_back(id + " has no ownership record");
        } else if (rec->second.owner != e.owner) {
            out.push_back(id + " ownership record disagrees with entity owner");
        }
    }
    for (const auto& [id, rec] : room.ownership) {
        if (!room.entities.contains(id)) out.push_back("ownership record for missing entity " + id);
    }
    for (const auto& [id, s] : room.sessions) {
        if (s.room_id != room.room_id) out.push_back("session " + id + " belongs to " + s.room_id);
    }
    return out;
}

}  // namespace openverse
