#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "openverse/protocol/message.hpp"
#include "openverse/world/world.hpp"

namespace openverse {

struct SessionState {
    SessionId session_id;
    std::string room_id;
    /// Monotonic clock reading (ms) of the last frame from this session.
    std::int64_t last_heartbeat_ms = 0;
    /// Entity carrying an "avatar" component created by this session, if any.
    std::string avatar_entity;
    std::size_t outbound_depth = 0;

    bool operator==(const SessionState&) const = default;
};

/// Authoritative state of one world instance.
///
/// Invariants: every entity owner is "server" or a key of `sessions`;
/// `ownership` has exactly one record per entity and agrees with
/// EntityRecord::owner.
struct RoomState {
    std::string room_id;
    std::shared_ptr<const WorldDescription> world;
    std::map<std::string, EntityRecord> entities;
    std::map<SessionId, SessionState> sessions;
    std::map<std::string, OwnershipRecord> ownership;
    bool dirty = false;
};

/// A frame admitted to a room, stamped with the session it arrived on and
/// the monotonic receive time.
struct Inbound {
    SessionId from;
    WireMessage msg;
    std::int64_t recv_ms = 0;
};

struct Delivery {
    WireMessage msg;
    std::vector<SessionId> recipients;

    bool operator==(const Delivery&) const = default;
};

using FanoutPlan = std::vector<Delivery>;

struct StepResult {
    RoomState state;
    FanoutPlan plan;
    /// Sessions that left (Bye) during the step; the transport closes them.
    std::vector<SessionId> departed;
};

struct SweepResult {
    RoomState state;
    std::vector<SessionId> evictions;
    FanoutPlan plan;
};

/// World part of a room id: "hello-world~bench-20" belongs to "hello-world".
std::string world_of_room(std::string_view room_id);

/// Room ids are a world id optionally followed by "~" and an instance tag
/// drawn from the same alphabet.
bool is_valid_room_id(std::string_view room_id) noexcept;

/// Entity set of a fresh room: the world's static entities, server-owned.
RoomState make_room(std::string room_id, std::shared_ptr<const WorldDescription> world);

/// Adds an admitted session and tells the others (Presence "join").
StepResult join_session(RoomState room, const SessionId& session, std::int64_t now_ms);

/// Removes a session: its non-persistent entities are deleted, persistent
/// ones pass to "server"; peers get the matching frames and Presence "leave".
StepResult leave_session(RoomState room, const SessionId& session);

/// Applies one tick's batch in order. Stale updates (seq <= entity seq) are
/// dropped silently; other per-message failures become Error frames for the
/// offender only. State updates fan out to every session but the originator,
/// ownership grants to everyone. Within the batch only the last transform
/// update per entity is fanned out. Deterministic in (room, batch).
StepResult room_step(RoomState room, std::span<const Inbound> batch);

/// Evicts sessions whose last heartbeat is more than `timeout_ms` before
/// `now_ms`, with leave_session semantics.
SweepResult heartbeat_sweep(RoomState room, std::int64_t now_ms, std::int64_t timeout_ms);

/// Human-readable descriptions of broken RoomState invariants; empty when
/// all hold.
std::vector<std::string> check_room_invariants(const RoomState& room);

}  // namespace openverse
