#pragma once

#include <atomic>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "openverse/error.hpp"
#include "openverse/world/entity.hpp"
#include "openverse/world/json_io.hpp"

namespace openverse {

inline constexpr int kProtocolVersion = 1;

enum class MessageKind {
    Hello,
    Welcome,
    Snapshot,
    EntityCreate,
    EntityUpdate,
    EntityDelete,
    OwnershipRequest,
    OwnershipGrant,
    Presence,
    Ping,
    Pong,
    Bye,
    Error,
};

std::string_view to_string(MessageKind kind) noexcept;
std::optional<MessageKind> kind_from_string(std::string_view name) noexcept;

/// EntityCreate, EntityUpdate and EntityDelete carry an entity id and seq.
constexpr bool is_update_bearing(MessageKind kind) noexcept {
    return kind == MessageKind::EntityCreate || kind == MessageKind::EntityUpdate ||
           kind == MessageKind::EntityDelete;
}

/// Server-assigned session token, or "server" where an owner is expected.
using SessionId = std::string;

/// One protocol frame. `ts` is the sender's wall clock in milliseconds and is
/// never used for ordering.
struct WireMessage {
    MessageKind kind = MessageKind::Ping;
    std::string room;
    SessionId sender;
    std::string entity;
    std::uint64_t seq = 0;
    json body = json::object();
    std::int64_t ts = 0;

    bool operator==(const WireMessage&) const = default;
};

struct OwnershipRecord {
    std::string entity_id;
    SessionId owner{kServerOwner};
    /// Entity seq at the moment of the grant.
    std::uint64_t granted_seq = 0;

    bool operator==(const OwnershipRecord&) const = default;
};

/// Hands out session ids that are never repeated within the process: a
/// random per-process epoch plus a counter.
class SessionIdAllocator {
public:
    SessionIdAllocator();
    explicit SessionIdAllocator(std::string epoch);

    SessionId next();

private:
    std::string epoch_;
    std::atomic<std::uint64_t> counter_{0};
};

WireMessage make_error(std::string room, ErrorCode code, std::string detail,
                       std::string entity = {});

/// The component carried by an EntityUpdate: body["component"] names it
/// ("transform" when absent); the remaining scalar fields are its data.
ComponentState update_component(const WireMessage& update);

/// The entity an EntityCreate describes, owned and created by its sender.
EntityRecord created_entity(const WireMessage& create);

/// Wire form of a room's entity set: {"world": id, "entities": [...]}.
json snapshot_body(std::string_view world_id, const std::map<std::string, EntityRecord>& entities);

}  // namespace openverse
