#pragma once

#include <map>
#include <set>
#include <string>

#include "openverse/protocol/message.hpp"

namespace openverse {

/// A participant's view of a room, built from the frames the server sends
/// it plus its own optimistic local sends. Peer updates go through
/// apply_component_update, so ordering matches the server.
class Replica {
public:
    /// Applies a server frame. Welcome/Snapshot replace the whole view;
    /// OwnershipGrant replaces the entity with the authoritative copy it
    /// carries; other kinds are ignored.
    void apply(const WireMessage& msg);

    /// Applies a frame this participant is sending (echo suppression means
    /// the server never returns it). An OwnershipRequest only marks the
    /// entity as pending until the grant to this session, a delete or a
    /// NoSuchEntity error arrives.
    void apply_local(const WireMessage& msg);

    /// True while an OwnershipRequest for `entity_id` is unanswered. Clients
    /// must not send a second one meanwhile: if another session takes the
    /// entity in between, the second grant would land after updates the
    /// first one allowed and the server would accept those unseen.
    bool ownership_pending(const std::string& entity_id) const { return pending_.contains(entity_id); }

    const std::map<std::string, EntityRecord>& entities() const noexcept { return entities_; }
    const SessionId& session() const noexcept { return session_; }

    /// Concatenated canonical encodings, ordered by entity id.
    std::string canonical() const;

private:
    void replace_all(const json& entities);

    SessionId session_;
    std::map<std::string, EntityRecord> entities_;
    std::set<std::string> pending_;
};

}  // namespace openverse
