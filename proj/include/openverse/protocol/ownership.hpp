#pragma once

#include <optional>

#include "openverse/protocol/message.hpp"

namespace openverse {

struct OwnershipOutcome {
    /// The entity after the transfer: new owner, seq re-stamped to
    /// granted_seq + 1 so queued updates of the previous owner are stale.
    EntityRecord entity;
    OwnershipRecord record;
    /// Broadcast to the whole room; body carries owner, previous owner and
    /// the full entity state.
    WireMessage grant;
};

/// Grant-on-request: the requester (request.sender) always becomes owner of
/// a transferable entity. `entity` is null when the id is unknown. A request
/// from the current owner changes nothing and returns nullopt, so a repeated
/// request cannot re-stamp seq under the owner's own in-flight updates.
/// Throws Error(NoSuchEntity) or Error(Forbidden) for non-transferable ones.
std::optional<OwnershipOutcome> resolve_ownership(const EntityRecord* entity, const WireMessage& request);

}  // namespace openverse
