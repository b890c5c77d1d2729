#pragma once

#include <cstddef>

#include "openverse/protocol/message.hpp"

namespace openverse {

struct AdmissionPolicy {
    int protocol_version = kProtocolVersion;
    std::size_t max_room_size = 20;
};

/// Decides a Hello. On success returns a Welcome whose body carries a fresh
/// session id, the protocol version and `snapshot` (see snapshot_body).
/// Otherwise returns an Error frame with code VersionMismatch, RoomUnknown
/// or RoomFull (population >= max_room_size), checked in that order.
WireMessage admit(const WireMessage& hello, bool room_exists, std::size_t room_population,
                  const AdmissionPolicy& policy, SessionIdAllocator& ids, const json& snapshot);

}  // namespace openverse
