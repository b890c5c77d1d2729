#include "openverse/protocol/admission.hpp"

namespace openverse {

WireMessage admit(const WireMessage& hello, bool room_exists, std::size_t room_population,
                  const AdmissionPolicy& policy, SessionIdAllocator& ids, const json& snapshot) {
    if (hello.kind != MessageKind::Hello) {
        return make_error(hello.room, ErrorCode::SyntaxError, "first frame must be Hello");
    }
    const auto version = hello.body.value("version", -1);
    if (version != policy.protocol_version) {
        return make_error(hello.room, ErrorCode::VersionMismatch,
                          "server speaks protocol " + std::to_string(policy.protocol_version) +
                              ", client sent " + std::to_string(version));
    }
    if (!room_exists) {
        return make_error(hello.room, ErrorCode::RoomUnknown, "no world for room " + hello.room);
    }
    if (room_population >= policy.max_room_size) {
        return make_error(hello.room, ErrorCode::RoomFull,
                          "room holds " + std::to_string(room_population) + " of " +
                              std::to_string(policy.max_room_size) + " sessions");
    }
    WireMessage welcome;
    welcome.kind = MessageKind::Welcome;
    welcome.room = hello.room;
    welcome.sender = std::string(kServerOwner);
    welcome.body = {{"session", ids.next()},
                    {"version", policy.protocol_version},
                    {"snapshot", snapshot}};
    return welcome;
}

}  // namespace openverse
