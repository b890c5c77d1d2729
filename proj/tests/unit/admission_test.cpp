#include <gtest/gtest.h>

#include "openverse/protocol/admission.hpp"

using namespace openverse;

namespace {

WireMessage hello(int version = kProtocolVersion) {
    WireMessage m;
    m.kind = MessageKind::Hello;
    m.room = "hello-world";
    m.body = {{"version", version}};
    return m;
}

const json kEmptySnapshot = {{"world", "hello-world"}, {"entities", json::array()}};

}  // namespace

TEST(Admit, EmptyExistingRoomWelcomesWithEmptySnapshot) {
    SessionIdAllocator ids;
    const WireMessage w = admit(hello(), true, 0, {}, ids, kEmptySnapshot);
    ASSERT_EQ(w.kind, MessageKind::Welcome);
    EXPECT_EQ(w.room, "hello-world");
    EXPECT_FALSE(w.body.at("session").get<std::string>().empty());
    EXPECT_EQ(w.body.at("version"), kProtocolVersion);
    EXPECT_TRUE(w.body.at("snapshot").at("entities").empty());
}

TEST(Admit, VersionMismatch) {
    SessionIdAllocator ids;
    const WireMessage e = admit(hello(0), true, 0, {}, ids, kEmptySnapshot);
    ASSERT_EQ(e.kind, MessageKind::Error);
    EXPECT_EQ(e.body.at("code"), "VersionMismatch");
}

TEST(Admit, UnknownRoom) {
    SessionIdAllocator ids;
    EXPECT_EQ(admit(hello(), false, 0, {}, ids, kEmptySnapshot).body.at("code"), "RoomUnknown");
}

TEST(Admit, VersionIsCheckedBeforeRoomAndCapacity) {
    SessionIdAllocator ids;
    EXPECT_EQ(admit(hello(2), false, 99, {}, ids, kEmptySnapshot).body.at("code"), "VersionMismatch");
    EXPECT_EQ(admit(hello(), false, 99, {}, ids, kEmptySnapshot).body.at("code"), "RoomUnknown");
}

TEST(Admit, TwentyFirstSequentialJoinIsRoomFull) {
    SessionIdAllocator ids;
    AdmissionPolicy policy;
    policy.max_room_size = 20;
    std::size_t population = 0;
    std::vector<std::string> outcomes;
    for (int i = 0; i < 21; ++i) {
        const WireMessage r = admit(hello(), true, population, policy, ids, kEmptySnapshot);
        if (r.kind == MessageKind::Welcome) {
            ++population;
            outcomes.push_back("Welcome");
        } else {
            outcomes.push_back(r.body.at("code"));
        }
    }
    EXPECT_EQ(population, 20u);
    for (int i = 0; i < 20; ++i) EXPECT_EQ(outcomes[i], "Welcome") << i;
    EXPECT_EQ(outcomes[20], "RoomFull");
}

TEST(Admit, DistinctSessionsPerWelcome) {
    SessionIdAllocator ids;
    const auto a = admit(hello(), true, 0, {}, ids, kEmptySnapshot).body.at("session");
    const auto b = admit(hello(), true, 1, {}, ids, kEmptySnapshot).body.at("session");
    EXPECT_NE(a, b);
}
