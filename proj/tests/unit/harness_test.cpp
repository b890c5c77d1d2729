#include <cmath>
#include <fstream>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "openverse/harness/net_client.hpp"
#include "openverse/harness/payload.hpp"
#include "openverse/harness/scenario.hpp"

using namespace openverse;
using testing_support::LocalServer;
namespace fs = std::filesystem;

namespace {

ScenarioOptions options(const LocalServer& s, std::size_t bots, double rate, double duration) {
    ScenarioOptions opt;
    opt.url = s.ws_url();
    opt.bots = bots;
    opt.profile.update_rate_hz = rate;
    opt.duration_s = duration;
    opt.seed = 11;
    return opt;
}

/// Writes a copy of the demo world under a new id, with the asset list replaced.
void write_variant(const fs::path& persist, const std::string& id, const json& assets, bool keep_entities) {
    std::ifstream in(persist / "worlds" / "hello-world.world.json");
    json world = json::parse(in);
    world["world_id"] = id;
    world["assets"] = assets;
    if (!keep_entities) world["entities"] = json::array();
    std::ofstream(persist / "worlds" / (id + ".world.json")) << world.dump(2);
}

}  // namespace

TEST(Url, ParsesSchemesAndDefaults) {
    Url u = parse_url("wss://example.org/sync");
    EXPECT_TRUE(u.tls);
    EXPECT_EQ(u.host, "example.org");
    EXPECT_EQ(u.port, "443");
    EXPECT_EQ(u.target, "/sync");
    u = parse_url("http://127.0.0.1:8080");
    EXPECT_FALSE(u.tls);
    EXPECT_EQ(u.port, "8080");
    EXPECT_EQ(u.target, "/");
    u = parse_url("ws://[::1]:9000/sync");
    EXPECT_EQ(u.host, "::1");
    EXPECT_EQ(u.port, "9000");
    EXPECT_EQ(with_http_scheme(parse_url("wss://h:1/sync"), "/healthz").origin(), "https://h:1");
    EXPECT_THROW(parse_url("ftp://x"), std::invalid_argument);
    EXPECT_THROW(parse_url("ws:///sync"), std::invalid_argument);
}

TEST(ReferencedAssets, DistinctInDocumentOrder) {
    const std::string doc =
        R"(<img src="/assets/a.png"><a-sphere src="/assets/b.jpg"></a-sphere>)"
        R"(<link href="/assets/a.png"><script src="https://cdn.example/aframe.js"></script>)"
        R"(<x data-src="/assets/not-counted.png">)";
    EXPECT_EQ(referenced_assets(doc), (std::vector<std::string>{"/assets/a.png", "/assets/b.jpg"}));
    EXPECT_TRUE(referenced_assets("<html></html>").empty());
}

TEST(PayloadBudget, HelloWorldIsDocumentPlusTexture) {
    LocalServer s;
    const PayloadBudget b = payload_budget("hello-world", s.http_url());
    const HttpResponse doc = http_get(parse_url(s.http_url() + "/w/hello-world"));
    const HttpResponse tex = http_get(parse_url(s.http_url() + "/assets/hello-world/texture.jpg"));
    EXPECT_TRUE(b.complete);
    EXPECT_EQ(b.document_bytes, doc.body.size());
    ASSERT_EQ(b.assets.size(), 1u);
    EXPECT_EQ(b.assets[0].bytes, tex.body.size());
    EXPECT_EQ(b.total_bytes, doc.body.size() + tex.body.size());
    EXPECT_LE(b.total_bytes, 512u * 1024u);
}

TEST(PayloadBudget, DanglingAssetMakesItIncomplete) {
    LocalServer s;
    write_variant(s.dir.path(), "dangling",
                  json::array({{{"asset_id", "texture"}, {"media_type", "image/jpeg"}, {"path", "gone/nope.jpg"}}}),
                  true);
    const PayloadBudget b = payload_budget("dangling", s.http_url());
    EXPECT_FALSE(b.complete);
    ASSERT_EQ(b.missing.size(), 1u);
    EXPECT_EQ(b.missing[0], "/assets/gone/nope.jpg");
    EXPECT_EQ(b.total_bytes, b.document_bytes);
}

TEST(PayloadBudget, EmptyWorldIsDocumentOnly) {
    LocalServer s;
    write_variant(s.dir.path(), "empty", json::array(), false);
    const PayloadBudget b = payload_budget("empty", s.http_url());
    EXPECT_TRUE(b.complete);
    EXPECT_TRUE(b.assets.empty());
    EXPECT_GT(b.document_bytes, 0u);
    EXPECT_EQ(b.total_bytes, b.document_bytes);
    EXPECT_THROW(payload_budget("no-such-world", s.http_url()), std::runtime_error);
}

TEST(BotProfile, Validation) {
    BotProfile p;
    EXPECT_NO_THROW(validate_profile(p));
    p.update_rate_hz = 60;
    EXPECT_NO_THROW(validate_profile(p));
    p.update_rate_hz = 61;
    EXPECT_THROW(validate_profile(p), std::invalid_argument);
    p.update_rate_hz = 0;
    EXPECT_THROW(validate_profile(p), std::invalid_argument);
    p.update_rate_hz = 10;
    p.think_jitter_ms = -1;
    EXPECT_THROW(validate_profile(p), std::invalid_argument);
    p.think_jitter_ms = 0;
    p.lifetime_s = -1;
    EXPECT_THROW(validate_profile(p), std::invalid_argument);
    EXPECT_EQ(movement_from_string("random-walk"), Movement::random_walk);
    EXPECT_THROW(movement_from_string("teleport"), std::invalid_argument);
}

TEST(PlannedPoses, DeterministicPerSeedAndBot) {
    for (Movement m : {Movement::orbit, Movement::random_walk, Movement::idle}) {
        BotProfile p;
        p.movement = m;
        EXPECT_EQ(planned_poses(p, 3, 1, 50), planned_poses(p, 3, 1, 50));
        EXPECT_EQ(planned_poses(p, 3, 1, 50).size(), 50u);
        for (const auto& t : planned_poses(p, 3, 1, 50)) {
            EXPECT_TRUE(std::isfinite(t.px) && std::isfinite(t.pz));
            EXPECT_GE(t.ry, 0);
            EXPECT_LT(t.ry, 360);
        }
    }
    BotProfile walk;
    walk.movement = Movement::random_walk;
    EXPECT_NE(planned_poses(walk, 3, 1, 20), planned_poses(walk, 4, 1, 20));
    EXPECT_NE(planned_poses(walk, 3, 1, 20), planned_poses(walk, 3, 2, 20));
    BotProfile idle;
    idle.movement = Movement::idle;
    const auto still = planned_poses(idle, 3, 0, 10);
    for (const auto& t : still) EXPECT_EQ(t, still.front());
}

TEST(Scenario, IdleBaselineDropsNothing) {
    LocalServer s;
    ScenarioOptions opt = options(s, 2, 5, 1.5);
    opt.profile.movement = Movement::idle;
    const RunReport r = run_scenario(opt);
    EXPECT_TRUE(r.valid) << r.error;
    EXPECT_EQ(r.admitted, 2u);
    EXPECT_EQ(r.dropped, 0u);
    EXPECT_EQ(r.sent, 2u * (1u + 7u));
}

TEST(Scenario, CapacityRefusalsAreCountedNotFailed) {
    ServerConfig cfg;
    cfg.max_room_size = 20;
    LocalServer s(cfg);
    const ScenarioResult res = run_scenario_detailed(options(s, 25, 2, 1));
    EXPECT_TRUE(res.report.valid) << res.report.error;
    EXPECT_EQ(res.report.admitted, 20u);
    EXPECT_EQ(res.report.capacity_rejected, 5u);
    ASSERT_EQ(res.admission.size(), 25u);
    for (std::size_t i = 0; i < 25; ++i) EXPECT_EQ(res.admission[i], i < 20 ? "Welcome" : "RoomFull") << i;
    EXPECT_NE(format_table({res.report}).find("5 refused (RoomFull)"), std::string::npos);
}

TEST(Scenario, SeededRunsSendTheSameUpdates) {
    LocalServer s;
    ScenarioOptions opt = options(s, 3, 10, 1);
    opt.profile.movement = Movement::random_walk;
    opt.profile.think_jitter_ms = 5;
    const ScenarioResult a = run_scenario_detailed(opt);
    opt.room = "hello-world~again";
    const ScenarioResult b = run_scenario_detailed(opt);
    ASSERT_EQ(a.sent_log.size(), 30u);
    EXPECT_EQ(a.sent_log, b.sent_log);
    for (std::size_t bot = 0; bot < 3; ++bot) {
        const auto poses = planned_poses(opt.profile, opt.seed, bot, 10);
        std::size_t k = 0;
        for (const auto& rec : a.sent_log) {
            if (rec.bot != bot) continue;
            EXPECT_EQ(rec.pose, poses[k++]);
        }
        EXPECT_EQ(k, 10u);
    }
}

TEST(Scenario, ReportInvariants) {
    LocalServer s;
    const RunReport r = run_scenario(options(s, 4, 20, 1.5));
    ASSERT_TRUE(r.valid) << r.error;
    EXPECT_LE(r.latency_p50_ms, r.latency_p95_ms);
    EXPECT_LE(r.latency_p95_ms, r.latency_p99_ms);
    EXPECT_LE(r.latency_p99_ms, r.latency_max_ms);
    EXPECT_GE(r.latency_p50_ms, 0);
    // Coalescing can only shrink fanout. Creates and departure deletes add at
    // most one frame each per peer pair.
    EXPECT_LE(r.latency_samples, r.sent * (r.admitted - 1));
    EXPECT_LE(r.received, r.sent * (r.admitted - 1) + 2 * r.admitted * (r.admitted - 1));
    EXPECT_GE(r.tick_utilization, 0);
}

// Below the tick rate no two updates of one entity share a tick, so every
// update reaches every peer exactly once.
TEST(Scenario, LowRateFanoutIsConserved) {
    LocalServer s;
    const RunReport r = run_scenario(options(s, 3, 2, 2));
    ASSERT_TRUE(r.valid) << r.error;
    const std::uint64_t updates = r.sent - r.admitted;
    EXPECT_EQ(updates, 12u);
    EXPECT_EQ(r.latency_samples, updates * (r.admitted - 1));
    EXPECT_EQ(r.dropped, 0u);
}

TEST(DensitySweep, OneReportPerCountInFreshRooms) {
    LocalServer s;
    ScenarioOptions base = options(s, 0, 5, 0.5);
    EXPECT_TRUE(density_sweep(base, {}).empty());
    const auto reports = density_sweep(base, {2, 3});
    ASSERT_EQ(reports.size(), 2u);
    EXPECT_EQ(reports[0].room, "hello-world~n2-s11");
    EXPECT_EQ(reports[1].room, "hello-world~n3-s11");
    EXPECT_EQ(reports[0].admitted, 2u);
    EXPECT_EQ(reports[1].admitted, 3u);
}
