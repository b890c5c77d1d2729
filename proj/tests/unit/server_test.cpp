#include <sys/wait.h>

#include <cstdlib>
#include <fstream>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "openverse/harness/net_client.hpp"
#include "openverse/harness/scenario.hpp"
#include "openverse/server/persistence.hpp"
#include "ws_session.hpp"

using namespace openverse;
using testing_support::LocalServer;
using testing_support::TempDir;
using testing_support::WsSession;
namespace fs = std::filesystem;

namespace {

HttpResponse get(const LocalServer& s, const std::string& target) {
    return http_get(parse_url(s.http_url() + target));
}

int startup_code(ServerConfig cfg) {
    try {
        Server server(std::move(cfg));
    } catch (const StartupError& e) {
        return e.exit_code();
    }
    return 0;
}

int run_cli_env(const std::string& env, const std::string& args) {
    const std::string cmd = env + " " + std::string(OPENVERSE_CLI) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

int run_cli(const std::string& args) {
    return run_cli_env("", args);
}

WireMessage create(const std::string& room, const std::string& id, bool persistent, double px) {
    WireMessage m;
    m.kind = MessageKind::EntityCreate;
    m.room = room;
    m.entity = id;
    m.seq = 1;
    m.body = {{"persistent", persistent},
              {"components",
               {{"transform",
                 {{"px", px}, {"py", 0}, {"pz", 0}, {"rx", 0}, {"ry", 0}, {"rz", 0}, {"sx", 1}, {"sy", 1}, {"sz", 1}}}}}};
    return m;
}

WireMessage ping(const std::string& room) {
    WireMessage m;
    m.kind = MessageKind::Ping;
    m.room = room;
    return m;
}

std::string error_code(const WireMessage& m) {
    return m.body.value("code", std::string());
}

}  // namespace

TEST(ServerHttp, WorldDocumentCarriesListingAndEndpoint) {
    LocalServer s;
    const HttpResponse r = get(s, "/w/hello-world");
    ASSERT_EQ(r.status, 200);
    EXPECT_NE(r.content_type.find("text/html"), std::string::npos);
    EXPECT_NE(r.body.find("position=\"0 1.5 -5\""), std::string::npos);
    EXPECT_NE(r.body.find("radius=\"1\""), std::string::npos);
    EXPECT_NE(r.body.find("rotation=\"0 0 -30\""), std::string::npos);
    EXPECT_NE(r.body.find("dur: 10000"), std::string::npos);
    EXPECT_NE(r.body.find("easing: linear"), std::string::npos);
    EXPECT_NE(r.body.find("ws://127.0.0.1:" + std::to_string(s.server->port()) + "/sync"), std::string::npos);
    EXPECT_EQ(get(s, "/w/hello-world").body, r.body);
}

TEST(ServerHttp, UnknownWorldIs404) {
    LocalServer s;
    EXPECT_EQ(get(s, "/w/no-such-world").status, 404);
    EXPECT_EQ(get(s, "/w/").status, 404);
    EXPECT_EQ(get(s, "/nothing-here").status, 404);
}

TEST(ServerHttp, HealthzIsJson) {
    LocalServer s;
    const HttpResponse r = get(s, "/healthz");
    ASSERT_EQ(r.status, 200);
    const json j = json::parse(r.body);
    EXPECT_EQ(j.at("status"), "ok");
    EXPECT_TRUE(j.at("room_detail").is_array());
}

TEST(ServerHttp, ServesAssetsFromPersistDir) {
    LocalServer s;
    const HttpResponse r = get(s, "/assets/hello-world/texture.jpg");
    ASSERT_EQ(r.status, 200);
    EXPECT_EQ(r.content_type, "image/jpeg");
    EXPECT_EQ(r.body.size(), fs::file_size(testing_support::demo_dir() / "assets/hello-world/texture.jpg"));
    EXPECT_EQ(get(s, "/assets/hello-world/missing.png").status, 404);
}

TEST(ServerHttp, AssetPathTraversalIsRejected) {
    LocalServer s;
    EXPECT_EQ(get(s, "/assets/../worlds/hello-world.world.json").status, 404);
    EXPECT_EQ(get(s, "/assets/hello-world/../../worlds/hello-world.world.json").status, 404);
    EXPECT_EQ(get(s, "/assets//etc/passwd").status, 404);
}

TEST(ServerHttp, SyncWithoutUpgradeIs426) {
    LocalServer s;
    EXPECT_EQ(get(s, "/sync").status, 426);
}

TEST(ServerStartup, ExitCodes) {
    TempDir dir;
    ServerConfig cfg;
    cfg.bind_address = "127.0.0.1";
    cfg.port = 0;
    cfg.persist_dir = dir.path();
    EXPECT_EQ(startup_code(cfg), kExitTls) << "TLS without cert";

    cfg.cert = dir.path() / "missing.pem";
    cfg.key = dir.path() / "missing.key";
    EXPECT_EQ(startup_code(cfg), kExitTls) << "unreadable cert";

    cfg.dev_plaintext = true;
    cfg.tick_ms = 0;
    EXPECT_EQ(startup_code(cfg), kExitUsage);
    cfg.tick_ms = 50;

    Server holder(cfg);
    cfg.port = holder.port();
    EXPECT_EQ(startup_code(cfg), kExitPortBusy);
    cfg.port = 0;

    std::ofstream(dir.path() / "plain-file") << "x";
    cfg.persist_dir = dir.path() / "plain-file";
    EXPECT_EQ(startup_code(cfg), kExitPersistDir);
}

TEST(ServerCli, StartupFailuresMapToExitCodes) {
    TempDir dir;
    std::ofstream(dir.path() / "plain-file") << "x";
    const std::string persist = (dir.path() / "persist").string();
    const std::string file = (dir.path() / "plain-file").string();
    EXPECT_EQ(run_cli("serve --port 0 --bind 127.0.0.1 --persist-dir " + persist), kExitTls);
    EXPECT_EQ(run_cli("serve --port 0 --bind 127.0.0.1 --dev-plaintext --persist-dir " + file), kExitPersistDir);
    // The environment variable wins over the flag.
    EXPECT_EQ(run_cli_env("OPENVERSE_PERSIST_DIR=" + file,
                          "serve --port 0 --bind 127.0.0.1 --dev-plaintext --persist-dir " + persist),
              kExitPersistDir);
    EXPECT_EQ(run_cli("serve --bogus-flag"), kExitUsage);
}

TEST(ServerSync, HelloGetsWelcomeWithSnapshot) {
    LocalServer s;
    WsSession ws(s.ws_url());
    ws.send(testing_support::hello("hello-world"));
    const auto welcome = ws.recv();
    ASSERT_TRUE(welcome);
    ASSERT_EQ(welcome->kind, MessageKind::Welcome) << encode(*welcome);
    EXPECT_EQ(welcome->body.at("version"), kProtocolVersion);
    EXPECT_FALSE(welcome->body.at("session").get<std::string>().empty());
    const json& entities = welcome->body.at("snapshot").at("entities");
    ASSERT_EQ(entities.size(), 1u);
    EXPECT_EQ(entities[0].at("entity_id"), "sphere");
}

TEST(ServerSync, VersionMismatchClosesConnection) {
    LocalServer s;
    WsSession ws(s.ws_url());
    ws.send(testing_support::hello("hello-world", 99));
    const auto reply = ws.recv();
    ASSERT_TRUE(reply);
    ASSERT_EQ(reply->kind, MessageKind::Error);
    EXPECT_EQ(error_code(*reply), "VersionMismatch");
    EXPECT_FALSE(ws.recv(std::chrono::seconds(3)));
    EXPECT_TRUE(ws.closed());
}

TEST(ServerSync, FirstFrameMustBeHello) {
    LocalServer s;
    WsSession ws(s.ws_url());
    ws.send(ping("hello-world"));
    const auto reply = ws.recv();
    ASSERT_TRUE(reply);
    EXPECT_EQ(error_code(*reply), "Forbidden");
    ws.send_raw("{not json");
    const auto bad = ws.recv();
    ASSERT_TRUE(bad);
    EXPECT_EQ(error_code(*bad), "SyntaxError");
}

TEST(ServerSync, UnknownRoomIsRefused) {
    LocalServer s;
    WsSession ws(s.ws_url());
    ws.send(testing_support::hello("no-such-world"));
    const auto reply = ws.recv();
    ASSERT_TRUE(reply);
    EXPECT_EQ(error_code(*reply), "RoomUnknown");
}

TEST(ServerSync, CreateReachesPeerButNotSender) {
    LocalServer s;
    WsSession a(s.ws_url()), b(s.ws_url());
    a.send(testing_support::hello("hello-world"));
    const auto wa = a.recv_kind(MessageKind::Welcome);
    ASSERT_TRUE(wa);
    b.send(testing_support::hello("hello-world"));
    ASSERT_TRUE(b.recv_kind(MessageKind::Welcome));
    const std::string session_a = wa->body.at("session");

    a.send(create("hello-world", "cube", false, 2));
    a.send(ping("hello-world"));
    const auto seen = b.recv_kind(MessageKind::EntityCreate);
    ASSERT_TRUE(seen);
    EXPECT_EQ(seen->entity, "cube");
    EXPECT_EQ(seen->sender, session_a);

    // Everything A gets up to its Pong: no echo of its own create.
    while (true) {
        const auto m = a.recv();
        ASSERT_TRUE(m);
        if (m->kind == MessageKind::Pong) break;
        EXPECT_NE(m->kind, MessageKind::EntityCreate) << encode(*m);
    }
}

TEST(ServerSync, RoomFullAtCapacity) {
    ServerConfig cfg;
    cfg.max_room_size = 2;
    LocalServer s(cfg);
    WsSession a(s.ws_url()), b(s.ws_url()), c(s.ws_url());
    a.send(testing_support::hello("hello-world"));
    ASSERT_TRUE(a.recv_kind(MessageKind::Welcome));
    b.send(testing_support::hello("hello-world"));
    ASSERT_TRUE(b.recv_kind(MessageKind::Welcome));
    c.send(testing_support::hello("hello-world"));
    const auto refused = c.recv();
    ASSERT_TRUE(refused);
    EXPECT_EQ(error_code(*refused), "RoomFull");
    // Another instance of the same world has its own capacity.
    c.send(testing_support::hello("hello-world~two"));
    EXPECT_TRUE(c.recv_kind(MessageKind::Welcome));
}

TEST(ServerPersistence, PersistentEntitySurvivesRestart) {
    TempDir dir;
    testing_support::seed_persist_dir(dir.path());
    ServerConfig cfg;
    cfg.bind_address = "127.0.0.1";
    cfg.port = 0;
    cfg.dev_plaintext = true;
    cfg.persist_dir = dir.path();
    cfg.threads = 2;
    {
        Server server(cfg);
        server.start();
        WsSession ws("ws://127.0.0.1:" + std::to_string(server.port()) + "/sync");
        ws.send(testing_support::hello("hello-world"));
        ASSERT_TRUE(ws.recv_kind(MessageKind::Welcome));
        ws.send(create("hello-world", "board", true, 7));
        ws.send(create("hello-world", "scratch", false, 8));
        ws.send(ping("hello-world"));
        ASSERT_TRUE(ws.recv_kind(MessageKind::Pong));
        server.stop();
    }
    ASSERT_TRUE(fs::exists(snapshot_path(dir.path(), "hello-world")));

    Server server(cfg);
    server.start();
    WsSession ws("ws://127.0.0.1:" + std::to_string(server.port()) + "/sync");
    ws.send(testing_support::hello("hello-world"));
    const auto welcome = ws.recv_kind(MessageKind::Welcome);
    ASSERT_TRUE(welcome);
    std::map<std::string, json> by_id;
    for (const auto& e : welcome->body.at("snapshot").at("entities")) by_id[e.at("entity_id")] = e;
    ASSERT_TRUE(by_id.contains("board"));
    EXPECT_FALSE(by_id.contains("scratch"));
    EXPECT_TRUE(by_id.contains("sphere"));
    EXPECT_EQ(by_id["board"].at("owner"), "server");
    EXPECT_EQ(by_id["board"].at("components").at("transform").at("data").at("px"), 7);
    server.stop();
}

class TlsServer : public ::testing::Test {
protected:
    void SetUp() override {
        cert_ = dir_.path() / "cert.pem";
        key_ = dir_.path() / "key.pem";
        const std::string cmd = "openssl req -x509 -newkey rsa:2048 -nodes -days 2 -subj /CN=localhost -keyout " +
                                key_.string() + " -out " + cert_.string() + " >/dev/null 2>&1";
        if (std::system(cmd.c_str()) != 0) GTEST_SKIP() << "openssl not available";
        testing_support::seed_persist_dir(dir_.path() / "persist");
        ServerConfig cfg;
        cfg.bind_address = "127.0.0.1";
        cfg.port = 0;
        cfg.cert = cert_;
        cfg.key = key_;
        cfg.persist_dir = dir_.path() / "persist";
        cfg.threads = 2;
        server_ = std::make_unique<Server>(cfg);
        server_->start();
    }
    void TearDown() override {
        if (server_) server_->stop();
    }
    std::string origin(const char* scheme) const {
        return std::string(scheme) + "://127.0.0.1:" + std::to_string(server_->port());
    }

    TempDir dir_;
    fs::path cert_, key_;
    std::unique_ptr<Server> server_;
};

TEST_F(TlsServer, DocumentAdvertisesSecureEndpoint) {
    const HttpResponse r = http_get(parse_url(origin("https") + "/w/hello-world"), true);
    ASSERT_EQ(r.status, 200);
    EXPECT_NE(r.body.find(origin("wss") + "/sync"), std::string::npos);
}

TEST_F(TlsServer, UntrustedCertificateFailsVerification) {
    EXPECT_ANY_THROW(http_get(parse_url(origin("https") + "/healthz"), false));
}

TEST_F(TlsServer, BotsSyncOverWss) {
    ScenarioOptions opt;
    opt.url = origin("wss") + "/sync";
    opt.bots = 2;
    opt.duration_s = 1;
    opt.insecure = true;
    const RunReport r = run_scenario(opt);
    EXPECT_TRUE(r.valid) << r.error;
    EXPECT_EQ(r.admitted, 2u);
    EXPECT_GT(r.received, 0u);
}
