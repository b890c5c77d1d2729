#pragma once

#include <cstdlib>
#include <filesystem>
#include <memory>
#include <string>

#include "openverse/server/server.hpp"

namespace testing_support {

namespace fs = std::filesystem;

/// mkdtemp directory, removed on destruction.
class TempDir {
public:
    TempDir() {
        std::string tmpl = (fs::temp_directory_path() / "openverse-test-XXXXXX").string();
        if (!::mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
        path_ = tmpl;
    }
    ~TempDir() {
        std::error_code ec;
        fs::permissions(path_, fs::perms::owner_all, fs::perm_options::add, ec);
        fs::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const fs::path& path() const { return path_; }

private:
    fs::path path_;
};

inline fs::path demo_dir() {
    return fs::path(OPENVERSE_SOURCE_DIR) / "share" / "demo";
}

inline fs::path vectors_dir() {
    return fs::path(OPENVERSE_SOURCE_DIR) / "tests" / "vectors";
}

/// Copies the demo worlds and assets into `dir`.
inline void seed_persist_dir(const fs::path& dir) {
    fs::copy(demo_dir(), dir, fs::copy_options::recursive | fs::copy_options::overwrite_existing);
}

/// A running plaintext server on an ephemeral loopback port with the demo
/// data in a fresh persist dir.
struct LocalServer {
    TempDir dir;
    std::unique_ptr<openverse::Server> server;

    explicit LocalServer(openverse::ServerConfig cfg = {}) {
        seed_persist_dir(dir.path());
        cfg.bind_address = "127.0.0.1";
        cfg.port = 0;
        cfg.dev_plaintext = true;
        cfg.persist_dir = dir.path();
        if (cfg.threads == 0) cfg.threads = 2;
        server = std::make_unique<openverse::Server>(cfg);
        server->start();
    }
    ~LocalServer() {
        if (server) server->stop();
    }

    std::string ws_url() const { return "ws://127.0.0.1:" + std::to_string(server->port()) + "/sync"; }
    std::string http_url() const { return "http://127.0.0.1:" + std::to_string(server->port()); }
};

}  // namespace testing_support
