#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <stdexcept>
#include <string>

#include <json.hpp>

namespace openverse {

struct ServerConfig {
    std::string bind_address = "0.0.0.0";
    /// 0 picks an ephemeral port; see Server::port().
    std::uint16_t port = 8443;
    std::filesystem::path cert;
    std::filesystem::path key;
    std::filesystem::path persist_dir;
    std::uint32_t tick_ms = 50;
    std::uint32_t max_room_size = 20;
    std::uint32_t heartbeat_timeout_ms = 30000;
    std::uint32_t persist_debounce_ms = 5000;
    std::size_t outbound_queue_limit = 256;
    /// Serve plain HTTP/WS instead of TLS. Localhost testing only.
    bool dev_plaintext = false;
    bool auto_create_rooms = true;
    unsigned threads = 0;
};

/// Process exit codes for startup failures.
enum ExitCode : int {
    kExitOk = 0,
    kExitUsage = 2,
    kExitTls = 3,
    kExitPortBusy = 4,
    kExitPersistDir = 5,
};

class StartupError : public std::runtime_error {
public:
    StartupError(int exit_code, const std::string& what)
        : std::runtime_error(what), exit_code_(exit_code) {}
    int exit_code() const noexcept { return exit_code_; }

private:
    int exit_code_;
};

/// The authoritative sync service: WebSocket sessions at /sync, world
/// documents at /w/<world_id>, files at /assets/<path> and /healthz.
///
/// Each room is mutated under its own lock by at most one batch at a time;
/// a per-room timer drains the inbound queue every tick. Outbound frames go
/// through bounded per-connection queues and a connection that overflows is
/// closed. Snapshots are written on a separate I/O thread.
class Server {
public:
    /// Validates the config, checks the persist dir, loads TLS material and
    /// binds. Throws StartupError with the matching exit code.
    explicit Server(ServerConfig config);
    ~Server();

    Server(const Server&) = delete;
    Server& operator=(const Server&) = delete;

    /// Bound port (useful with port 0).
    std::uint16_t port() const noexcept;

    /// Starts the worker threads and returns immediately.
    void start();

    /// Stops accepting, closes sessions and persists every dirty room.
    void stop();

    /// Same document /healthz serves.
    nlohmann::json health() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace openverse
