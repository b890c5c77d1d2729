#include "openverse/server/server.hpp"

#include <atomic>
#include <chrono>
#include <deque>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>
#include <vector>

#include <boost/asio.hpp>
#include <boost/asio/ssl.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/ssl.hpp>
#include <boost/beast/websocket.hpp>
#include <boost/beast/websocket/ssl.hpp>
#include <spdlog/spdlog.h>

#include "openverse/protocol/admission.hpp"
#include "openverse/protocol/codec.hpp"
#include "openverse/server/persistence.hpp"
#include "openverse/server/room.hpp"
#include "openverse/world/document.hpp"
#include "openverse/world/json_io.hpp"

namespace openverse {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace ssl = asio::ssl;
namespace fs = std::filesystem;
using tcp = asio::ip::tcp;
using asio::use_awaitable;

namespace {

constexpr const char* kServerName = "openverse";

std::int64_t monotonic_ms() {
    using namespace std::chrono;
    return duration_cast<milliseconds>(steady_clock::now().time_since_epoch()).count();
}

std::string content_type_for(const fs::path& path) {
    static const std::map<std::string, std::string> types = {
        {".html", "text/html; charset=utf-8"},
        {".js", "text/javascript"},
        {".css", "text/css"},
        {".json", "application/json"},
        {".png", "image/png"},
        {".jpg", "image/jpeg"},
        {".jpeg", "image/jpeg"},
        {".gif", "image/gif"},
        {".webp", "image/webp"},
        {".svg", "image/svg+xml"},
        {".glb", "model/gltf-binary"},
        {".gltf", "model/gltf+json"},
        {".mp3", "audio/mpeg"},
        {".ogg", "audio/ogg"},
        {".wav", "audio/wav"},
        {".mp4", "video/mp4"},
        {".webm", "video/webm"},
    };
    auto it = types.find(path.extension().string());
    return it == types.end() ? "application/octet-stream" : it->second;
}

bool safe_relative_path(std::string_view path) {
    if (path.empty() || path.front() == '/') return false;
    std::size_t start = 0;
    while (start <= path.size()) {
        auto end = path.find('/', start);
        if (end == std::string_view::npos) end = path.size();
        const auto segment = path.substr(start, end - start);
        if (segment.empty() || segment == "." || segment == "..") return false;
        start = end + 1;
    }
    for (char c : path) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                        c == '-' || c == '_' || c == '.' || c == '/';
        if (!ok) return false;
    }
    return true;
}

bool safe_host(std::string_view host) {
    if (host.empty() || host.size() > 255) return false;
    for (char c : host) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                        c == '-' || c == '.' || c == ':' || c == '[' || c == ']';
        if (!ok) return false;
    }
    return true;
}

/// Transport-side handle of one WebSocket session. send() and close() may
/// be called from any thread.
class Connection {
public:
    virtual ~Connection() = default;
    virtual void send(std::shared_ptr<const std::string> frame) = 0;
    virtual void close() = 0;
    /// Closes once queued frames are written.
    virtual void close_after_drain() = 0;
    virtual std::size_t queue_depth() const = 0;
};

class Hub;

/// One room: its state, the connections of its sessions and the tick timer.
class RoomActor : public std::enable_shared_from_this<RoomActor> {
public:
    RoomActor(Hub& hub, RoomState state, asio::io_context& ioc)
        : hub_(hub), state_(std::move(state)), timer_(asio::make_strand(ioc)) {}

    void start();
    void stop_ticking() {
        asio::post(timer_.get_executor(), [self = shared_from_this()] {
            self->stopped_ = true;
            self->timer_.cancel();
        });
    }

    /// Runs admission for a Hello; on success registers the connection.
    std::optional<SessionId> admit_session(const WireMessage& hello, std::shared_ptr<Connection> conn);

    void enqueue(Inbound in) {
        std::lock_guard lock(inbox_mu_);
        inbox_.push_back(std::move(in));
    }

    /// Synchronous persist and disconnect, used at shutdown.
    void shutdown();

    std::size_t session_count() {
        std::lock_guard lock(mu_);
        return state_.sessions.size();
    }

    nlohmann::json health() {
        std::lock_guard lock(mu_);
        return {{"room", state_.room_id},
                {"sessions", state_.sessions.size()},
                {"entities", state_.entities.size()},
                {"tick_utilization", utilization_.load()}};
    }

    double utilization() const { return utilization_.load(); }

private:
    void schedule();
    void tick();
    void deliver(const FanoutPlan& plan);
    void drop_connection(const SessionId& session, bool drain);
    void maybe_persist(std::int64_t now);

    Hub& hub_;
    std::mutex mu_;
    RoomState state_;
    std::map<SessionId, std::shared_ptr<Connection>> conns_;

    std::mutex inbox_mu_;
    std::vector<Inbound> inbox_;

    asio::steady_timer timer_;
    std::chrono::steady_clock::time_point next_tick_;
    bool stopped_ = false;

    std::int64_t last_persist_ms_ = 0;
    bool persist_in_flight_ = false;
    std::atomic<double> utilization_{0.0};
};

class Hub {
public:
    Hub(const ServerConfig& config, asio::io_context& ioc, asio::thread_pool& io_pool)
        : config_(config), ioc_(ioc), io_pool_(io_pool), ids_() {}

    const ServerConfig& config() const { return config_; }
    asio::thread_pool& io_pool() { return io_pool_; }
    SessionIdAllocator& ids() { return ids_; }

    AdmissionPolicy policy() const {
        return {kProtocolVersion, config_.max_room_size};
    }

    /// Loads and validates `<persist>/worlds/<id>.world.json`; null when the
    /// file is missing or invalid.
    std::shared_ptr<const WorldDescription> load_world(const std::string& world_id) const {
        if (!is_valid_world_id(world_id)) return nullptr;
        const fs::path path = config_.persist_dir / "worlds" / (world_id + ".world.json");
        std::error_code ec;
        if (!fs::exists(path, ec)) return nullptr;
        try {
            auto world = std::make_shared<WorldDescription>(load_world_file(path));
            auto violations = validate_world(*world, {config_.dev_plaintext});
            if (world->world_id != world_id) violations.push_back({"world_id", "does not match file name"});
            if (!violations.empty()) {
                spdlog::error("event=world_invalid world={} path={} rule=\"{}\"", world_id,
                              violations.front().path, violations.front().rule);
                return nullptr;
            }
            return world;
        } catch (const Error& e) {
            spdlog::error("event=world_invalid world={} path={} error=\"{}\"", world_id, e.path(), e.what());
            return nullptr;
        }
    }

    std::shared_ptr<RoomActor> find_or_create(const std::string& room_id) {
        std::lock_guard lock(mu_);
        if (auto it = rooms_.find(room_id); it != rooms_.end()) return it->second;
        if (!config_.auto_create_rooms || !is_valid_room_id(room_id)) return nullptr;
        auto world = load_world(world_of_room(room_id));
        if (!world) return nullptr;
        auto loaded = load_room_from_disk(world, config_.persist_dir, room_id);
        auto actor = std::make_shared<RoomActor>(*this, std::move(loaded.room), ioc_);
        rooms_.emplace(room_id, actor);
        spdlog::info("event=room_open room={} world={}", room_id, world->world_id);
        actor->start();
        return actor;
    }

    std::vector<std::shared_ptr<RoomActor>> rooms() {
        std::lock_guard lock(mu_);
        std::vector<std::shared_ptr<RoomActor>> out;
        for (auto& [id, r] : rooms_) out.push_back(r);
        return out;
    }

    nlohmann::json health() {
        nlohmann::json rooms = nlohmann::json::array();
        std::size_t sessions = 0;
        double utilization = 0;
        for (auto& r : this->rooms()) {
            auto h = r->health();
            sessions += h["sessions"].get<std::size_t>();
            utilization = std::max(utilization, h["tick_utilization"].get<double>());
            rooms.push_back(std::move(h));
        }
        return {{"status", "ok"},
                {"rooms", rooms.size()},
                {"sessions", sessions},
                {"tick_utilization", utilization},
                {"room_detail", std::move(rooms)}};
    }

private:
    const ServerConfig& config_;
    asio::io_context& ioc_;
    asio::thread_pool& io_pool_;
    SessionIdAllocator ids_;
    std::mutex mu_;
    std::map<std::string, std::shared_ptr<RoomActor>> rooms_;
};

void RoomActor::start() {
    next_tick_ = std::chrono::steady_clock::now() + std::chrono::milliseconds(hub_.config().tick_ms);
    last_persist_ms_ = monotonic_ms();
    asio::post(timer_.get_executor(), [self = shared_from_this()] { self->schedule(); });
}

void RoomActor::schedule() {
    if (stopped_) return;
    timer_.expires_at(next_tick_);
    timer_.async_wait([self = shared_from_this()](beast::error_code ec) {
        if (ec || self->stopped_) return;
        self->tick();
        self->schedule();
    });
}

std::optional<SessionId> RoomActor::admit_session(const WireMessage& hello, std::shared_ptr<Connection> conn) {
    std::lock_guard lock(mu_);
    const json snapshot =
        snapshot_body(state_.world ? state_.world->world_id : world_of_room(state_.room_id), state_.entities);
    WireMessage reply = admit(hello, true, state_.sessions.size(), hub_.policy(), hub_.ids(), snapshot);
    reply.ts = hello.ts;
    if (reply.kind != MessageKind::Welcome) {
        const std::string code = reply.body["code"];
        spdlog::warn("event=admission_refused room={} code={} population={}", state_.room_id, code,
                     state_.sessions.size());
        conn->send(std::make_shared<const std::string>(encode(reply)));
        if (code == to_string(ErrorCode::VersionMismatch)) conn->close_after_drain();
        return std::nullopt;
    }
    SessionId session = reply.body["session"];
    conn->send(std::make_shared<const std::string>(encode(reply)));
    conns_.emplace(session, std::move(conn));
    auto joined = join_session(std::move(state_), session, monotonic_ms());
    state_ = std::move(joined.state);
    deliver(joined.plan);
    spdlog::info("event=admit room={} session={} population={}", state_.room_id, session,
                 state_.sessions.size());
    return session;
}

void RoomActor::deliver(const FanoutPlan& plan) {
    for (const auto& d : plan) {
        auto frame = std::make_shared<const std::string>(encode(d.msg));
        for (const auto& to : d.recipients) {
            if (auto it = conns_.find(to); it != conns_.end()) it->second->send(frame);
        }
    }
}

void RoomActor::drop_connection(const SessionId& session, bool drain) {
    auto it = conns_.find(session);
    if (it == conns_.end()) return;
    if (drain) {
        it->second->close_after_drain();
    } else {
        it->second->close();
    }
    conns_.erase(it);
}

void RoomActor::tick() {
    const auto started = std::chrono::steady_clock::now();
    std::vector<Inbound> batch;
    {
        std::lock_guard lock(inbox_mu_);
        batch.swap(inbox_);
    }
    const auto& cfg = hub_.config();
    {
        std::lock_guard lock(mu_);
        if (!batch.empty()) {
            auto step = room_step(std::move(state_), batch);
            state_ = std::move(step.state);
            deliver(step.plan);
            for (const auto& s : step.departed) {
                spdlog::info("event=leave room={} session={}", state_.room_id, s);
                drop_connection(s, true);
            }
        }
        const auto now = monotonic_ms();
        auto sweep = heartbeat_sweep(std::move(state_), now, cfg.heartbeat_timeout_ms);
        state_ = std::move(sweep.state);
        deliver(sweep.plan);
        for (const auto& s : sweep.evictions) {
            spdlog::info("event=evict room={} session={} reason=heartbeat_timeout", state_.room_id, s);
            drop_connection(s, false);
        }
        // Sessions whose outbound queue overflowed were closed by the
        // transport; their read loop posts a Bye.
        for (auto& [id, s] : state_.sessions) {
            if (auto c = conns_.find(id); c != conns_.end()) s.outbound_depth = c->second->queue_depth();
        }
        maybe_persist(now);
    }

    const double busy = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
    const double load = busy / cfg.tick_ms;
    utilization_.store(0.9 * utilization_.load() + 0.1 * load);

    next_tick_ += std::chrono::milliseconds(cfg.tick_ms);
    const auto now = std::chrono::steady_clock::now();
    if (next_tick_ < now) next_tick_ = now;
}

void RoomActor::maybe_persist(std::int64_t now) {
    if (!state_.dirty || persist_in_flight_) return;
    if (now - last_persist_ms_ < static_cast<std::int64_t>(hub_.config().persist_debounce_ms)) return;
    persist_in_flight_ = true;
    last_persist_ms_ = now;
    state_.dirty = false;
    asio::post(hub_.io_pool(), [self = shared_from_this(), snapshot = snapshot_of(state_)] {
        bool ok = true;
        try {
            write_snapshot(snapshot, self->hub_.config().persist_dir);
            spdlog::info("event=persisted room={} entities={}", snapshot.room_id, snapshot.entities.size());
        } catch (const std::exception& e) {
            ok = false;
            spdlog::error("event=persist_failed room={} error=\"{}\"", snapshot.room_id, e.what());
        }
        std::lock_guard lock(self->mu_);
        if (!ok) self->state_.dirty = true;
        self->persist_in_flight_ = false;
    });
}

void RoomActor::shutdown() {
    std::lock_guard lock(mu_);
    if (state_.dirty) persist_room(state_, hub_.config().persist_dir);
    for (auto& [id, c] : conns_) c->close();
    conns_.clear();
}

template <class Stream>
class WsConnection : public Connection, public std::enable_shared_from_this<WsConnection<Stream>> {
public:
    WsConnection(websocket::stream<Stream> ws, std::size_t limit) : ws_(std::move(ws)), limit_(limit) {}

    void send(std::shared_ptr<const std::string> frame) override {
        asio::post(ws_.get_executor(), [self = this->shared_from_this(), frame = std::move(frame)]() mutable {
            self->on_send(std::move(frame));
        });
    }

    void close() override {
        asio::post(ws_.get_executor(), [self = this->shared_from_this()] { self->do_close(); });
    }

    void close_after_drain() override {
        asio::post(ws_.get_executor(), [self = this->shared_from_this()] {
            self->close_after_drain_ = true;
            if (!self->writing_) self->do_close();
        });
    }

    std::size_t queue_depth() const override { return depth_.load(); }

    asio::awaitable<void> run(http::request<http::string_body> req, Hub& hub);

private:
    void on_send(std::shared_ptr<const std::string> frame) {
        if (closed_) return;
        if (queue_.size() >= limit_) {
            spdlog::warn("event=outbound_overflow queued={} limit={}", queue_.size(), limit_);
            do_close();
            return;
        }
        queue_.push_back(std::move(frame));
        depth_.store(queue_.size());
        if (!writing_) write_next();
    }

    void write_next() {
        writing_ = true;
        ws_.text(true);
        ws_.async_write(asio::buffer(*queue_.front()),
                        [self = this->shared_from_this()](beast::error_code ec, std::size_t) {
                            self->on_write(ec);
                        });
    }

    void on_write(beast::error_code ec) {
        writing_ = false;
        if (ec) {
            queue_.clear();
            depth_.store(0);
            do_close();
            return;
        }
        queue_.pop_front();
        depth_.store(queue_.size());
        if (!queue_.empty() && !closed_) {
            write_next();
        } else if (close_after_drain_) {
            do_close();
        }
    }

    void do_close() {
        if (closed_) return;
        closed_ = true;
        beast::error_code ec;
        beast::get_lowest_layer(ws_).socket().shutdown(tcp::socket::shutdown_both, ec);
        beast::get_lowest_layer(ws_).close();
    }

    void reply(const WireMessage& msg) { on_send(std::make_shared<const std::string>(encode(msg))); }

    websocket::stream<Stream> ws_;
    std::size_t limit_;
    std::deque<std::shared_ptr<const std::string>> queue_;
    std::atomic<std::size_t> depth_{0};
    bool writing_ = false;
    bool closed_ = false;
    bool close_after_drain_ = false;
};

template <class Stream>
asio::awaitable<void> WsConnection<Stream>::run(http::request<http::string_body> req, Hub& hub) {
    std::shared_ptr<RoomActor> room;
    SessionId session;
    std::string room_id;
    try {
        ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
        ws_.set_option(websocket::stream_base::decorator([](websocket::response_type& res) {
            res.set(http::field::server, kServerName);
        }));
        ws_.read_message_max(64 * 1024);
        co_await ws_.async_accept(req, use_awaitable);

        beast::flat_buffer buffer;
        for (;;) {
            co_await ws_.async_read(buffer, use_awaitable);
            const std::string text = beast::buffers_to_string(buffer.data());
            buffer.consume(buffer.size());
            const auto recv_ms = monotonic_ms();

            WireMessage msg;
            try {
                msg = decode(text);
            } catch (const Error& e) {
                reply(make_error(room_id, e.code(), e.what()));
                continue;
            }
            if (room) {
                room->enqueue({session, std::move(msg), recv_ms});
                continue;
            }
            if (msg.kind != MessageKind::Hello) {
                reply(make_error(msg.room, ErrorCode::Forbidden, "send Hello first"));
                continue;
            }
            auto candidate = hub.find_or_create(msg.room);
            if (!candidate) {
                WireMessage err = make_error(msg.room, ErrorCode::RoomUnknown, "no world for room " + msg.room);
                if (msg.body.value("version", -1) != kProtocolVersion) {
                    err = admit(msg, false, 0, hub.policy(), hub.ids(), json::object());
                }
                reply(err);
                continue;
            }
            if (auto admitted = candidate->admit_session(msg, this->shared_from_this())) {
                room = std::move(candidate);
                session = *admitted;
                room_id = msg.room;
            }
        }
    } catch (const boost::system::system_error&) {
        // Peer closed, timed out or the room closed us.
    }
    if (room) {
        WireMessage bye;
        bye.kind = MessageKind::Bye;
        bye.room = room_id;
        room->enqueue({session, std::move(bye), monotonic_ms()});
    }
    do_close();
}

template <class Body>
void common_headers(http::response<Body>& res, bool tls, unsigned version, bool keep_alive) {
    res.version(version);
    res.set(http::field::server, kServerName);
    if (tls) res.set(http::field::strict_transport_security, "max-age=31536000");
    res.keep_alive(keep_alive);
}

http::response<http::string_body> handle_http(const http::request<http::string_body>& req, Hub& hub,
                                              std::uint16_t bound_port) {
    const auto& cfg = hub.config();
    const bool tls = !cfg.dev_plaintext;
    http::response<http::string_body> res;
    common_headers(res, tls, req.version(), req.keep_alive());
    auto not_found = [&] {
        res.result(http::status::not_found);
        res.body().clear();
        res.prepare_payload();
        return res;
    };

    if (req.method() != http::verb::get && req.method() != http::verb::head) {
        res.result(http::status::method_not_allowed);
        res.set(http::field::allow, "GET, HEAD");
        res.prepare_payload();
        return res;
    }
    std::string target(req.target());
    if (auto q = target.find_first_of("?#"); q != std::string::npos) target.resize(q);

    if (target == "/healthz") {
        res.result(http::status::ok);
        res.set(http::field::content_type, "application/json");
        res.set(http::field::cache_control, "no-store");
        res.body() = hub.health().dump();
    } else if (target.starts_with("/w/")) {
        const std::string world_id = target.substr(3);
        auto world = hub.load_world(world_id);
        if (!world) return not_found();
        std::string host(req[http::field::host]);
        if (!safe_host(host)) host = "localhost:" + std::to_string(bound_port);
        const std::string endpoint = std::string(tls ? "wss://" : "ws://") + host + "/sync";
        try {
            res.body() = emit_world_document(*world, endpoint, {cfg.dev_plaintext});
        } catch (const Error& e) {
            spdlog::error("event=emit_failed world={} path={} error=\"{}\"", world_id, e.path(), e.what());
            return not_found();
        }
        res.result(http::status::ok);
        res.set(http::field::content_type, "text/html; charset=utf-8");
    } else if (target.starts_with("/assets/")) {
        const std::string rel = target.substr(8);
        if (!safe_relative_path(rel)) return not_found();
        const fs::path path = cfg.persist_dir / "assets" / rel;
        std::error_code ec;
        if (!fs::is_regular_file(path, ec)) return not_found();
        std::ifstream in(path, std::ios::binary);
        if (!in) return not_found();
        std::ostringstream data;
        data << in.rdbuf();
        res.result(http::status::ok);
        res.set(http::field::content_type, content_type_for(path));
        res.set(http::field::cache_control, "public, max-age=3600");
        res.body() = std::move(data).str();
    } else if (target == "/sync") {
        res.result(http::status::upgrade_required);
        res.set(http::field::upgrade, "websocket");
    } else {
        return not_found();
    }
    res.prepare_payload();
    if (req.method() == http::verb::head) res.body().clear();
    return res;
}

}  // namespace

struct Server::Impl {
    explicit Impl(ServerConfig cfg)
        : config(std::move(cfg)),
          ssl_ctx(ssl::context::tls_server),
          io_pool(1),
          hub(config, ioc, io_pool),
          acceptor(ioc) {}

    ServerConfig config;
    asio::io_context ioc;
    ssl::context ssl_ctx;
    asio::thread_pool io_pool;
    Hub hub;
    tcp::acceptor acceptor;
    std::uint16_t bound_port = 0;
    std::vector<std::thread> threads;
    std::optional<asio::executor_work_guard<asio::io_context::executor_type>> work;
    std::atomic<bool> stopped{false};

    void accept_next();
    asio::awaitable<void> serve_socket(tcp::socket socket);
    template <class Stream>
    asio::awaitable<void> http_loop(Stream stream);
};

void Server::Impl::accept_next() {
    acceptor.async_accept(asio::make_strand(ioc), [this](beast::error_code ec, tcp::socket socket) {
        if (ec) {
            if (ec != asio::error::operation_aborted) accept_next();
            return;
        }
        socket.set_option(tcp::no_delay(true), ec);
        auto exec = socket.get_executor();
        asio::co_spawn(exec, serve_socket(std::move(socket)), asio::detached);
        accept_next();
    });
}

asio::awaitable<void> Server::Impl::serve_socket(tcp::socket socket) {
    try {
        if (config.dev_plaintext) {
            co_await http_loop(beast::tcp_stream(std::move(socket)));
        } else {
            beast::ssl_stream<beast::tcp_stream> stream(beast::tcp_stream(std::move(socket)), ssl_ctx);
            beast::get_lowest_layer(stream).expires_after(std::chrono::seconds(30));
            co_await stream.async_handshake(ssl::stream_base::server, use_awaitable);
            co_await http_loop(std::move(stream));
        }
    } catch (const std::exception& e) {
        spdlog::debug("event=connection_error error=\"{}\"", e.what());
    }
}

template <class Stream>
asio::awaitable<void> Server::Impl::http_loop(Stream stream) {
    beast::flat_buffer buffer;
    for (;;) {
        http::request<http::string_body> req;
        beast::get_lowest_layer(stream).expires_after(std::chrono::seconds(30));
        co_await http::async_read(stream, buffer, req, use_awaitable);

        if (websocket::is_upgrade(req)) {
            std::string_view target(req.target().data(), req.target().size());
            if (target.substr(0, target.find('?')) != "/sync") {
                http::response<http::string_body> res;
                common_headers(res, !config.dev_plaintext, req.version(), false);
                res.result(http::status::not_found);
                res.prepare_payload();
                co_await http::async_write(stream, res, use_awaitable);
                co_return;
            }
            beast::get_lowest_layer(stream).expires_never();
            auto conn = std::make_shared<WsConnection<Stream>>(websocket::stream<Stream>(std::move(stream)),
                                                               config.outbound_queue_limit);
            co_await conn->run(std::move(req), hub);
            co_return;
        }

        auto res = handle_http(req, hub, bound_port);
        const bool keep_alive = res.keep_alive();
        co_await http::async_write(stream, res, use_awaitable);
        if (!keep_alive) break;
    }
    beast::error_code ec;
    beast::get_lowest_layer(stream).socket().shutdown(tcp::socket::shutdown_send, ec);
}

Server::Server(ServerConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {
    auto& cfg = impl_->config;
    if (cfg.tick_ms == 0 || cfg.max_room_size == 0 || cfg.heartbeat_timeout_ms == 0 ||
        cfg.outbound_queue_limit == 0) {
        throw StartupError(kExitUsage, "tick-ms, max-room-size and heartbeat-timeout-ms must be > 0");
    }
    if (cfg.persist_dir.empty()) throw StartupError(kExitUsage, "a persist dir is required");

    try {
        fs::create_directories(cfg.persist_dir / "rooms");
        fs::create_directories(cfg.persist_dir / "worlds");
        const fs::path probe = cfg.persist_dir / "rooms" / ".write-probe";
        {
            std::ofstream out(probe, std::ios::trunc);
            out << "ok";
            if (!out) throw std::runtime_error("cannot write " + probe.string());
        }
        fs::remove(probe);
    } catch (const std::exception& e) {
        throw StartupError(kExitPersistDir, "persist dir unusable: " + std::string(e.what()));
    }

    if (!cfg.dev_plaintext) {
        if (cfg.cert.empty() || cfg.key.empty()) {
            throw StartupError(kExitTls, "TLS certificate and key are required (or pass --dev-plaintext)");
        }
        try {
            impl_->ssl_ctx.set_options(ssl::context::default_workarounds | ssl::context::no_sslv2 |
                                       ssl::context::no_sslv3 | ssl::context::no_tlsv1 |
                                       ssl::context::no_tlsv1_1);
            impl_->ssl_ctx.use_certificate_chain_file(cfg.cert.string());
            impl_->ssl_ctx.use_private_key_file(cfg.key.string(), ssl::context::pem);
        } catch (const boost::system::system_error& e) {
            throw StartupError(kExitTls, "cannot load TLS material: " + std::string(e.what()));
        }
    }

    beast::error_code ec;
    const auto address = asio::ip::make_address(cfg.bind_address, ec);
    if (ec) throw StartupError(kExitUsage, "bad bind address " + cfg.bind_address);
    const tcp::endpoint endpoint(address, cfg.port);
    auto& acceptor = impl_->acceptor;
    acceptor.open(endpoint.protocol(), ec);
    if (!ec) acceptor.set_option(asio::socket_base::reuse_address(true), ec);
    if (!ec) acceptor.bind(endpoint, ec);
    if (!ec) acceptor.listen(asio::socket_base::max_listen_connections, ec);
    if (ec) {
        throw StartupError(kExitPortBusy, "cannot listen on " + cfg.bind_address + ":" +
                                              std::to_string(cfg.port) + ": " + ec.message());
    }
    impl_->bound_port = acceptor.local_endpoint().port();
}

Server::~Server() {
    stop();
}

std::uint16_t Server::port() const noexcept {
    return impl_->bound_port;
}

void Server::start() {
    auto& impl = *impl_;
    impl.work.emplace(impl.ioc.get_executor());
    impl.accept_next();
    unsigned n = impl.config.threads;
    if (n == 0) n = std::max(2u, std::thread::hardware_concurrency());
    for (unsigned i = 0; i < n; ++i) impl.threads.emplace_back([&impl] { impl.ioc.run(); });
    spdlog::info("event=listening address={} port={} tls={} persist_dir={}", impl.config.bind_address,
                 impl.bound_port, !impl.config.dev_plaintext, impl.config.persist_dir.string());
}

void Server::stop() {
    auto& impl = *impl_;
    if (impl.stopped.exchange(true)) return;
    asio::post(impl.ioc, [&impl] {
        beast::error_code ec;
        impl.acceptor.close(ec);
    });
    for (auto& room : impl.hub.rooms()) {
        room->stop_ticking();
        room->shutdown();
    }
    impl.io_pool.join();
    if (!impl.threads.empty()) {
        // Let queued closes run before the loop stops.
        std::this_thread::sleep_for(std::chrono::milliseconds(50));
    }
    impl.work.reset();
    impl.ioc.stop();
    for (auto& t : impl.threads) t.join();
    impl.threads.clear();
    spdlog::info("event=stopped");
}

nlohmann::json Server::health() const {
    return impl_->hub.health();
}

}  // namespace openverse
