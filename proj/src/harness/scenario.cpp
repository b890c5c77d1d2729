#include "openverse/harness/scenario.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <future>
#include <numbers>
#include <random>
#include <stdexcept>
#include <thread>

#include <boost/asio.hpp>
#include <spdlog/spdlog.h>

#include "openverse/harness/net_client.hpp"
#include "openverse/protocol/codec.hpp"

namespace openverse {

namespace asio = boost::asio;
using asio::use_awaitable;
using Clock = std::chrono::steady_clock;

void validate_profile(const BotProfile& p) {
    if (!(p.update_rate_hz > 0 && p.update_rate_hz <= 60)) {
        throw std::invalid_argument("update rate must be in (0, 60] Hz");
    }
    if (!(p.lifetime_s >= 0) || !(p.think_jitter_ms >= 0)) {
        throw std::invalid_argument("lifetime and jitter must be non-negative");
    }
}

Movement movement_from_string(std::string_view name) {
    if (name == "orbit") return Movement::orbit;
    if (name == "random_walk" || name == "random-walk") return Movement::random_walk;
    if (name == "idle") return Movement::idle;
    throw std::invalid_argument("unknown movement " + std::string(name));
}

namespace {

std::mt19937_64 bot_rng(std::uint64_t seed, std::size_t bot, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(bot), static_cast<std::uint32_t>(stream)};
    return std::mt19937_64(seq);
}

std::int64_t wall_ms() {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
}

std::int64_t steady_us() {
    return std::chrono::duration_cast<std::chrono::microseconds>(Clock::now().time_since_epoch()).count();
}

json transform_fields(const Transform& t) {
    return {{"px", t.px}, {"py", t.py}, {"pz", t.pz}, {"rx", t.rx}, {"ry", t.ry},
            {"rz", t.rz}, {"sx", t.sx}, {"sy", t.sy}, {"sz", t.sz}};
}

}  // namespace

std::vector<Transform> planned_poses(const BotProfile& profile, std::uint64_t seed, std::size_t bot,
                                     std::size_t count) {
    auto rng = bot_rng(seed, bot, 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double cx = -20 + 40 * unit(rng);
    const double cz = -20 + 40 * unit(rng);
    const double radius = 1 + 4 * unit(rng);
    const double phase = 2 * std::numbers::pi * unit(rng);
    // Roughly one lap every 12 s regardless of rate.
    const double omega = 2 * std::numbers::pi / (12.0 * profile.update_rate_hz);

    std::vector<Transform> out;
    out.reserve(count);
    Transform t;
    t.px = cx;
    t.py = 1.6;
    t.pz = cz;
    for (std::size_t k = 0; k < count; ++k) {
        switch (profile.movement) {
            case Movement::orbit: {
                const double a = phase + omega * static_cast<double>(k);
                t.px = cx + radius * std::cos(a);
                t.pz = cz + radius * std::sin(a);
                t.ry = normalize_degrees(-a * 180 / std::numbers::pi);
                break;
            }
            case Movement::random_walk: {
                t.px += unit(rng) - 0.5;
                t.pz += unit(rng) - 0.5;
                t.ry = normalize_degrees(t.ry + 30 * (unit(rng) - 0.5));
                break;
            }
            case Movement::idle:
                break;
        }
        out.push_back(t);
    }
    return out;
}

namespace {

struct Bot {
    std::size_t index = 0;
    std::unique_ptr<WsClient> ws;
    SessionId session;
    std::string entity;
    std::uint64_t seq = 0;

    std::uint64_t sent = 0;
    std::uint64_t received = 0;
    std::uint64_t errors = 0;
    std::uint64_t write_failures = 0;
    bool broken = false;
    std::string failure;
    std::vector<LatencySample> samples;
    std::vector<std::uint64_t> buckets;
    std::vector<SentRecord> log;
};

struct RunClock {
    std::atomic<Clock::rep> start_ticks{0};

    Clock::time_point start() const { return Clock::time_point(Clock::duration(start_ticks.load())); }
    void set_start(Clock::time_point t) { start_ticks.store(t.time_since_epoch().count()); }
};

WireMessage frame(MessageKind kind, const std::string& room, const std::string& entity = {},
                  std::uint64_t seq = 0, json body = json::object()) {
    WireMessage m;
    m.kind = kind;
    m.room = room;
    m.entity = entity;
    m.seq = seq;
    m.body = std::move(body);
    m.ts = wall_ms();
    return m;
}

// Connects, says Hello and waits for the answer. Returns "Welcome" or the
// refusal code.
asio::awaitable<std::string> join(Bot& bot, Url url, std::string room) {
    co_await bot.ws->connect(url);
    std::string hello = encode(frame(MessageKind::Hello, room, {}, 0, {{"version", kProtocolVersion}}));
    co_await bot.ws->write(std::move(hello));
    std::string outcome;
    while (outcome.empty()) {
        std::string text = co_await bot.ws->read();
        WireMessage reply = decode(text);
        if (reply.kind == MessageKind::Welcome) {
            bot.session = reply.body.at("session").get<std::string>();
            outcome = "Welcome";
        } else if (reply.kind == MessageKind::Error) {
            outcome = reply.body.at("code").get<std::string>();
        }
    }
    co_return outcome;
}

asio::awaitable<void> create_avatar(Bot& bot, std::string room, Transform pose) {
    bot.entity = "avatar-" + bot.session;
    bot.seq = 1;
    json body = {{"persistent", false},
                 {"components",
                  {{"transform", transform_fields(pose)}, {"avatar", {{"name", "bot-" + std::to_string(bot.index)}}}}}};
    std::string text = encode(frame(MessageKind::EntityCreate, room, bot.entity, bot.seq, std::move(body)));
    co_await bot.ws->write(std::move(text));
    ++bot.sent;
}

asio::awaitable<void> read_loop(Bot& bot, const RunClock& clock) {
    try {
        for (;;) {
            std::string text = co_await bot.ws->read();
            const auto now = Clock::now();
            const std::int64_t now_us = steady_us();
            WireMessage msg;
            try {
                msg = decode(text);
            } catch (const Error&) {
                ++bot.errors;
                continue;
            }
            if (msg.kind == MessageKind::Error) {
                ++bot.errors;
                continue;
            }
            if (!is_update_bearing(msg.kind) || msg.sender == kServerOwner || msg.sender == bot.session) continue;
            ++bot.received;
            const auto since = std::chrono::duration<double>(now - clock.start()).count();
            const std::size_t bucket = since > 0 ? static_cast<std::size_t>(since) : 0;
            if (bot.buckets.size() <= bucket) bot.buckets.resize(bucket + 1, 0);
            ++bot.buckets[bucket];
            if (msg.kind == MessageKind::EntityUpdate && msg.body.contains("probe_us") &&
                msg.body["probe_us"].is_number()) {
                const double sent_us = msg.body["probe_us"].get<double>();
                bot.samples.push_back({msg.entity, sent_us / 1000.0, static_cast<double>(now_us) / 1000.0});
            }
        }
    } catch (const std::exception&) {
        // Closed by us at the end of the run, or by the server.
    }
}

asio::awaitable<void> send_loop(Bot& bot, const ScenarioOptions& opt, const RunClock& clock,
                                std::vector<Transform> poses) {
    auto jitter_rng = bot_rng(opt.seed, bot.index, 2);
    std::uniform_real_distribution<double> jitter(0.0, opt.profile.think_jitter_ms);
    asio::steady_timer timer(bot.ws->executor());
    const double period_ms = 1000.0 / opt.profile.update_rate_hz;
    auto last_ping = Clock::now();

    for (std::size_t k = 0; k < poses.size(); ++k) {
        double offset_ms = period_ms * static_cast<double>(k);
        if (opt.profile.think_jitter_ms > 0) offset_ms += jitter(jitter_rng);
        timer.expires_at(clock.start() + std::chrono::microseconds(static_cast<std::int64_t>(offset_ms * 1000)));
        co_await timer.async_wait(use_awaitable);

        const std::int64_t probe = steady_us();
        if (opt.inject_delay_ms > 0) {
            timer.expires_after(std::chrono::microseconds(static_cast<std::int64_t>(opt.inject_delay_ms * 1000)));
            co_await timer.async_wait(use_awaitable);
        }
        json body = transform_fields(poses[k]);
        body["probe_us"] = probe;
        const std::uint64_t seq = ++bot.seq;
        std::string update = encode(frame(MessageKind::EntityUpdate, opt.room, bot.entity, seq, std::move(body)));
        try {
            co_await bot.ws->write(std::move(update));
        } catch (const std::exception& e) {
            ++bot.write_failures;
            bot.broken = true;
            bot.failure = e.what();
            co_return;
        }
        ++bot.sent;
        bot.log.push_back({bot.index, seq, poses[k]});

        if (Clock::now() - last_ping >= std::chrono::seconds(10)) {
            last_ping = Clock::now();
            std::string ping = encode(frame(MessageKind::Ping, opt.room));
            try {
                co_await bot.ws->write(std::move(ping));
            } catch (const std::exception& e) {
                ++bot.write_failures;
                bot.broken = true;
                bot.failure = e.what();
                co_return;
            }
        }
    }
}

asio::awaitable<void> leave(Bot& bot, std::string room) {
    std::string bye = encode(frame(MessageKind::Bye, room));
    try {
        co_await bot.ws->write(std::move(bye));
    } catch (const std::exception&) {
    }
    bot.ws->abort();
}

double fetch_tick_utilization(const Url& url, bool insecure, const std::string& room) {
    try {
        const HttpResponse res = http_get(with_http_scheme(url, "/healthz"), insecure, std::chrono::seconds(5));
        if (res.status != 200) return -1;
        const json h = json::parse(res.body);
        for (const auto& r : h.value("room_detail", json::array())) {
            if (r.value("room", std::string{}) == room) return r.value("tick_utilization", -1.0);
        }
    } catch (const std::exception& e) {
        spdlog::warn("event=healthz_unavailable error=\"{}\"", e.what());
    }
    return -1;
}

}  // namespace

ScenarioResult run_scenario_detailed(const ScenarioOptions& opt) {
    validate_profile(opt.profile);
    if (!(opt.duration_s > 0)) throw std::invalid_argument("duration must be positive");
    const Url url = parse_url(opt.url);

    ScenarioResult result;
    RunReport& report = result.report;
    report.bot_count = opt.bots;
    report.seed = opt.seed;
    report.room = opt.room;
    report.update_rate_hz = opt.profile.update_rate_hz;

    asio::io_context ioc;
    auto guard = asio::make_work_guard(ioc);
    std::vector<std::thread> threads;
    for (unsigned i = 0; i < std::max(1u, opt.threads); ++i) threads.emplace_back([&ioc] { ioc.run(); });

    RunClock clock;
    clock.set_start(Clock::now());
    std::vector<std::unique_ptr<Bot>> bots;
    std::vector<std::future<void>> readers;

    const double active_s = opt.profile.lifetime_s > 0 ? std::min(opt.duration_s, opt.profile.lifetime_s)
                                                       : opt.duration_s;
    const auto updates = static_cast<std::size_t>(std::floor(active_s * opt.profile.update_rate_hz));

    for (std::size_t i = 0; i < opt.bots && report.valid; ++i) {
        auto bot = std::make_unique<Bot>();
        bot->index = i;
        bot->ws = WsClient::create(ioc, url.tls, opt.insecure);
        std::string outcome;
        try {
            outcome = asio::co_spawn(bot->ws->executor(), join(*bot, url, opt.room), asio::use_future).get();
        } catch (const std::exception& e) {
            report.valid = false;
            report.error = "bot " + std::to_string(i) + " could not join: " + e.what();
            result.admission.push_back("ConnectionFailed");
            break;
        }
        result.admission.push_back(outcome);
        if (outcome != "Welcome") {
            bot->ws->abort();
            if (outcome == to_string(ErrorCode::RoomFull)) {
                ++report.capacity_rejected;
            } else {
                report.valid = false;
                report.error = "bot " + std::to_string(i) + " refused: " + outcome;
            }
            continue;
        }
        const auto first = planned_poses(opt.profile, opt.seed, i, 1).front();
        try {
            asio::co_spawn(bot->ws->executor(), create_avatar(*bot, opt.room, first), asio::use_future).get();
        } catch (const std::exception& e) {
            report.valid = false;
            report.error = "bot " + std::to_string(i) + " lost its connection: " + e.what();
            break;
        }
        readers.push_back(asio::co_spawn(bot->ws->executor(), read_loop(*bot, clock), asio::use_future));
        bots.push_back(std::move(bot));
    }
    report.admitted = bots.size();

    // Everyone sends on the same schedule, starting shortly after the last join.
    clock.set_start(Clock::now() + std::chrono::milliseconds(100));
    std::vector<std::future<void>> senders;
    if (report.valid) {
        for (auto& bot : bots) {
            senders.push_back(asio::co_spawn(bot->ws->executor(),
                                             send_loop(*bot, opt, clock,
                                                       planned_poses(opt.profile, opt.seed, bot->index, updates)),
                                             asio::use_future));
        }
    }
    for (auto& f : senders) {
        try {
            f.get();
        } catch (const std::exception& e) {
            report.valid = false;
            report.error = e.what();
        }
    }
    // Hold the connections open until the nominal end of the run.
    std::this_thread::sleep_until(clock.start() + std::chrono::duration_cast<Clock::duration>(
                                                     std::chrono::duration<double>(opt.duration_s)));
    report.duration_s = std::chrono::duration<double>(Clock::now() - clock.start()).count();
    std::this_thread::sleep_for(std::chrono::duration<double>(opt.drain_s));
    report.tick_utilization = fetch_tick_utilization(url, opt.insecure, opt.room);

    for (auto& bot : bots) asio::co_spawn(bot->ws->executor(), leave(*bot, opt.room), asio::use_future).get();
    for (auto& f : readers) f.get();
    guard.reset();
    ioc.stop();
    for (auto& t : threads) t.join();

    std::vector<double> latencies;
    for (auto& bot : bots) {
        report.sent += bot->sent;
        report.received += bot->received;
        report.dropped += bot->errors + bot->write_failures;
        if (bot->broken && report.valid) {
            report.valid = false;
            report.error = "bot " + std::to_string(bot->index) + " connection failed: " + bot->failure;
        }
        if (report.fanout_per_second.size() < bot->buckets.size()) report.fanout_per_second.resize(bot->buckets.size());
        for (std::size_t s = 0; s < bot->buckets.size(); ++s) report.fanout_per_second[s] += bot->buckets[s];
        for (auto& sample : bot->samples) {
            latencies.push_back(sample.rtt_proxy_ms());
            result.samples.push_back(std::move(sample));
        }
        for (auto& rec : bot->log) result.sent_log.push_back(rec);
    }
    const LatencySummary summary = summarize(std::move(latencies));
    report.latency_p50_ms = summary.p50;
    report.latency_p95_ms = summary.p95;
    report.latency_p99_ms = summary.p99;
    report.latency_max_ms = summary.max;
    report.latency_mean_ms = summary.mean;
    report.latency_samples = summary.count;
    return result;
}

RunReport run_scenario(const ScenarioOptions& options) {
    return run_scenario_detailed(options).report;
}

std::vector<RunReport> density_sweep(const ScenarioOptions& base, const std::vector<std::size_t>& counts) {
    std::vector<RunReport> out;
    const std::string world = base.room.substr(0, base.room.find('~'));
    for (std::size_t n : counts) {
        ScenarioOptions opt = base;
        opt.bots = n;
        opt.room = world + "~n" + std::to_string(n) + "-s" + std::to_string(base.seed);
        spdlog::info("event=sweep_step bots={} room={}", n, opt.room);
        out.push_back(run_scenario(opt));
    }
    return out;
}

}  // namespace openverse
