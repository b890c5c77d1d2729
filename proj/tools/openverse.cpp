// openverse: sync server and load harness front end.
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <pthread.h>
#include <sstream>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "openverse/harness/payload.hpp"
#include "openverse/harness/scenario.hpp"
#include "openverse/server/server.hpp"
#include "openverse/world/document.hpp"
#include "openverse/world/json_io.hpp"

namespace ov = openverse;

namespace {

int run_serve(ov::ServerConfig cfg) {
    if (const char* env = std::getenv("OPENVERSE_PERSIST_DIR"); env && *env) cfg.persist_dir = env;

    // Block the stop signals before any thread starts so only sigwait sees them.
    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);

    try {
        ov::Server server(cfg);
        server.start();
        int sig = 0;
        sigwait(&signals, &sig);
        spdlog::info("event=shutdown signal={}", sig);
        server.stop();
    } catch (const ov::StartupError& e) {
        spdlog::critical("event=startup_failed error=\"{}\"", e.what());
        return e.exit_code();
    }
    return 0;
}

bool write_json(const std::string& path, const ov::json& j) {
    if (path.empty() || path == "-") {
        std::cout << j.dump(2) << "\n";
        return true;
    }
    std::ofstream out(path);
    out << j.dump(2) << "\n";
    if (!out) {
        spdlog::error("cannot write {}", path);
        return false;
    }
    return true;
}

std::vector<std::size_t> parse_counts(const std::string& text) {
    std::vector<std::size_t> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        std::size_t pos = 0;
        const unsigned long v = std::stoul(item, &pos);
        if (pos != item.size() || v == 0) throw std::invalid_argument("bad bot count '" + item + "'");
        out.push_back(v);
    }
    if (out.empty()) throw std::invalid_argument("--counts is empty");
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"openverse sync server and load harness"};
    app.require_subcommand(1);

    ov::ServerConfig cfg;
    auto* serve = app.add_subcommand("serve", "Run the sync server");
    serve->add_option("--bind", cfg.bind_address, "Listen address");
    serve->add_option("--port", cfg.port, "Listen port (0 picks one)");
    serve->add_option("--cert", cfg.cert, "PEM certificate chain");
    serve->add_option("--key", cfg.key, "PEM private key");
    serve->add_option("--persist-dir", cfg.persist_dir, "Worlds, assets and room snapshots");
    serve->add_option("--tick-ms", cfg.tick_ms, "Room tick period")->capture_default_str();
    serve->add_option("--max-room-size", cfg.max_room_size, "Sessions per room")->capture_default_str();
    serve->add_option("--heartbeat-timeout-ms", cfg.heartbeat_timeout_ms, "Idle session eviction")
        ->capture_default_str();
    serve->add_option("--persist-debounce-ms", cfg.persist_debounce_ms, "Minimum gap between snapshots")
        ->capture_default_str();
    serve->add_option("--threads", cfg.threads, "Network threads (0 = hardware concurrency)");
    serve->add_flag("--dev-plaintext", cfg.dev_plaintext, "Plain HTTP/WS for localhost testing");

    auto* bench = app.add_subcommand("bench", "Load harness");
    bench->require_subcommand(1);

    ov::ScenarioOptions opt;
    std::string movement = "orbit";
    std::string out_path;
    auto add_run_options = [&](CLI::App* cmd) {
        cmd->add_option("--url", opt.url, "ws:// or wss:// sync endpoint")->required();
        cmd->add_option("--rate", opt.profile.update_rate_hz, "Updates per second per bot")->capture_default_str();
        cmd->add_option("--duration", opt.duration_s, "Seconds of sending")->capture_default_str();
        cmd->add_option("--seed", opt.seed, "RNG seed")->capture_default_str();
        cmd->add_option("--room", opt.room, "Room id")->capture_default_str();
        cmd->add_option("--movement", movement, "orbit, random_walk or idle")->capture_default_str();
        cmd->add_option("--jitter-ms", opt.profile.think_jitter_ms, "Per-send jitter bound");
        cmd->add_option("--lifetime", opt.profile.lifetime_s, "Seconds each bot sends (0 = whole run)");
        cmd->add_option("--inject-delay-ms", opt.inject_delay_ms, "Fixed delay before every send");
        cmd->add_option("--threads", opt.threads, "Harness threads")->capture_default_str();
        cmd->add_flag("--insecure", opt.insecure, "Skip certificate verification");
        cmd->add_option("--out", out_path, "Report file (default stdout)");
    };

    auto* run = bench->add_subcommand("run", "One scenario");
    add_run_options(run);
    run->add_option("--bots", opt.bots, "Bot count")->capture_default_str();

    std::string counts = "5,10,15,20,25";
    auto* sweep = bench->add_subcommand("sweep", "One scenario per bot count");
    add_run_options(sweep);
    sweep->add_option("--counts", counts, "Comma separated bot counts")->capture_default_str();

    std::string world_id = "hello-world";
    std::string http_url;
    double budget_kib = 512;
    bool payload_insecure = false;
    auto* payload = bench->add_subcommand("payload", "Initial payload of a world page");
    payload->add_option("--world", world_id, "World id")->capture_default_str();
    payload->add_option("--url", http_url, "http:// or https:// server origin")->required();
    payload->add_option("--budget-kib", budget_kib, "Fail above this size")->capture_default_str();
    payload->add_flag("--insecure", payload_insecure, "Skip certificate verification");
    payload->add_option("--out", out_path, "Report file (default stdout)");

    std::string world_file;
    std::string endpoint;
    bool dev = false;
    auto* emit = app.add_subcommand("emit", "Render a world file to its HTML document");
    emit->add_option("world", world_file, "Path to <id>.world.json")->required();
    emit->add_option("--endpoint", endpoint, "Sync endpoint URL")->required();
    emit->add_flag("--dev", dev, "Allow ws:// and http:// portals");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : ov::kExitUsage;
    }

    try {
        if (serve->parsed()) return run_serve(cfg);

        if (emit->parsed()) {
            const auto world = ov::load_world_file(world_file);
            std::cout << ov::emit_world_document(world, endpoint, {dev});
            return 0;
        }

        if (payload->parsed()) {
            const auto budget = ov::payload_budget(world_id, http_url, payload_insecure);
            if (!write_json(out_path, ov::to_json(budget))) return 1;
            const bool within = static_cast<double>(budget.total_bytes) <= budget_kib * 1024;
            std::cerr << "payload " << budget.total_bytes << " bytes, budget " << budget_kib * 1024 << " bytes: "
                      << (within && budget.complete ? "ok" : (budget.complete ? "over budget" : "incomplete"))
                      << "\n";
            return within && budget.complete ? 0 : 1;
        }

        opt.profile.movement = ov::movement_from_string(movement);
        ov::validate_profile(opt.profile);
        if (run->parsed()) {
            const auto report = ov::run_scenario(opt);
            if (!write_json(out_path, ov::to_json(report))) return 1;
            std::cerr << ov::format_table({report});
            return report.valid ? 0 : 1;
        }
        if (sweep->parsed()) {
            const auto reports = ov::density_sweep(opt, parse_counts(counts));
            ov::json all = ov::json::array();
            bool valid = true;
            for (const auto& r : reports) {
                all.push_back(ov::to_json(r));
                valid = valid && r.valid;
            }
            if (!write_json(out_path, all)) return 1;
            std::cerr << ov::format_table(reports);
            return valid ? 0 : 1;
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return ov::kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
