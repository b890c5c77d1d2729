#include "openverse/harness/report.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <spdlog/fmt/fmt.h>

namespace openverse {

double percentile_nearest_rank(const std::vector<double>& sorted, double p) {
    if (sorted.empty()) return 0;
    const double n = static_cast<double>(sorted.size());
    auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * n));
    rank = std::clamp<std::size_t>(rank, 1, sorted.size());
    return sorted[rank - 1];
}

LatencySummary summarize(std::vector<double> latencies_ms) {
    LatencySummary s;
    s.count = latencies_ms.size();
    if (latencies_ms.empty()) return s;
    std::sort(latencies_ms.begin(), latencies_ms.end());
    s.p50 = percentile_nearest_rank(latencies_ms, 50);
    s.p95 = percentile_nearest_rank(latencies_ms, 95);
    s.p99 = percentile_nearest_rank(latencies_ms, 99);
    s.max = latencies_ms.back();
    s.mean = std::accumulate(latencies_ms.begin(), latencies_ms.end(), 0.0) / static_cast<double>(s.count);
    return s;
}

json to_json(const RunReport& r) {
    return {{"bot_count", r.bot_count},
            {"admitted", r.admitted},
            {"capacity_rejected", r.capacity_rejected},
            {"duration_s", r.duration_s},
            {"sent", r.sent},
            {"received", r.received},
            {"dropped", r.dropped},
            {"latency_p50_ms", r.latency_p50_ms},
            {"latency_p95_ms", r.latency_p95_ms},
            {"latency_p99_ms", r.latency_p99_ms},
            {"latency_max_ms", r.latency_max_ms},
            {"latency_mean_ms", r.latency_mean_ms},
            {"latency_samples", r.latency_samples},
            {"fanout_per_second", r.fanout_per_second},
            {"tick_utilization", r.tick_utilization},
            {"valid", r.valid},
            {"error", r.error},
            {"seed", r.seed},
            {"room", r.room},
            {"update_rate_hz", r.update_rate_hz}};
}

RunReport run_report_from_json(const json& j) {
    RunReport r;
    r.bot_count = j.at("bot_count").get<std::size_t>();
    r.admitted = j.at("admitted").get<std::size_t>();
    r.capacity_rejected = j.at("capacity_rejected").get<std::size_t>();
    r.duration_s = j.at("duration_s").get<double>();
    r.sent = j.at("sent").get<std::uint64_t>();
    r.received = j.at("received").get<std::uint64_t>();
    r.dropped = j.at("dropped").get<std::uint64_t>();
    r.latency_p50_ms = j.at("latency_p50_ms").get<double>();
    r.latency_p95_ms = j.at("latency_p95_ms").get<double>();
    r.latency_p99_ms = j.at("latency_p99_ms").get<double>();
    r.latency_max_ms = j.at("latency_max_ms").get<double>();
    r.latency_mean_ms = j.value("latency_mean_ms", 0.0);
    r.latency_samples = j.value("latency_samples", std::uint64_t{0});
    r.fanout_per_second = j.value("fanout_per_second", std::vector<std::uint64_t>{});
    r.tick_utilization = j.value("tick_utilization", -1.0);
    r.valid = j.value("valid", true);
    r.error = j.value("error", std::string{});
    r.seed = j.value("seed", std::uint64_t{0});
    r.room = j.value("room", std::string{});
    r.update_rate_hz = j.value("update_rate_hz", 0.0);
    return r;
}

std::string format_table(const std::vector<RunReport>& reports) {
    std::string out = fmt::format("{:>5} {:>8} {:>8} {:>9} {:>10} {:>8} {:>8} {:>8} {:>8} {:>6}  {}\n", "bots",
                                  "admitted", "rejected", "sent", "received", "p50_ms", "p95_ms", "p99_ms", "max_ms",
                                  "tick", "note");
    for (const auto& r : reports) {
        std::string note;
        if (!r.valid) note = "INVALID: " + r.error;
        else if (r.capacity_rejected > 0) note = fmt::format("{} refused (RoomFull)", r.capacity_rejected);
        const std::string tick = r.tick_utilization < 0 ? "n/a" : fmt::format("{:.3f}", r.tick_utilization);
        out += fmt::format("{:>5} {:>8} {:>8} {:>9} {:>10} {:>8.2f} {:>8.2f} {:>8.2f} {:>8.2f} {:>6}  {}\n",
                           r.bot_count, r.admitted, r.capacity_rejected, r.sent, r.received, r.latency_p50_ms,
                           r.latency_p95_ms, r.latency_p99_ms, r.latency_max_ms, tick, note);
    }
    return out;
}

}  // namespace openverse
