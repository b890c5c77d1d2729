#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "openverse/world/json_io.hpp"

namespace openverse {

/// One observed peer update. Both readings come from the harness process's
/// monotonic clock, so their difference is a one-way latency proxy.
struct LatencySample {
    std::string entity_id;
    double send_monotonic_ms = 0;
    double recv_monotonic_ms = 0;

    double rtt_proxy_ms() const { return recv_monotonic_ms - send_monotonic_ms; }
};

struct LatencySummary {
    double p50 = 0, p95 = 0, p99 = 0, max = 0, mean = 0;
    std::size_t count = 0;
};

/// Nearest-rank percentile of an ascending range: the ceil(p/100 * n)-th
/// value. Zero for an empty range.
double percentile_nearest_rank(const std::vector<double>& sorted, double p);

LatencySummary summarize(std::vector<double> latencies_ms);

struct RunReport {
    std::size_t bot_count = 0;
    std::size_t admitted = 0;
    std::size_t capacity_rejected = 0;
    double duration_s = 0;
    /// Frames that change state: one avatar create per admitted bot plus its updates.
    std::uint64_t sent = 0;
    std::uint64_t received = 0;
    std::uint64_t dropped = 0;
    double latency_p50_ms = 0;
    double latency_p95_ms = 0;
    double latency_p99_ms = 0;
    double latency_max_ms = 0;
    double latency_mean_ms = 0;
    std::uint64_t latency_samples = 0;
    /// Peer state frames received per wall-clock second of the run.
    std::vector<std::uint64_t> fanout_per_second;
    /// Server room tick utilization (busy time / tick), -1 when unavailable.
    double tick_utilization = -1;
    bool valid = true;
    std::string error;
    std::uint64_t seed = 0;
    std::string room;
    double update_rate_hz = 0;
};

json to_json(const RunReport& report);
RunReport run_report_from_json(const json& j);

/// Fixed-width table, one row per report, capacity rejections marked.
std::string format_table(const std::vector<RunReport>& reports);

}  // namespace openverse
