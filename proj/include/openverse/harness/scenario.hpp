#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "openverse/harness/report.hpp"
#include "openverse/world/entity.hpp"

namespace openverse {

enum class Movement { orbit, random_walk, idle };

struct BotProfile {
    double update_rate_hz = 10;
    Movement movement = Movement::orbit;
    /// Seconds a bot keeps sending; 0 means the whole run.
    double lifetime_s = 0;
    /// Uniform jitter in [0, think_jitter_ms] added to each send time.
    double think_jitter_ms = 0;
};

/// Throws std::invalid_argument unless update_rate_hz is in (0, 60] and the
/// other fields are non-negative.
void validate_profile(const BotProfile& profile);

Movement movement_from_string(std::string_view name);

struct ScenarioOptions {
    /// ws:// or wss:// sync endpoint.
    std::string url;
    std::string room = "hello-world";
    std::size_t bots = 2;
    BotProfile profile;
    double duration_s = 10;
    std::uint64_t seed = 1;
    /// Fixed delay applied before every outbound frame.
    double inject_delay_ms = 0;
    bool insecure = false;
    /// Wait after the last send for in-flight frames.
    double drain_s = 0.5;
    unsigned threads = 2;
};

/// One transform the bot decided to send. The sequence of these is a pure
/// function of (seed, bot index, profile, duration).
struct SentRecord {
    std::size_t bot = 0;
    std::uint64_t seq = 0;
    Transform pose;

    bool operator==(const SentRecord&) const = default;
};

struct ScenarioResult {
    RunReport report;
    std::vector<SentRecord> sent_log;
    /// Per bot in join order: "Welcome" or the admission error code.
    std::vector<std::string> admission;
    std::vector<LatencySample> samples;
};

/// The pose bot `bot` sends as its `k`-th update. Deterministic.
std::vector<Transform> planned_poses(const BotProfile& profile, std::uint64_t seed, std::size_t bot,
                                     std::size_t count);

/// Joins `bots` bots to one room one at a time, streams transform updates
/// per profile and collects latency samples from every peer update seen.
/// RoomFull refusals are counted as capacity results; a connection failure
/// aborts the run and returns a partial report with valid = false.
ScenarioResult run_scenario_detailed(const ScenarioOptions& options);

RunReport run_scenario(const ScenarioOptions& options);

/// One run per count, each in a fresh room instance "<room>~n<count>-s<seed>".
std::vector<RunReport> density_sweep(const ScenarioOptions& base, const std::vector<std::size_t>& counts);

}  // namespace openverse
