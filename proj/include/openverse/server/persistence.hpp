#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "openverse/server/room.hpp"

namespace openverse {

/// The durable part of a room: its persistent entities, owners reset to
/// "server" since sessions do not outlive the process.
struct RoomSnapshot {
    std::string room_id;
    std::string world_id;
    std::vector<EntityRecord> entities;

    bool operator==(const RoomSnapshot&) const = default;
};

RoomSnapshot snapshot_of(const RoomState& room);

json to_json(const RoomSnapshot& snapshot);
/// Throws Error(InvalidWorld) naming the offending path.
RoomSnapshot room_snapshot_from_json(const json& j);

/// Sorted, whitespace-free form used for equality checks.
std::string canonical_encoding(const RoomSnapshot& snapshot);

std::filesystem::path snapshot_path(const std::filesystem::path& persist_dir, std::string_view room_id);

/// Writes `<persist_dir>/rooms/<room_id>.snapshot.json` via a temporary file
/// and rename. Throws std::filesystem::filesystem_error or std::runtime_error
/// on storage failure; the previous snapshot then stays intact.
void write_snapshot(const RoomSnapshot& snapshot, const std::filesystem::path& persist_dir);

/// Persists a dirty room. On success clears `dirty` and returns the stored
/// snapshot; on storage failure logs, leaves `dirty` set and returns nullopt.
std::optional<RoomSnapshot> persist_room(RoomState& room, const std::filesystem::path& persist_dir);

/// World static entities overlaid with the snapshot's entities (snapshot
/// wins on id collision). No sessions, not dirty.
RoomState load_room(std::shared_ptr<const WorldDescription> world, const std::optional<RoomSnapshot>& snapshot,
                    std::string room_id = {});

struct LoadOutcome {
    RoomState room;
    /// Set when a corrupt snapshot was moved aside.
    std::optional<std::filesystem::path> quarantined;
};

/// Reads the room's snapshot file if present. A file that fails to parse is
/// renamed to `<name>.corrupt-<n>` and the room starts from the world alone.
LoadOutcome load_room_from_disk(std::shared_ptr<const WorldDescription> world,
                                const std::filesystem::path& persist_dir, std::string room_id);

}  // namespace openverse
