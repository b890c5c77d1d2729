#include "openverse/server/persistence.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

#include <spdlog/spdlog.h>

namespace fs = std::filesystem;

namespace openverse {

namespace {

std::atomic<std::uint64_t> temp_counter{0};

void write_all_synced(const fs::path& path, const std::string& data) {
    const int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
    if (fd < 0) throw std::runtime_error("open " + path.string() + ": " + std::strerror(errno));
    std::size_t done = 0;
    while (done < data.size()) {
        const ssize_t n = ::write(fd, data.data() + done, data.size() - done);
        if (n < 0) {
            if (errno == EINTR) continue;
            const int err = errno;
            ::close(fd);
            throw std::runtime_error("write " + path.string() + ": " + std::strerror(err));
        }
        done += static_cast<std::size_t>(n);
    }
    if (::fsync(fd) != 0) {
        const int err = errno;
        ::close(fd);
        throw std::runtime_error("fsync " + path.string() + ": " + std::strerror(err));
    }
    if (::close(fd) != 0) throw std::runtime_error("close " + path.string() + ": " + std::strerror(errno));
}

}  // namespace

RoomSnapshot snapshot_of(const RoomState& room) {
    RoomSnapshot s;
    s.room_id = room.room_id;
    s.world_id = room.world ? room.world->world_id : world_of_room(room.room_id);
    for (const auto& [id, e] : room.entities) {
        if (!e.persistent) continue;
        EntityRecord copy = e;
        copy.owner = std::string(kServerOwner);
        s.entities.push_back(std::move(copy));
    }
    return s;
}

json to_json(const RoomSnapshot& snapshot) {
    json entities = json::array();
    for (const auto& e : snapshot.entities) entities.push_back(to_json(e));
    return {{"room_id", snapshot.room_id},
            {"world_id", snapshot.world_id},
            {"entities", std::move(entities)}};
}

RoomSnapshot room_snapshot_from_json(const json& j) {
    if (!j.is_object()) throw Error(ErrorCode::InvalidWorld, "", "snapshot must be an object");
    RoomSnapshot s;
    for (const char* key : {"room_id", "world_id"}) {
        if (!j.contains(key) || !j[key].is_string()) {
            throw Error(ErrorCode::InvalidWorld, key, std::string(key) + " must be a string");
        }
    }
    s.room_id = j["room_id"].get<std::string>();
    s.world_id = j["world_id"].get<std::string>();
    if (!j.contains("entities") || !j["entities"].is_array()) {
        throw Error(ErrorCode::InvalidWorld, "entities", "entities must be an array");
    }
    const json& entities = j["entities"];
    for (std::size_t i = 0; i < entities.size(); ++i) {
        const std::string path = "entities[" + std::to_string(i) + "]";
        EntityRecord e = entity_from_json(entities[i], path);
        if (!e.components.contains(std::string(kTransform))) {
            throw Error(ErrorCode::InvalidWorld, path + ".components.transform", "entity has no transform");
        }
        s.entities.push_back(std::move(e));
    }
    return s;
}

std::string canonical_encoding(const RoomSnapshot& snapshot) {
    return to_json(snapshot).dump();
}

fs::path snapshot_path(const fs::path& persist_dir, std::string_view room_id) {
    return persist_dir / "rooms" / (std::string(room_id) + ".snapshot.json");
}

void write_snapshot(const RoomSnapshot& snapshot, const fs::path& persist_dir) {
    const fs::path target = snapshot_path(persist_dir, snapshot.room_id);
    fs::create_directories(target.parent_path());
    fs::path temp = target;
    temp += ".tmp-" + std::to_string(::getpid()) + "-" + std::to_string(temp_counter.fetch_add(1));
    try {
        write_all_synced(temp, to_json(snapshot).dump(2) + "\n");
        fs::rename(temp, target);
    } catch (...) {
        std::error_code ignored;
        fs::remove(temp, ignored);
        throw;
    }
}

std::optional<RoomSnapshot> persist_room(RoomState& room, const fs::path& persist_dir) {
    RoomSnapshot snapshot = snapshot_of(room);
    try {
        write_snapshot(snapshot, persist_dir);
    } catch (const std::exception& e) {
        spdlog::error("event=persist_failed room={} error=\"{}\"", room.room_id, e.what());
        return std::nullopt;
    }
    room.dirty = false;
    spdlog::info("event=persisted room={} entities={}", room.room_id, snapshot.entities.size());
    return snapshot;
}

RoomState load_room(std::shared_ptr<const WorldDescription> world, const std::optional<RoomSnapshot>& snapshot,
                    std::string room_id) {
    if (room_id.empty()) room_id = snapshot ? snapshot->room_id : (world ? world->world_id : std::string{});
    RoomState room = make_room(std::move(room_id), std::move(world));
    if (snapshot) {
        for (EntityRecord e : snapshot->entities) {
            e.owner = std::string(kServerOwner);
            room.ownership[e.entity_id] = {e.entity_id, std::string(kServerOwner), e.seq};
            room.entities.insert_or_assign(e.entity_id, std::move(e));
        }
    }
    room.dirty = false;
    return room;
}

LoadOutcome load_room_from_disk(std::shared_ptr<const WorldDescription> world, const fs::path& persist_dir,
                                std::string room_id) {
    LoadOutcome out;
    const fs::path path = snapshot_path(persist_dir, room_id);
    std::error_code ec;
    if (!fs::exists(path, ec)) {
        out.room = load_room(std::move(world), std::nullopt, std::move(room_id));
        return out;
    }
    try {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw Error(ErrorCode::InvalidWorld, path.string(), "cannot read snapshot");
        std::ostringstream buffer;
        buffer << in.rdbuf();
        json j = json::parse(buffer.str(), nullptr, false);
        if (j.is_discarded()) throw Error(ErrorCode::InvalidWorld, "", "snapshot is not valid JSON");
        RoomSnapshot snapshot = room_snapshot_from_json(j);
        if (snapshot.room_id != room_id) {
            throw Error(ErrorCode::InvalidWorld, "room_id", "snapshot belongs to room " + snapshot.room_id);
        }
        out.room = load_room(std::move(world), snapshot, std::move(room_id));
    } catch (const Error& e) {
        fs::path quarantine;
        for (int n = 1;; ++n) {
            quarantine = path;
            quarantine += ".corrupt-" + std::to_string(n);
            if (!fs::exists(quarantine, ec)) break;
        }
        fs::rename(path, quarantine, ec);
        spdlog::error("event=snapshot_corrupt room={} path={} error=\"{}\" quarantined={}", room_id,
                      path.string(), e.what(), ec ? "failed" : quarantine.string());
        if (!ec) out.quarantined = quarantine;
        out.room = load_room(std::move(world), std::nullopt, std::move(room_id));
    }
    return out;
}

}  // namespace openverse
