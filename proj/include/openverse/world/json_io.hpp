#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "openverse/error.hpp"
#include "openverse/world/world.hpp"

namespace openverse {

using json = nlohmann::json;

// Conversions between the world model and its JSON forms. Readers throw
// Error(`code`) naming the offending path; `code` lets the protocol layer
// report SyntaxError/MissingField while world files report InvalidWorld.

json to_json(const FieldMap& data);
FieldMap field_map_from_json(const json& j, const std::string& path,
                             ErrorCode code = ErrorCode::InvalidComponent);

json to_json(const Transform& t);
Transform transform_from_json(const json& j, const std::string& path,
                              ErrorCode code = ErrorCode::InvalidWorld);

json to_json(const EntityRecord& entity);
EntityRecord entity_from_json(const json& j, const std::string& path,
                              ErrorCode code = ErrorCode::InvalidWorld);

json to_json(const WorldDescription& world);
WorldDescription world_from_json(const json& j);

/// Sorted-key, whitespace-free encoding; equal entities encode to equal bytes.
std::string canonical_encoding(const EntityRecord& entity);

/// Reads `<path>`; throws Error(InvalidWorld) on syntax or schema errors.
/// Does not run validate_world.
WorldDescription load_world_file(const std::filesystem::path& path);
void save_world_file(const WorldDescription& world, const std::filesystem::path& path);

}  // namespace openverse
