#pragma once

#include <string>
#include <string_view>

#include "openverse/world/world.hpp"

namespace openverse {

/// Protocol version the emitted bootstrap speaks.
inline constexpr int kDocumentProtocolVersion = 1;

/// Renders a world as one self-contained HTML document: a single <a-scene>
/// with the static entities, portals as clickable links, and an inline
/// networking bootstrap that joins room `world.world_id` at `sync_endpoint`
/// (a ws:// or wss:// URL). Output is byte-stable for equal inputs.
///
/// Throws Error(InvalidWorld) with the first failing field path when the
/// world does not validate or the endpoint is malformed.
std::string emit_world_document(const WorldDescription& world, std::string_view sync_endpoint,
                                ValidationOptions options = {});

/// Shortest round-trip decimal form, "-0" printed as "0".
std::string format_number(double v);

/// Escapes &, <, >, " and ' for use inside attribute values and text.
std::string html_escape(std::string_view text);

}  // namespace openverse
