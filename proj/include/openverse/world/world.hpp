#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "openverse/world/entity.hpp"
#include "openverse/world/region.hpp"

namespace openverse {

enum class OpenMode { replace, new_window };

/// A hyperlink placed in the scene; activating it navigates to another world.
struct Portal {
    std::string portal_id;
    Transform position;
    std::string target_url;
    OpenMode open_mode = OpenMode::replace;

    bool operator==(const Portal&) const = default;
};

struct AssetRef {
    std::string asset_id;
    /// Relative to the server's asset root; served under /assets/<path>.
    std::string path;
    std::string media_type;

    bool operator==(const AssetRef&) const = default;
};

/// Declarative definition of one world. Static entities reference assets
/// through the `src` field of their "media" component.
struct WorldDescription {
    std::string world_id;
    std::string title;
    Transform spawn;
    std::vector<EntityRecord> static_entities;
    std::vector<Portal> portals;
    std::vector<AssetRef> assets;
    std::vector<RegionCoord> bounds_regions;

    bool operator==(const WorldDescription&) const = default;
};

struct Violation {
    std::string path;
    std::string rule;

    bool operator==(const Violation&) const = default;
};

struct ValidationOptions {
    /// Accept http:// portal targets (dev mode only).
    bool allow_plain_http = false;
};

bool is_valid_world_id(std::string_view id) noexcept;

/// Component and attribute names usable as scene markup attributes.
bool is_valid_component_name(std::string_view name) noexcept;

/// Empty iff every WorldDescription invariant holds. Pure.
std::vector<Violation> validate_world(const WorldDescription& world,
                                      ValidationOptions options = {});

/// The canonical demo: one textured sphere at (0, 1.5, -5), radius 1,
/// tilted -30 degrees about z, spinning once every 10 s.
WorldDescription hello_world_description();

}  // namespace openverse
