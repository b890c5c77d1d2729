#include "openverse/world/world.hpp"

#include <algorithm>
#include <set>

#include "openverse/error.hpp"

namespace openverse {

namespace {

bool is_lower_alnum(char c) noexcept {
    return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9');
}

bool valid_url(std::string_view url, bool allow_http) {
    std::string_view rest;
    if (url.starts_with("https://")) {
        rest = url.substr(8);
    } else if (allow_http && url.starts_with("http://")) {
        rest = url.substr(7);
    } else {
        return false;
    }
    const auto host_end = rest.find_first_of("/?#");
    if (host_end == 0 || rest.empty()) return false;
    return std::none_of(url.begin(), url.end(), [](char c) {
        return c <= ' ' || c == '"' || c == '<' || c == '>' || c == '\\' || c == 0x7f;
    });
}

bool valid_asset_path(std::string_view path) {
    if (path.empty() || path.front() == '/') return false;
    std::size_t start = 0;
    while (start <= path.size()) {
        auto end = path.find('/', start);
        if (end == std::string_view::npos) end = path.size();
        const auto segment = path.substr(start, end - start);
        if (segment.empty() || segment == "." || segment == "..") return false;
        start = end + 1;
    }
    return std::all_of(path.begin(), path.end(), [](char c) {
        return is_lower_alnum(c) || (c >= 'A' && c <= 'Z') || c == '-' || c == '_' || c == '.' ||
               c == '/';
    });
}

void check_transform(const FieldMap& data, const std::string& path, std::vector<Violation>& out) {
    try {
        parse_transform(data, path);
    } catch (const Error& e) {
        out.push_back({e.path(), e.what()});
    }
}

}  // namespace

bool is_valid_world_id(std::string_view id) noexcept {
    return !id.empty() && id.size() <= 64 &&
           std::all_of(id.begin(), id.end(), [](char c) { return is_lower_alnum(c) || c == '-'; });
}

bool is_valid_component_name(std::string_view name) noexcept {
    if (name.empty() || name.size() > 64 || !(name.front() >= 'a' && name.front() <= 'z')) {
        return false;
    }
    return std::all_of(name.begin(), name.end(),
                       [](char c) { return is_lower_alnum(c) || c == '-' || c == '_'; });
}

std::vector<Violation> validate_world(const WorldDescription& world, ValidationOptions options) {
    std::vector<Violation> out;

    if (!is_valid_world_id(world.world_id)) {
        out.push_back({"world_id", "world_id charset: must match [a-z0-9-]{1,64}"});
    }

    std::set<std::string> asset_ids;
    for (std::size_t i = 0; i < world.assets.size(); ++i) {
        const auto& asset = world.assets[i];
        const std::string path = "assets[" + std::to_string(i) + "]";
        if (asset.asset_id.empty()) {
            out.push_back({path + ".asset_id", "asset_id must be non-empty"});
        } else if (!asset_ids.insert(asset.asset_id).second) {
            out.push_back({path + ".asset_id", "duplicate asset " + asset.asset_id});
        }
        if (!valid_asset_path(asset.path)) {
            out.push_back({path + ".path", "asset path must be relative without '.' or '..' segments"});
        }
        if (asset.media_type.empty()) {
            out.push_back({path + ".media_type", "media_type must be non-empty"});
        }
    }

    std::set<std::string> entity_ids;
    for (std::size_t i = 0; i < world.static_entities.size(); ++i) {
        const auto& entity = world.static_entities[i];
        const std::string path = "entities[" + std::to_string(i) + "]";
        if (entity.entity_id.empty()) {
            out.push_back({path + ".entity_id", "entity_id must be non-empty"});
        } else if (!entity_ids.insert(entity.entity_id).second) {
            out.push_back({path + ".entity_id", "duplicate entity " + entity.entity_id});
        }
        for (const auto& [name, component] : entity.components) {
            if (!is_valid_component_name(name)) {
                out.push_back({path + ".components." + name,
                               "component name must match [a-z][a-z0-9_-]{0,63}"});
            }
        }
        auto transform = entity.components.find(std::string(kTransform));
        if (transform == entity.components.end()) {
            out.push_back({path + ".components.transform", "entity must carry a transform"});
        } else {
            check_transform(transform->second.data, path + ".components.transform", out);
        }
        if (auto media = entity.components.find("media"); media != entity.components.end()) {
            auto src = media->second.data.find("src");
            if (src != media->second.data.end()) {
                const auto* ref = std::get_if<std::string>(&src->second);
                if (ref == nullptr) {
                    out.push_back({path + ".components.media.src", "asset reference must be a string"});
                } else if (!asset_ids.contains(*ref)) {
                    out.push_back({path + ".components.media.src", "unresolved asset " + *ref});
                }
            }
        }
    }

    std::set<std::string> portal_ids;
    for (std::size_t i = 0; i < world.portals.size(); ++i) {
        const auto& portal = world.portals[i];
        const std::string path = "portals[" + std::to_string(i) + "]";
        if (portal.portal_id.empty()) {
            out.push_back({path + ".portal_id", "portal_id must be non-empty"});
        } else if (!portal_ids.insert(portal.portal_id).second) {
            out.push_back({path + ".portal_id", "duplicate portal " + portal.portal_id});
        }
        if (!valid_url(portal.target_url, options.allow_plain_http)) {
            out.push_back({path + ".target_url",
                           options.allow_plain_http ? "target_url must be an absolute http(s) URL"
                                                    : "target_url must be an absolute https URL"});
        }
        check_transform(make_transform_component(portal.position).data, path + ".position", out);
        if (!(portal.position.sx > 0 && portal.position.sy > 0 && portal.position.sz > 0)) {
            out.push_back({path + ".position", "scale must be > 0"});
        }
    }

    check_transform(make_transform_component(world.spawn).data, "spawn", out);
    if (world.bounds_regions.empty()) {
        out.push_back({"regions", "world must span at least one region"});
    } else {
        try {
            const auto spawn_region = region_of(world.spawn.px, world.spawn.pz);
            if (std::find(world.bounds_regions.begin(), world.bounds_regions.end(), spawn_region) ==
                world.bounds_regions.end()) {
                out.push_back({"spawn", "spawn position lies outside the world regions"});
            }
        } catch (const Error& e) {
            out.push_back({"spawn." + e.path(), e.what()});
        }
    }
    return out;
}

WorldDescription hello_world_description() {
    WorldDescription world;
    world.world_id = "hello-world";
    world.title = "Hello World";
    world.spawn = Transform{0, 1.6, 0, 0, 0, 0, 1, 1, 1};
    world.assets.push_back({"texture", "hello-world/texture.jpg", "image/jpeg"});
    world.bounds_regions = {{-1, -1}, {-1, 0}, {0, -1}, {0, 0}};

    EntityRecord sphere;
    sphere.entity_id = "sphere";
    sphere.persistent = true;
    sphere.transferable = false;
    sphere.components.emplace(std::string(kTransform),
                              make_transform_component({0, 1.5, -5, 0, 0, -30, 1, 1, 1}));
    sphere.components.emplace(
        "template",
        ComponentState{"template", {{"primitive", std::string("a-sphere")}, {"radius", 1.0}}, 0});
    sphere.components.emplace("media",
                              ComponentState{"media", {{"src", std::string("texture")}}, 0});
    sphere.components.emplace("animation", ComponentState{"animation",
                                                          {{"property", std::string("rotation")},
                                                           {"to", std::string("0 360 -30")},
                                                           {"loop", true},
                                                           {"dur", 10000.0},
                                                           {"easing", std::string("linear")}},
                                                          0});
    world.static_entities.push_back(std::move(sphere));
    return world;
}

}  // namespace openverse
