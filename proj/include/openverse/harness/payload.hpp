#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "openverse/world/json_io.hpp"

namespace openverse {

struct AssetBytes {
    std::string path;
    std::uint64_t bytes = 0;
    int status = 0;
};

/// Initial payload of a world page: the document plus every same-origin
/// /assets/ file it references. Third-party framework bundles loaded from
/// other origins are not counted.
struct PayloadBudget {
    std::string world_id;
    std::uint64_t document_bytes = 0;
    std::vector<AssetBytes> assets;
    std::uint64_t total_bytes = 0;
    bool complete = true;
    std::vector<std::string> missing;
};

/// Distinct "/assets/..." values of src/href attributes, in document order.
std::vector<std::string> referenced_assets(std::string_view document);

/// Fetches `<http_url>/w/<world_id>` and its assets. Throws
/// std::runtime_error when the document itself cannot be fetched.
PayloadBudget payload_budget(const std::string& world_id, const std::string& http_url, bool insecure = false);

json to_json(const PayloadBudget& budget);

}  // namespace openverse
