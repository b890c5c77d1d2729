#include "openverse/harness/payload.hpp"

#include <algorithm>
#include <regex>
#include <stdexcept>

#include "openverse/harness/net_client.hpp"

namespace openverse {

std::vector<std::string> referenced_assets(std::string_view document) {
    static const std::regex attr(R"re((?:^|\s)(?:src|href)="(/assets/[^"]+)")re");
    std::vector<std::string> out;
    const std::string text(document);
    for (auto it = std::sregex_iterator(text.begin(), text.end(), attr); it != std::sregex_iterator(); ++it) {
        std::string path = (*it)[1].str();
        if (std::find(out.begin(), out.end(), path) == out.end()) out.push_back(std::move(path));
    }
    return out;
}

PayloadBudget payload_budget(const std::string& world_id, const std::string& http_url, bool insecure) {
    const Url base = parse_url(http_url);
    PayloadBudget budget;
    budget.world_id = world_id;

    const HttpResponse doc = http_get(with_http_scheme(base, "/w/" + world_id), insecure);
    if (doc.status != 200) {
        throw std::runtime_error("GET /w/" + world_id + " returned " + std::to_string(doc.status));
    }
    budget.document_bytes = doc.body.size();
    budget.total_bytes = budget.document_bytes;

    for (const auto& path : referenced_assets(doc.body)) {
        AssetBytes asset{path, 0, 0};
        try {
            const HttpResponse res = http_get(with_http_scheme(base, path), insecure);
            asset.status = res.status;
            if (res.status == 200) asset.bytes = res.body.size();
        } catch (const std::exception&) {
            asset.status = 0;
        }
        if (asset.status != 200) {
            budget.complete = false;
            budget.missing.push_back(path);
        }
        budget.total_bytes += asset.bytes;
        budget.assets.push_back(std::move(asset));
    }
    return budget;
}

json to_json(const PayloadBudget& b) {
    json assets = json::array();
    for (const auto& a : b.assets) assets.push_back({{"path", a.path}, {"bytes", a.bytes}, {"status", a.status}});
    return {{"world_id", b.world_id}, {"document_bytes", b.document_bytes}, {"assets", std::move(assets)},
            {"total_bytes", b.total_bytes}, {"complete", b.complete}, {"missing", b.missing}};
}

}  // namespace openverse
