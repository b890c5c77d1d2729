#include "openverse/protocol/replica.hpp"

namespace openverse {

void Replica::replace_all(const json& entities) {
    entities_.clear();
    for (std::size_t i = 0; i < entities.size(); ++i) {
        auto e = entity_from_json(entities[i], "entities[" + std::to_string(i) + "]",
                                  ErrorCode::SyntaxError);
        entities_.insert_or_assign(e.entity_id, std::move(e));
    }
}

void Replica::apply(const WireMessage& msg) {
    switch (msg.kind) {
        case MessageKind::Welcome:
            session_ = msg.body.at("session").get<std::string>();
            pending_.clear();
            replace_all(msg.body.at("snapshot").at("entities"));
            break;
        case MessageKind::Snapshot:
            replace_all(msg.body.value("entities", json::array()));
            break;
        case MessageKind::EntityCreate: {
            auto it = entities_.find(msg.entity);
            if (it == entities_.end() || msg.seq > it->second.seq) {
                entities_.insert_or_assign(msg.entity, created_entity(msg));
            }
            break;
        }
        case MessageKind::EntityUpdate: {
            auto it = entities_.find(msg.entity);
            if (it != entities_.end()) {
                it->second = apply_component_update(std::move(it->second), update_component(msg), msg.seq);
            }
            break;
        }
        case MessageKind::EntityDelete:
            entities_.erase(msg.entity);
            pending_.erase(msg.entity);
            break;
        case MessageKind::OwnershipGrant:
            if (msg.body.contains("entity")) {
                auto e = entity_from_json(msg.body["entity"], "body.entity", ErrorCode::SyntaxError);
                if (e.owner == session_) pending_.erase(e.entity_id);
                entities_.insert_or_assign(e.entity_id, std::move(e));
            }
            break;
        case MessageKind::Error:
            if (msg.body.value("code", std::string()) == to_string(ErrorCode::NoSuchEntity)) {
                pending_.erase(msg.entity);
            }
            break;
        default:
            break;
    }
}

void Replica::apply_local(const WireMessage& msg) {
    if (msg.kind == MessageKind::OwnershipRequest) {
        pending_.insert(msg.entity);
        return;
    }
    apply(msg);
}

std::string Replica::canonical() const {
    std::string out;
    for (const auto& [id, e] : entities_) {
        out += canonical_encoding(e);
        out += '\n';
    }
    return out;
}

}  // namespace openverse
