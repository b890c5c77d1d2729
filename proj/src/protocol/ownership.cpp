#include "openverse/protocol/ownership.hpp"

namespace openverse {

std::optional<OwnershipOutcome> resolve_ownership(const EntityRecord* entity, const WireMessage& request) {
    if (entity == nullptr) {
        throw Error(ErrorCode::NoSuchEntity, "entity", "no entity " + request.entity);
    }
    if (!entity->transferable) {
        throw Error(ErrorCode::Forbidden, "entity", "entity " + entity->entity_id + " is not transferable");
    }
    if (entity->owner == request.sender) return std::nullopt;
    OwnershipOutcome out;
    out.record = {entity->entity_id, request.sender, entity->seq};
    out.entity = *entity;
    out.entity.owner = request.sender;
    out.entity.seq = entity->seq + 1;

    out.grant.kind = MessageKind::OwnershipGrant;
    out.grant.room = request.room;
    out.grant.sender = std::string(kServerOwner);
    out.grant.entity = entity->entity_id;
    out.grant.seq = out.entity.seq;
    out.grant.body = {{"owner", request.sender},
                      {"previous", entity->owner},
                      {"entity", to_json(out.entity)}};
    return out;
}

}  // namespace openverse
