#include "openverse/error.hpp"

namespace openverse {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidPosition: return "InvalidPosition";
        case ErrorCode::InvalidComponent: return "InvalidComponent";
        case ErrorCode::InvalidAnimation: return "InvalidAnimation";
        case ErrorCode::InvalidWorld: return "InvalidWorld";
        case ErrorCode::VersionMismatch: return "VersionMismatch";
        case ErrorCode::RoomFull: return "RoomFull";
        case ErrorCode::RoomUnknown: return "RoomUnknown";
        case ErrorCode::NoSuchEntity: return "NoSuchEntity";
        case ErrorCode::Forbidden: return "Forbidden";
        case ErrorCode::SyntaxError: return "SyntaxError";
        case ErrorCode::MissingField: return "MissingField";
        case ErrorCode::UnknownKind: return "UnknownKind";
    }
    return "Unknown";
}

}  // namespace openverse
