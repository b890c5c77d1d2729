#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace openverse {

enum class ErrorCode {
    // world model
    InvalidPosition,
    InvalidComponent,
    InvalidAnimation,
    InvalidWorld,
    // protocol (names are part of the wire format)
    VersionMismatch,
    RoomFull,
    RoomUnknown,
    NoSuchEntity,
    Forbidden,
    SyntaxError,
    MissingField,
    UnknownKind,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Error raised by the world model and the protocol layer. `path` names the
/// offending field (e.g. "body.px", "entities[2].components.media.src") when
/// one is known.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, std::string path, const std::string& detail)
        : std::runtime_error(detail), code_(code), path_(std::move(path)) {}

    ErrorCode code() const noexcept { return code_; }
    const std::string& path() const noexcept { return path_; }

private:
    ErrorCode code_;
    std::string path_;
};

}  // namespace openverse
