#pragma once

#include <string>
#include <string_view>

#include "openverse/protocol/message.hpp"

namespace openverse {

/// One JSON text frame: {"kind","room","sender","entity","seq","body","ts"}
/// in that order; body keys sorted.
std::string encode(const WireMessage& msg);

/// Parses and checks one frame. Throws Error with code SyntaxError (bad JSON
/// or wrong field type), MissingField (path of the first absent required
/// field) or UnknownKind. Unknown body fields are kept.
WireMessage decode(std::string_view frame);

}  // namespace openverse
