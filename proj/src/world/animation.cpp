#include "openverse/world/animation.hpp"

#include <cmath>

#include "openverse/error.hpp"

namespace openverse {

double animate_rotation(double from_deg, double to_deg, double duration_ms, double t_ms) {
    if (!std::isfinite(duration_ms) || duration_ms <= 0) {
        throw Error(ErrorCode::InvalidAnimation, "duration_ms", "animation duration must be > 0");
    }
    if (!std::isfinite(t_ms) || t_ms < 0) {
        throw Error(ErrorCode::InvalidAnimation, "t_ms", "animation time must be >= 0");
    }
    if (!std::isfinite(from_deg) || !std::isfinite(to_deg)) {
        throw Error(ErrorCode::InvalidAnimation, "from_deg", "animation endpoints must be finite");
    }
    const double phase = std::fmod(t_ms, duration_ms) / duration_ms;
    return from_deg + (to_deg - from_deg) * phase;
}

}  // namespace openverse
