#pragma once

namespace openverse {

/// Looping linear tween: from + (to - from) * ((t mod duration) / duration).
/// Models the scene framework's `loop: true; easing: linear` animation.
/// Throws Error(InvalidAnimation) when duration_ms <= 0, t_ms < 0 or any
/// argument is non-finite.
double animate_rotation(double from_deg, double to_deg, double duration_ms, double t_ms);

}  // namespace openverse
