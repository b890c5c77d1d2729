#pragma once

#include <compare>
#include <cstdint>

namespace openverse {

/// Edge length of one region tile in meters.
inline constexpr double kRegionSide = 256.0;
inline constexpr double kRegionArea = kRegionSide * kRegionSide;

/// A 256 m x 256 m ground tile; `rx` is the column along x, `rz` the row
/// along z.
struct RegionCoord {
    std::int64_t rx = 0;
    std::int64_t rz = 0;

    auto operator<=>(const RegionCoord&) const = default;
};

/// floor(px / 256), floor(pz / 256). Throws Error(InvalidPosition) for
/// non-finite input or coordinates whose region index does not fit int64.
RegionCoord region_of(double px, double pz);

}  // namespace openverse
