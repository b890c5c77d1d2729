#include "openverse/world/region.hpp"

#include <cmath>
#include <string>

#include "openverse/error.hpp"

namespace openverse {

namespace {

std::int64_t region_index(double meters, const char* axis) {
    if (!std::isfinite(meters)) {
        throw Error(ErrorCode::InvalidPosition, axis, std::string("non-finite ") + axis);
    }
    // Division by a power of two is exact, so floor() sees the true quotient.
    const double index = std::floor(meters / kRegionSide);
    if (index < -9.2e18 || index > 9.2e18) {
        throw Error(ErrorCode::InvalidPosition, axis, std::string(axis) + " out of range");
    }
    return static_cast<std::int64_t>(index);
}

}  // namespace

RegionCoord region_of(double px, double pz) {
    return RegionCoord{region_index(px, "px"), region_index(pz, "pz")};
}

}  // namespace openverse
