#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <variant>

namespace openverse {

/// A component field value. Numbers are IEEE-754 doubles, matching the wire
/// and file formats.
using Scalar = std::variant<double, std::string, bool>;
using FieldMap = std::map<std::string, Scalar>;

inline constexpr std::string_view kServerOwner = "server";
inline constexpr std::string_view kTransform = "transform";

struct ComponentState {
    std::string name;
    FieldMap data;
    /// Entity seq at which this component was last written.
    std::uint64_t version = 0;

    bool operator==(const ComponentState&) const = default;
};

/// One replicated scene object. Invariant: `components` holds "transform".
struct EntityRecord {
    std::string entity_id;
    std::string owner{kServerOwner};
    std::string creator{kServerOwner};
    std::uint64_t seq = 0;
    std::map<std::string, ComponentState> components;
    /// Survives owner disconnect and is written to room snapshots.
    bool persistent = false;
    /// When false, ownership requests are refused (world furniture).
    bool transferable = true;

    bool operator==(const EntityRecord&) const = default;
};

/// Position in meters, Euler XYZ rotation in degrees, unitless scale.
struct Transform {
    double px = 0, py = 0, pz = 0;
    double rx = 0, ry = 0, rz = 0;
    double sx = 1, sy = 1, sz = 1;

    bool operator==(const Transform&) const = default;
};

/// Maps any finite angle into [0, 360).
double normalize_degrees(double deg) noexcept;

/// Parses and validates the nine transform fields. Throws
/// Error(InvalidComponent) naming `path.<field>` on a missing, non-numeric,
/// non-finite field or a non-positive scale. Extra fields are ignored.
Transform parse_transform(const FieldMap& data, std::string_view path = "transform");

/// Builds the canonical "transform" component (rotation normalized).
ComponentState make_transform_component(const Transform& t, std::uint64_t version = 0);

/// Reads the transform of an entity; throws InvalidComponent if absent.
Transform transform_of(const EntityRecord& entity);

/// Last-writer-wins apply: the update lands only when `update_seq` is
/// strictly greater than `entity.seq`. Transform updates are validated even
/// when stale and stored with exactly the nine fields, rotation normalized.
/// Unknown component names are stored verbatim.
EntityRecord apply_component_update(EntityRecord entity, const ComponentState& update,
                                    std::uint64_t update_seq);

}  // namespace openverse
