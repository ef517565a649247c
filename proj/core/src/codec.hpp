#pragma once

// JSON mapping of the domain types for the file formats. Private to the
// build tree: the server reuses it to embed documents in protocol messages.

#include <string>
#include <string_view>

#include <json.hpp>

#include "softbody/engine.hpp"

namespace softbody::codec {

using nlohmann::json;

/// Sorted keys, two-space indent, scalar arrays inline, floats as %.17g
/// with a trailing ".0" when needed. Identical input gives identical bytes.
std::string canonical(const json& value);
/// Same number rules on a single line.
std::string compact(const json& value);

/// Throws CorruptDocument when `text` is not JSON.
json parse(std::string_view text);

json to_json(const Vec3& v);
Vec3 vec3_from(const json& j);

enum class Ids { Preserve, Remap };

json to_json(const SoftBody& body);
/// Preserve: ids must already be dense/sorted. Remap: particles are
/// renumbered in listed order, springs and faces get fresh ids, the body a
/// fresh id, and missing optional fields take creation defaults.
SoftBody body_from(const json& j, Ids ids);

json to_json(const SimParams& params);
SimParams params_from(const json& j);

json to_json(const Collider& c);
Collider collider_from(const json& j);

json to_json(const ExternalInput& input);
ExternalInput input_from(const json& j);

json to_json(const SeriesFrame& frame);
SeriesFrame series_frame_from(const json& j);

/// Reads j[key] or throws SchemaMismatch naming the key.
const json& field(const json& j, const char* key);

/// Checks formatVersion and document kind; throws SchemaMismatch.
void require_document(const json& j, std::string_view kind);

}  // namespace softbody::codec
