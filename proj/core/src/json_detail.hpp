#pragma once

// JSON conversions shared by the schema, dataset and run-config readers.

#include <nlohmann/json.hpp>
#include <string>

#include "cuedesc/dataset.hpp"
#include "cuedesc/encoders.hpp"

namespace cuedesc::detail {

using Json = nlohmann::ordered_json;

[[nodiscard]] Json schema_to_json_value(const CueSchema& schema);
// path prefixes every error message, e.g. "schema.cues[1].intervals".
[[nodiscard]] CueSchema schema_from_json_value(const Json& j, const std::string& path);

[[nodiscard]] Json synthetic_to_json_value(const SyntheticConfig& config);
// Missing fields keep their defaults; unknown fields are rejected.
[[nodiscard]] SyntheticConfig synthetic_from_json_value(const Json& j, const std::string& path);

}  // namespace cuedesc::detail
