#include <limits>
#include <string>

#include "cuedesc/encoders.hpp"
#include "json_detail.hpp"

namespace cuedesc {

namespace detail {

namespace {

const Json& require(const Json& j, const char* key, const std::string& path) {
  if (!j.is_object() || !j.contains(key)) throw SchemaError(path + "." + key + ": missing");
  return j.at(key);
}

double number_field(const Json& j, const char* key, const std::string& path) {
  const auto& v = require(j, key, path);
  if (!v.is_number()) throw SchemaError(path + "." + key + ": expected a number");
  return v.get<double>();
}

std::uint32_t count_field(const Json& j, const char* key, const std::string& path) {
  const auto& v = require(j, key, path);
  if (!v.is_number_unsigned() || v.get<std::uint64_t>() > std::numeric_limits<std::uint32_t>::max()) {
    throw SchemaError(path + "." + key + ": expected a non-negative integer");
  }
  return v.get<std::uint32_t>();
}

}  // namespace

Json schema_to_json_value(const CueSchema& schema) {
  Json cues = Json::array();
  for (const auto& cue : schema.cues()) {
    Json c;
    c["name"] = cue.name;
    if (const auto* spec = std::get_if<ContinuousCueSpec>(&cue.spec)) {
      c["kind"] = "continuous";
      c["alpha"] = spec->alpha;
      c["beta"] = spec->beta;
      c["intervals"] = spec->intervals;
    } else {
      c["kind"] = "selector";
      c["cardinality"] = std::get<SelectorCueSpec>(cue.spec).cardinality;
    }
    cues.push_back(std::move(c));
  }
  Json j;
  j["cues"] = std::move(cues);
  j["lambda"] = schema.lambda();
  j["pad_block_to_byte"] = schema.pad_block_to_byte();
  return j;
}

CueSchema schema_from_json_value(const Json& j, const std::string& path) {
  if (!j.is_object()) throw SchemaError(path + ": expected an object");
  const auto& cues_json = require(j, "cues", path);
  if (!cues_json.is_array()) throw SchemaError(path + ".cues: expected an array");
  std::vector<NamedCue> cues;
  for (std::size_t i = 0; i < cues_json.size(); ++i) {
    const auto& c = cues_json[i];
    const std::string cpath = path + ".cues[" + std::to_string(i) + "]";
    const auto& name = require(c, "name", cpath);
    const auto& kind = require(c, "kind", cpath);
    if (!name.is_string()) throw SchemaError(cpath + ".name: expected a string");
    if (kind == "continuous") {
      ContinuousCueSpec spec{number_field(c, "alpha", cpath), c.contains("beta") ? number_field(c, "beta", cpath) : 0.0,
                             count_field(c, "intervals", cpath)};
      try {
        spec.validate();
      } catch (const SchemaError& e) {
        throw SchemaError(cpath + ": " + e.what());
      }
      cues.push_back({name.get<std::string>(), spec});
    } else if (kind == "selector") {
      SelectorCueSpec spec{count_field(c, "cardinality", cpath)};
      try {
        spec.validate();
      } catch (const SchemaError& e) {
        throw SchemaError(cpath + ": " + e.what());
      }
      cues.push_back({name.get<std::string>(), spec});
    } else {
      throw SchemaError(cpath + ".kind: expected \"continuous\" or \"selector\"");
    }
  }
  const std::uint32_t lambda = j.contains("lambda") ? count_field(j, "lambda", path) : 1;
  bool pad = true;
  if (j.contains("pad_block_to_byte")) {
    if (!j["pad_block_to_byte"].is_boolean()) throw SchemaError(path + ".pad_block_to_byte: expected a boolean");
    pad = j["pad_block_to_byte"].get<bool>();
  }
  try {
    return CueSchema(std::move(cues), lambda, pad);
  } catch (const SchemaError& e) {
    throw SchemaError(path + ": " + e.what());
  }
}

}  // namespace detail

std::string schema_to_json(const CueSchema& schema) { return detail::schema_to_json_value(schema).dump(2); }

CueSchema schema_from_json(std::string_view text) {
  detail::Json j;
  try {
    j = detail::Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(std::string("schema: ") + e.what());
  }
  return detail::schema_from_json_value(j, "schema");
}

}  // namespace cuedesc
