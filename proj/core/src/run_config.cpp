#include "cuedesc/run_config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "json_detail.hpp"

namespace cuedesc {

namespace {

using detail::Json;

constexpr std::uint64_t kSyntheticTag = 1;
constexpr std::uint64_t kLshTag = 2;
constexpr std::uint64_t kVocabularyTag = 3;

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag) noexcept {
  std::uint64_t x = master + tag * 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::string join_errors(const std::vector<std::string>& errors) {
  std::string out = "invalid run config:";
  for (const auto& e : errors) out += "\n  " + e;
  return out;
}

// Collects errors instead of stopping at the first one.
class Reader {
 public:
  explicit Reader(std::vector<std::string>& errors) : errors_(errors) {}

  void error(const std::string& path, const std::string& what) { errors_.push_back(path + ": " + what); }

  void only(const Json& j, const std::string& path, std::initializer_list<const char*> known) {
    if (!j.is_object()) {
      error(path, "expected an object");
      return;
    }
    for (const auto& [key, value] : j.items()) {
      bool ok = false;
      for (const char* k : known) ok = ok || key == k;
      if (!ok) error(path + "." + key, "unknown field");
    }
  }

  template <class T>
  void uint(const Json& j, const char* key, const std::string& path, T& out) {
    if (!j.is_object() || !j.contains(key)) return;
    const auto& v = j[key];
    if (!v.is_number_unsigned() || v.get<std::uint64_t>() > std::numeric_limits<T>::max()) {
      error(path.empty() ? std::string(key) : path + "." + key, "expected a non-negative integer");
      return;
    }
    out = v.get<T>();
  }

  void real(const Json& j, const char* key, const std::string& path, double& out) {
    if (!j.is_object() || !j.contains(key)) return;
    const auto& v = j[key];
    if (!v.is_number() || !std::isfinite(v.get<double>())) {
      error(path + "." + key, "expected a finite number");
      return;
    }
    out = v.get<double>();
  }

 private:
  std::vector<std::string>& errors_;
};

Json lsh_json(const LshConfig& c) {
  return {{"table_count", c.table_count}, {"key_bits", c.key_bits}, {"probe_radius", c.probe_radius},
          {"seed", c.seed}};
}

Json bof_json(const BofConfig& c) {
  return {{"branching", c.vocabulary.branching},
          {"depth", c.vocabulary.depth},
          {"seed", c.vocabulary.seed},
          {"max_iterations", c.vocabulary.max_iterations},
          {"top_n", c.top_n},
          {"retrain_every", c.retrain_every}};
}

Json bst_json(const BstConfig& c) {
  Json j;
  if (c.max_leaf_size) {
    j["max_leaf_size"] = *c.max_leaf_size;
  } else {
    j["max_leaf_size"] = nullptr;
  }
  return j;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> errors)
    : std::invalid_argument(join_errors(errors)), errors_(std::move(errors)) {}

std::string_view to_string(Protocol protocol) noexcept {
  return protocol == Protocol::batch ? "batch" : "incremental";
}

void RunConfig::reseed(std::uint64_t master) {
  seed = master;
  if (synthetic && !explicit_synthetic_seed) synthetic->seed = derive_seed(master, kSyntheticTag);
  if (!explicit_lsh_seed) lsh.seed = derive_seed(master, kLshTag);
  if (!explicit_vocabulary_seed) bof.vocabulary.seed = derive_seed(master, kVocabularyTag);
}

void RunConfig::validate() const {
  std::vector<std::string> errors;
  if (dataset_manifest.has_value() == synthetic.has_value()) {
    errors.emplace_back("dataset: give exactly one of manifest or synthetic");
  }
  if (synthetic) {
    try {
      synthetic->validate();
    } catch (const std::invalid_argument& e) {
      errors.push_back(std::string("dataset.synthetic.") + e.what());
    }
  }
  if (backends.empty()) errors.emplace_back("backends: must not be empty");
  std::set<std::string> seen;
  for (std::size_t i = 0; i < backends.size(); ++i) {
    const auto& b = backends[i];
    const auto path = "backends[" + std::to_string(i) + "]";
    if (b != "bf" && b != "lsh" && b != "bof" && b != "bst") errors.push_back(path + ": unknown backend '" + b + "'");
    if (!seen.insert(b).second) errors.push_back(path + ": duplicate backend '" + b + "'");
  }
  if (lsh.table_count < 1) errors.emplace_back("lsh.table_count: must be >= 1");
  if (lsh.key_bits < 1 || lsh.key_bits > 64) errors.emplace_back("lsh.key_bits: must be in [1, 64]");
  try {
    bof.validate();
  } catch (const std::invalid_argument& e) {
    errors.push_back(std::string("bof: ") + e.what());
  }
  if (bst.max_leaf_size && *bst.max_leaf_size < 1) errors.emplace_back("bst.max_leaf_size: must be >= 1 or null");
  if (lambdas.empty()) errors.emplace_back("lambdas: must not be empty");
  std::set<std::uint32_t> seen_lambdas;
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    if (!seen_lambdas.insert(lambdas[i]).second) {
      errors.push_back("lambdas[" + std::to_string(i) + "]: duplicate value " + std::to_string(lambdas[i]));
    }
  }
  if (tau.mode == TauRule::Mode::fraction && !(tau.value > 0.0 && tau.value <= 1.0)) {
    errors.emplace_back("tau.value: a fraction must be in (0, 1]");
  }
  if (tau.mode == TauRule::Mode::absolute && !(tau.value >= 0.0)) errors.emplace_back("tau.value: must be >= 0");
  if (!(tau.selector_slack >= 0.0)) errors.emplace_back("tau.selector_slack: must be >= 0");
  if (protocol == Protocol::incremental && stride < 1) errors.emplace_back("protocol.stride: must be >= 1");
  if (output_dir.empty()) errors.emplace_back("output_dir: must not be empty");
  if (!errors.empty()) throw ConfigError(std::move(errors));
}

RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base_dir) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError({std::string("<document>: ") + e.what()});
  }
  if (doc.is_object() && doc.contains("config") && doc.contains("reports")) doc = doc["config"];

  std::vector<std::string> errors;
  Reader r(errors);
  RunConfig c;
  r.only(doc, "<config>",
         {"dataset", "backends", "lsh", "bof", "bst", "cues", "lambda", "lambdas", "pad_block_to_byte", "tau",
          "protocol", "timing_runs", "output_dir", "seed"});
  if (!doc.is_object()) throw ConfigError(std::move(errors));

  r.uint(doc, "seed", "", c.seed);

  if (!doc.contains("dataset")) {
    r.error("dataset", "missing");
  } else {
    const auto& d = doc["dataset"];
    r.only(d, "dataset", {"manifest", "synthetic"});
    if (d.is_object() && d.contains("manifest")) {
      if (!d["manifest"].is_string()) {
        r.error("dataset.manifest", "expected a path string");
      } else {
        std::filesystem::path p = d["manifest"].get<std::string>();
        if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
        // Absolute, so the echo stays valid wherever it is re-read from.
        c.dataset_manifest = std::filesystem::absolute(p).lexically_normal();
      }
    }
    if (d.is_object() && d.contains("synthetic")) {
      try {
        c.synthetic = detail::synthetic_from_json_value(d["synthetic"], "dataset.synthetic");
        c.explicit_synthetic_seed = d["synthetic"].is_object() && d["synthetic"].contains("seed");
      } catch (const std::invalid_argument& e) {
        errors.emplace_back(e.what());
      }
    }
  }

  if (doc.contains("backends")) {
    const auto& b = doc["backends"];
    if (!b.is_array()) {
      r.error("backends", "expected an array of names");
    } else {
      c.backends.clear();
      for (std::size_t i = 0; i < b.size(); ++i) {
        if (!b[i].is_string()) {
          r.error("backends[" + std::to_string(i) + "]", "expected a string");
        } else {
          c.backends.push_back(b[i].get<std::string>());
        }
      }
    }
  }

  if (doc.contains("lsh")) {
    const auto& j = doc["lsh"];
    r.only(j, "lsh", {"table_count", "key_bits", "probe_radius", "seed"});
    r.uint(j, "table_count", "lsh", c.lsh.table_count);
    r.uint(j, "key_bits", "lsh", c.lsh.key_bits);
    r.uint(j, "probe_radius", "lsh", c.lsh.probe_radius);
    r.uint(j, "seed", "lsh", c.lsh.seed);
    c.explicit_lsh_seed = j.is_object() && j.contains("seed");
  }
  if (doc.contains("bof")) {
    const auto& j = doc["bof"];
    r.only(j, "bof", {"branching", "depth", "seed", "max_iterations", "top_n", "retrain_every"});
    r.uint(j, "branching", "bof", c.bof.vocabulary.branching);
    r.uint(j, "depth", "bof", c.bof.vocabulary.depth);
    r.uint(j, "seed", "bof", c.bof.vocabulary.seed);
    r.uint(j, "max_iterations", "bof", c.bof.vocabulary.max_iterations);
    r.uint(j, "top_n", "bof", c.bof.top_n);
    r.uint(j, "retrain_every", "bof", c.bof.retrain_every);
    c.explicit_vocabulary_seed = j.is_object() && j.contains("seed");
  }
  if (doc.contains("bst")) {
    const auto& j = doc["bst"];
    r.only(j, "bst", {"max_leaf_size"});
    if (j.is_object() && j.contains("max_leaf_size")) {
      if (j["max_leaf_size"].is_null()) {
        c.bst.max_leaf_size.reset();
      } else {
        std::size_t size = 0;
        r.uint(j, "max_leaf_size", "bst", size);
        c.bst.max_leaf_size = size;
      }
    }
  }

  if (doc.contains("cues")) {
    Json schema_doc = {{"cues", doc["cues"]}, {"lambda", 0U}};
    if (doc.contains("pad_block_to_byte")) schema_doc["pad_block_to_byte"] = doc["pad_block_to_byte"];
    try {
      c.schema = detail::schema_from_json_value(schema_doc, "<config>");
    } catch (const SchemaError& e) {
      errors.emplace_back(e.what());
    }
  } else if (doc.contains("pad_block_to_byte")) {
    r.error("pad_block_to_byte", "given without cues");
  }

  if (doc.contains("lambdas") && doc.contains("lambda")) {
    r.error("lambda", "give either lambda or lambdas, not both");
  } else if (doc.contains("lambdas")) {
    const auto& l = doc["lambdas"];
    if (!l.is_array()) {
      r.error("lambdas", "expected an array");
    } else {
      c.lambdas.clear();
      for (std::size_t i = 0; i < l.size(); ++i) {
        if (!l[i].is_number_unsigned() || l[i].get<std::uint64_t>() > 0xffffffffULL) {
          r.error("lambdas[" + std::to_string(i) + "]", "expected a non-negative integer");
        } else {
          c.lambdas.push_back(l[i].get<std::uint32_t>());
        }
      }
    }
  } else if (doc.contains("lambda")) {
    std::uint32_t lambda = 0;
    r.uint(doc, "lambda", "", lambda);
    c.lambdas = {lambda};
  }

  if (doc.contains("tau")) {
    const auto& j = doc["tau"];
    r.only(j, "tau", {"mode", "value", "selector_slack"});
    if (j.is_object() && j.contains("mode")) {
      if (j["mode"] == "fraction") {
        c.tau.mode = TauRule::Mode::fraction;
      } else if (j["mode"] == "absolute") {
        c.tau.mode = TauRule::Mode::absolute;
      } else {
        r.error("tau.mode", "expected \"fraction\" or \"absolute\"");
      }
    }
    r.real(j, "value", "tau", c.tau.value);
    r.real(j, "selector_slack", "tau", c.tau.selector_slack);
  }

  if (doc.contains("protocol")) {
    const auto& j = doc["protocol"];
    r.only(j, "protocol", {"mode", "stride"});
    if (j.is_object() && j.contains("mode")) {
      if (j["mode"] == "batch") {
        c.protocol = Protocol::batch;
      } else if (j["mode"] == "incremental") {
        c.protocol = Protocol::incremental;
      } else {
        r.error("protocol.mode", "expected \"batch\" or \"incremental\"");
      }
    }
    r.uint(j, "stride", "protocol", c.stride);
  }

  r.uint(doc, "timing_runs", "", c.timing_runs);
  if (doc.contains("output_dir")) {
    if (doc["output_dir"].is_string()) {
      c.output_dir = doc["output_dir"].get<std::string>();
    } else {
      r.error("output_dir", "expected a path string");
    }
  }

  // Fill implicit sub-seeds from the master seed, then report parse and
  // value errors together.
  c.reseed(c.seed);
  try {
    c.validate();
  } catch (const ConfigError& e) {
    errors.insert(errors.end(), e.errors().begin(), e.errors().end());
  }
  if (!errors.empty()) throw ConfigError(std::move(errors));
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({path.string() + ": cannot open"});
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str(), path.parent_path());
}

std::string run_config_to_json(const RunConfig& c, int indent) {
  Json j;
  Json dataset;
  if (c.dataset_manifest) dataset["manifest"] = c.dataset_manifest->generic_string();
  if (c.synthetic) dataset["synthetic"] = detail::synthetic_to_json_value(*c.synthetic);
  j["dataset"] = std::move(dataset);
  j["backends"] = c.backends;
  j["lsh"] = lsh_json(c.lsh);
  j["bof"] = bof_json(c.bof);
  j["bst"] = bst_json(c.bst);
  const auto schema = detail::schema_to_json_value(c.schema);
  j["cues"] = schema["cues"];
  j["pad_block_to_byte"] = schema["pad_block_to_byte"];
  j["lambdas"] = c.lambdas;
  j["tau"] = {{"mode", c.tau.mode == TauRule::Mode::fraction ? "fraction" : "absolute"},
              {"value", c.tau.value},
              {"selector_slack", c.tau.selector_slack}};
  j["protocol"] = {{"mode", std::string(to_string(c.protocol))}, {"stride", c.stride}};
  j["timing_runs"] = c.timing_runs;
  j["output_dir"] = c.output_dir.generic_string();
  j["seed"] = c.seed;
  return j.dump(indent);
}

double tau_for(const TauRule& rule, std::size_t descriptor_bits, const CueSchema& schema, std::uint32_t lambda) {
  if (rule.mode == TauRule::Mode::absolute) return rule.value;
  const auto d = static_cast<double>(descriptor_bits);
  const auto l = static_cast<double>(lambda);
  if (schema.selector_count() == 0) return rule.value * (d + l * static_cast<double>(schema.block_bits()));
  return rule.value * (d + l * static_cast<double>(schema.continuous_bits())) +
         l * rule.selector_slack * static_cast<double>(schema.selector_count());
}

}  // namespace cuedesc
