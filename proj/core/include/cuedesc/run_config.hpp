#pragma once

// Configuration of a sweep run: dataset source, backends and their
// parameters, cue schema, augmentation weights, match threshold rule and
// evaluation protocol. Read from and echoed as JSON.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cuedesc/bof_index.hpp"
#include "cuedesc/bst_index.hpp"
#include "cuedesc/dataset.hpp"
#include "cuedesc/encoders.hpp"
#include "cuedesc/lsh_index.hpp"

namespace cuedesc {

// Every problem found in a config, each prefixed by its field path.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(std::vector<std::string> errors);
  [[nodiscard]] const std::vector<std::string>& errors() const noexcept { return errors_; }

 private:
  std::vector<std::string> errors_;
};

struct TauRule {
  enum class Mode { fraction, absolute };
  Mode mode = Mode::fraction;
  double value = 0.1;
  // Bits of slack per selector cue and per repetition under the fraction
  // rule; see tau_for.
  double selector_slack = 2.0;
};

enum class Protocol { batch, incremental };

struct RunConfig {
  // Exactly one source. A relative manifest path is resolved against the
  // config file's directory.
  std::optional<std::filesystem::path> dataset_manifest;
  std::optional<SyntheticConfig> synthetic;

  std::vector<std::string> backends = {"bf", "lsh", "bof", "bst"};
  LshConfig lsh;
  BofConfig bof;
  BstConfig bst;

  CueSchema schema = keypoint_schema(1241, 376, 8, 8);
  std::vector<std::uint32_t> lambdas = {0, 1, 2, 4, 8, 16, 32};
  TauRule tau;
  Protocol protocol = Protocol::batch;
  std::uint32_t stride = 10;  // incremental protocol: every stride-th image
  std::uint32_t timing_runs = 10;
  std::filesystem::path output_dir = "out";

  // Master seed. Sub-seeds (synthetic data, LSH tables, vocabulary) that
  // are not given explicitly derive from it; the echo records all of them.
  std::uint64_t seed = 1;

  // Re-derives the implicit sub-seeds after seed changes.
  void reseed(std::uint64_t master);
  // Throws ConfigError listing every violation.
  void validate() const;

  // Which sub-seeds were given explicitly (kept when reseeding).
  bool explicit_synthetic_seed = false;
  bool explicit_lsh_seed = false;
  bool explicit_vocabulary_seed = false;
};

[[nodiscard]] std::string_view to_string(Protocol protocol) noexcept;

// Parses a config document. base_dir resolves relative manifest paths.
// Unknown fields are errors. The document may also be a report.json, whose
// "config" member is used. Throws ConfigError.
[[nodiscard]] RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base_dir = {});
[[nodiscard]] RunConfig load_run_config(const std::filesystem::path& path);

// Fully resolved config as compact (indent < 0) or indented JSON.
[[nodiscard]] std::string run_config_to_json(const RunConfig& config, int indent = -1);

// Match threshold for one augmentation weight, given the raw descriptor
// length. Fraction rule without selector cues: value * (bits + lambda *
// block bits). With selector cues the selector bits are replaced by
// lambda * selector_slack per selector: value * (bits + lambda * continuous
// bits) + lambda * selector_slack * selectors. Absolute rule: value.
[[nodiscard]] double tau_for(const TauRule& rule, std::size_t descriptor_bits, const CueSchema& schema,
                             std::uint32_t lambda);

}  // namespace cuedesc
