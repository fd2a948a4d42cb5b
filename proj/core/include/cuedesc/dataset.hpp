#pragma once

// Datasets of images (descriptors plus per-descriptor cue values) with
// ground-truth relevance, their on-disk format, and a seeded generator of
// synthetic place-recognition sequences.
//
// On disk a dataset is a directory holding
//   manifest.json      image list in sequence order, cue columns, file paths
//   *.bdsc             "BDSC", u32 version, u32 count, u32 bits, then count
//                      descriptors in the bitvec serialization
//   *.csv (cues)       header of cue column names, one row per descriptor;
//                      continuous cues as decimals, selectors as integers
//   ground_truth.csv   "query_id,relevant_id" header, one row per pair
// All integers little-endian. See docs/formats.md for a worked example.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "cuedesc/image.hpp"

namespace cuedesc {

class DatasetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class CueKind { continuous, selector };

struct CueColumn {
  std::string name;
  CueKind kind = CueKind::continuous;
  friend bool operator==(const CueColumn&, const CueColumn&) = default;
};

struct GroundTruth {
  // query image id -> relevant image ids. Queries may be absent or map to an
  // empty set (no true match).
  std::map<std::string, std::set<std::string>> relevant;

  [[nodiscard]] const std::set<std::string>& relevant_to(const std::string& query) const;
  friend bool operator==(const GroundTruth&, const GroundTruth&) = default;
};

struct Dataset {
  std::vector<CueColumn> cue_columns;
  std::vector<ImageRecord> images;  // sequence order
  GroundTruth ground_truth;

  // Throws DatasetError: duplicate ids, unequal descriptor lengths, cue rows
  // that disagree with cue_columns, dangling ground-truth ids.
  void validate() const;
  [[nodiscard]] std::size_t descriptor_bits() const noexcept;
  [[nodiscard]] std::optional<std::size_t> column_index(const std::string& name) const;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

// Reads manifest.json (or the manifest at the given file path) and every
// file it references. All-or-nothing: throws DatasetError on the first
// problem and returns nothing partial.
[[nodiscard]] Dataset load_dataset(const std::filesystem::path& manifest_path);

// Writes the dataset under directory. Output is a pure function of the
// dataset, so equal datasets produce byte-identical files. generator_json,
// if non-empty, must be a JSON object and is stored in the manifest under
// "generator".
void save_dataset(const Dataset& dataset, const std::filesystem::path& directory,
                  const std::string& generator_json = {});

// Descriptor file codec, exposed for tools and tests.
[[nodiscard]] std::vector<std::uint8_t> encode_descriptor_file(std::span<const BinaryDescriptor> descriptors);
[[nodiscard]] std::vector<BinaryDescriptor> decode_descriptor_file(std::span<const std::uint8_t> bytes);

// 64-bit FNV-1a, used for the manifest's per-file checksums.
[[nodiscard]] std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes) noexcept;

struct SyntheticConfig {
  std::uint64_t seed = 1;
  std::uint32_t place_count = 20;
  // Revisits after the first (canonical) visit of each place.
  std::uint32_t revisits_per_place = 1;
  std::uint32_t descriptors_per_image = 500;
  std::uint32_t descriptor_bits = 256;
  double bit_flip_probability = 0.05;  // per bit, per revisit
  double keypoint_noise_sigma = 5.0;   // pixels
  std::uint32_t image_width = 1241;
  std::uint32_t image_height = 376;
  std::uint32_t label_count = 12;
  double label_flip_probability = 0.1;
  std::uint32_t distractor_image_count = 0;
  // Perceptual aliasing: consecutive groups of this many places share one
  // appearance template, each place's descriptors being the template with
  // appearance_group_noise bit flips. Keypoints and labels stay per place.
  std::uint32_t appearance_group_size = 1;
  double appearance_group_noise = 0.0;
  // Probability that a revisit feature re-observes its canonical feature;
  // otherwise it is a new random feature (descriptor, keypoint and label).
  double feature_persistence = 1.0;

  // Throws std::invalid_argument naming the offending field.
  void validate() const;
  friend bool operator==(const SyntheticConfig&, const SyntheticConfig&) = default;
};

// Compact JSON object with every field; the parser fills missing fields with
// defaults and rejects unknown ones (std::invalid_argument).
[[nodiscard]] std::string synthetic_config_to_json(const SyntheticConfig& config);
[[nodiscard]] SyntheticConfig synthetic_config_from_json(const std::string& text);

// Cue columns of generated datasets: "u", "v" (pixels) and "label".
[[nodiscard]] std::vector<CueColumn> synthetic_cue_columns();

// Sequence layout: distractors first (role reference), then visit 0 of every
// place (reference, the canonical features), then each revisit round
// (query). Every place image lists all other images of its place as
// relevant. Fully determined by config.seed.
[[nodiscard]] Dataset generate_synthetic(const SyntheticConfig& config);

}  // namespace cuedesc
