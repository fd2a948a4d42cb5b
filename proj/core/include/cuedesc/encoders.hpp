#pragma once

// Cue encoders: turn continuous and selector cues into Hamming-compatible
// bit strings and append them to binary descriptors.
//
// A continuous cue c in [0,1) quantized into I intervals becomes I-1 bits,
// bit i set iff c > (i+1)/I (a thermometer code, so the Hamming distance of
// two codes is the number of interval steps between them). A selector cue
// i in {0..I-1} becomes an I-bit one-hot string (distance 0 or 2). The
// augmentation block of a schema is the per-cue strings concatenated in
// schema order, optionally zero-padded to a whole byte, and appended
// lambda times to the descriptor; plain Hamming distance of two augmented
// descriptors then equals L_H(d, d') + lambda * L_H(b, b').

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "cuedesc/bitvec.hpp"

namespace cuedesc {

class SchemaError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ContinuousCueSpec {
  double alpha = 1.0;  // scale of the affine normalization alpha * c + beta
  double beta = 0.0;
  std::uint32_t intervals = 2;

  // Throws SchemaError unless intervals >= 2 and alpha is finite and non-zero.
  void validate() const;
  [[nodiscard]] std::size_t bits() const noexcept { return intervals - 1; }
  friend bool operator==(const ContinuousCueSpec&, const ContinuousCueSpec&) = default;
};

struct SelectorCueSpec {
  std::uint32_t cardinality = 2;

  void validate() const;
  [[nodiscard]] std::size_t bits() const noexcept { return cardinality; }
  friend bool operator==(const SelectorCueSpec&, const SelectorCueSpec&) = default;
};

using CueSpec = std::variant<ContinuousCueSpec, SelectorCueSpec>;

struct NamedCue {
  std::string name;
  CueSpec spec;
  friend bool operator==(const NamedCue&, const NamedCue&) = default;
};

struct ContinuousValue {
  double value = 0.0;
  friend bool operator==(const ContinuousValue&, const ContinuousValue&) = default;
};

struct SelectorValue {
  std::int64_t index = 0;
  friend bool operator==(const SelectorValue&, const SelectorValue&) = default;
};

using CueValue = std::variant<ContinuousValue, SelectorValue>;

class CueSchema {
 public:
  // Throws SchemaError on an empty cue list, duplicate names or invalid specs.
  CueSchema(std::vector<NamedCue> cues, std::uint32_t lambda, bool pad_block_to_byte = true);

  [[nodiscard]] const std::vector<NamedCue>& cues() const noexcept { return cues_; }
  [[nodiscard]] std::uint32_t lambda() const noexcept { return lambda_; }
  [[nodiscard]] bool pad_block_to_byte() const noexcept { return pad_; }

  // Sum of per-cue bit lengths, before padding.
  [[nodiscard]] std::size_t unpadded_block_bits() const noexcept { return unpadded_bits_; }
  // Length of one augmentation block (padded when pad_block_to_byte is set).
  [[nodiscard]] std::size_t block_bits() const noexcept;
  // Bits appended to a descriptor of any length: lambda * block_bits().
  [[nodiscard]] std::size_t augmentation_bits() const noexcept { return lambda_ * block_bits(); }
  [[nodiscard]] std::size_t selector_count() const noexcept;
  // Unpadded bits contributed by continuous cues only.
  [[nodiscard]] std::size_t continuous_bits() const noexcept;

  [[nodiscard]] CueSchema with_lambda(std::uint32_t lambda) const;

  friend bool operator==(const CueSchema&, const CueSchema&) = default;

 private:
  std::vector<NamedCue> cues_;
  std::uint32_t lambda_ = 0;
  bool pad_ = true;
  std::size_t unpadded_bits_ = 0;
};

// Affine normalization clamped into [0, 1). Throws std::domain_error for
// non-finite input.
[[nodiscard]] double normalize(double c, const ContinuousCueSpec& spec);

// Number of thresholds (i+1)/intervals strictly exceeded by c.
[[nodiscard]] std::uint32_t quantization_steps(double c, std::uint32_t intervals);

// Thermometer code of intervals-1 bits. Throws std::domain_error unless
// 0 <= c < 1, SchemaError for intervals < 2.
[[nodiscard]] BinaryDescriptor encode_continuous(double c, std::uint32_t intervals);

// One-hot code of cardinality bits. Throws std::out_of_range for an index
// outside [0, cardinality).
[[nodiscard]] BinaryDescriptor encode_selector(std::int64_t index, std::uint32_t cardinality);

// Augmentation block for one feature. Continuous values are normalized with
// their spec first. Throws SchemaError on arity or kind mismatch.
[[nodiscard]] BinaryDescriptor encode_cues(std::span<const CueValue> values, const CueSchema& schema);

// d followed by schema.lambda() copies of encode_cues(values, schema).
[[nodiscard]] BinaryDescriptor augment(const BinaryDescriptor& d, std::span<const CueValue> values,
                                       const CueSchema& schema);
// Same, with a precomputed block.
[[nodiscard]] BinaryDescriptor augment_with_block(const BinaryDescriptor& d, const BinaryDescriptor& block,
                                                  std::uint32_t lambda);

// Two-cue keypoint-coordinate schema in (u, v) order, normalizing pixel
// coordinates by the image size.
[[nodiscard]] CueSchema keypoint_schema(std::uint32_t width, std::uint32_t height, std::uint32_t intervals_u,
                                        std::uint32_t intervals_v, std::uint32_t lambda = 1,
                                        bool pad_block_to_byte = true);

// Dense per-pixel table of keypoint-coordinate blocks, built once so a
// keypoint converts with a single lookup.
class CoordinateLut {
 public:
  [[nodiscard]] std::uint32_t width() const noexcept { return width_; }
  [[nodiscard]] std::uint32_t height() const noexcept { return height_; }
  [[nodiscard]] const CueSchema& schema() const noexcept { return schema_; }
  [[nodiscard]] std::size_t block_bits() const noexcept { return block_bits_; }
  [[nodiscard]] std::size_t size() const noexcept { return std::size_t{width_} * height_; }

  // Throws std::out_of_range outside the image.
  [[nodiscard]] BinaryDescriptor lookup(std::uint32_t u, std::uint32_t v) const;
  [[nodiscard]] std::span<const std::uint64_t> lookup_words(std::uint32_t u, std::uint32_t v) const;

 private:
  friend CoordinateLut build_coordinate_lut(std::uint32_t, std::uint32_t, std::uint32_t, std::uint32_t, bool);
  CoordinateLut(std::uint32_t width, std::uint32_t height, CueSchema schema);

  std::uint32_t width_;
  std::uint32_t height_;
  CueSchema schema_;
  std::size_t block_bits_;
  std::size_t words_per_entry_;
  std::vector<std::uint64_t> table_;
};

[[nodiscard]] CoordinateLut build_coordinate_lut(std::uint32_t width, std::uint32_t height,
                                                 std::uint32_t intervals_u, std::uint32_t intervals_v,
                                                 bool pad_block_to_byte = false);

// Human-readable JSON document for a schema; parsing is the exact inverse.
[[nodiscard]] std::string schema_to_json(const CueSchema& schema);
// Throws SchemaError with a field path on malformed input.
[[nodiscard]] CueSchema schema_from_json(std::string_view text);

}  // namespace cuedesc
