#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "cuedesc/bitvec.hpp"
#include "cuedesc/encoders.hpp"

namespace cuedesc {

enum class ImageRole { query, reference };

[[nodiscard]] std::string_view to_string(ImageRole role) noexcept;
// Throws std::invalid_argument for anything but "query" / "reference".
[[nodiscard]] ImageRole parse_image_role(std::string_view text);

// One image: its descriptors and, per descriptor, the raw cue values.
struct ImageRecord {
  std::string image_id;
  std::vector<BinaryDescriptor> descriptors;
  std::vector<std::vector<CueValue>> cue_values;
  ImageRole role = ImageRole::reference;

  // 0 for an image without descriptors.
  [[nodiscard]] std::size_t descriptor_bits() const noexcept {
    return descriptors.empty() ? 0 : descriptors.front().size();
  }
  // Throws std::invalid_argument when the parallel lists disagree in length,
  // descriptor lengths differ, or a cue row has the wrong arity.
  void validate(std::size_t cue_arity) const;

  friend bool operator==(const ImageRecord&, const ImageRecord&) = default;
};

}  // namespace cuedesc
