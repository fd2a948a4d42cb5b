#include "cuedesc/descriptor_store.hpp"

#include <stdexcept>
#include <string>

#include "cuedesc/image.hpp"

namespace cuedesc {

DescriptorStore::DescriptorStore(std::size_t descriptor_bits)
    : bits_(descriptor_bits), words_per_(words_for_bits(descriptor_bits)) {
  if (descriptor_bits == 0) throw std::invalid_argument("descriptor length must be > 0");
}

std::uint32_t DescriptorStore::push(const BinaryDescriptor& d) {
  if (d.size() != bits_) {
    throw IncompatibleDescriptors("store holds " + std::to_string(bits_) + "-bit descriptors, got " +
                                  std::to_string(d.size()));
  }
  const auto w = d.words();
  words_.insert(words_.end(), w.begin(), w.end());
  return static_cast<std::uint32_t>(count_++);
}

BinaryDescriptor DescriptorStore::get(std::size_t id) const {
  if (id >= count_) throw std::out_of_range("descriptor id out of range");
  return BinaryDescriptor(std::vector<std::uint64_t>(row(id), row(id) + words_per_), bits_);
}

std::string_view to_string(ImageRole role) noexcept { return role == ImageRole::query ? "query" : "reference"; }

ImageRole parse_image_role(std::string_view text) {
  if (text == "query") return ImageRole::query;
  if (text == "reference") return ImageRole::reference;
  throw std::invalid_argument("unknown image role '" + std::string(text) + "'");
}

void ImageRecord::validate(std::size_t cue_arity) const {
  if (cue_values.size() != descriptors.size()) {
    throw std::invalid_argument("image '" + image_id + "': " + std::to_string(descriptors.size()) +
                                " descriptors but " + std::to_string(cue_values.size()) + " cue rows");
  }
  for (std::size_t i = 0; i < descriptors.size(); ++i) {
    if (descriptors[i].size() != descriptors.front().size()) {
      throw IncompatibleDescriptors("image '" + image_id + "': descriptor " + std::to_string(i) +
                                    " has a different bit length");
    }
    if (cue_values[i].size() != cue_arity) {
      throw std::invalid_argument("image '" + image_id + "': cue row " + std::to_string(i) + " has " +
                                  std::to_string(cue_values[i].size()) + " values, expected " +
                                  std::to_string(cue_arity));
    }
  }
}

}  // namespace cuedesc
