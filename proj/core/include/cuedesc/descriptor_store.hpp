#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "cuedesc/bitvec.hpp"

namespace cuedesc {

// Fixed-length descriptors packed back to back in one word array, so index
// scans walk contiguous memory.
class DescriptorStore {
 public:
  explicit DescriptorStore(std::size_t descriptor_bits);

  [[nodiscard]] std::size_t descriptor_bits() const noexcept { return bits_; }
  [[nodiscard]] std::size_t words_per_descriptor() const noexcept { return words_per_; }
  [[nodiscard]] std::size_t size() const noexcept { return count_; }
  [[nodiscard]] bool empty() const noexcept { return count_ == 0; }

  // Returns the new descriptor's id. Throws IncompatibleDescriptors.
  std::uint32_t push(const BinaryDescriptor& d);
  void reserve(std::size_t descriptors) { words_.reserve(descriptors * words_per_); }

  [[nodiscard]] const std::uint64_t* row(std::size_t id) const noexcept { return words_.data() + id * words_per_; }
  [[nodiscard]] BinaryDescriptor get(std::size_t id) const;
  [[nodiscard]] bool test(std::size_t id, std::size_t bit) const noexcept {
    return ((row(id)[bit / kWordBits] >> (bit % kWordBits)) & 1U) != 0;
  }

 private:
  std::size_t bits_;
  std::size_t words_per_;
  std::size_t count_ = 0;
  std::vector<std::uint64_t> words_;
};

}  // namespace cuedesc
