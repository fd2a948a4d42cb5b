#pragma once

// Packed binary descriptors and Hamming-space primitives.
//
// Bit i of a descriptor lives in word i / 64 at in-word position i % 64,
// least-significant first. Storage bits at positions >= size() are always
// zero, so word-level popcount never sees padding.

#include <bit>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cuedesc {

inline constexpr std::size_t kWordBits = 64;

[[nodiscard]] constexpr std::size_t words_for_bits(std::size_t bits) noexcept {
  return (bits + kWordBits - 1) / kWordBits;
}

// Thrown when two descriptors of different length are compared or combined.
class IncompatibleDescriptors : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Thrown on malformed serialized input.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class BinaryDescriptor {
 public:
  using Word = std::uint64_t;

  // Zero descriptor of the given length. length_bits must be > 0.
  explicit BinaryDescriptor(std::size_t length_bits);

  // Takes ownership of packed words. Throws if the word count does not match
  // length_bits or if any padding bit is set.
  BinaryDescriptor(std::vector<Word> words, std::size_t length_bits);

  static BinaryDescriptor from_bits(std::initializer_list<int> bits);
  static BinaryDescriptor from_bits(std::span<const std::uint8_t> bits);
  // Parses a string of '0'/'1' characters, bit 0 first.
  static BinaryDescriptor from_string(std::string_view bits);

  [[nodiscard]] std::size_t size() const noexcept { return length_bits_; }
  [[nodiscard]] std::size_t word_count() const noexcept { return words_.size(); }
  [[nodiscard]] std::span<const Word> words() const noexcept { return words_; }
  [[nodiscard]] bool test(std::size_t bit) const;
  [[nodiscard]] std::size_t popcount() const noexcept;

  // Bitwise complement of the valid bits; padding stays zero.
  [[nodiscard]] BinaryDescriptor complement() const;
  // Copy with one bit set to the given value.
  [[nodiscard]] BinaryDescriptor with_bit(std::size_t bit, bool value) const;

  // '0'/'1' characters, bit 0 first.
  [[nodiscard]] std::string to_string() const;

  friend bool operator==(const BinaryDescriptor&, const BinaryDescriptor&) = default;

 private:
  std::vector<Word> words_;
  std::size_t length_bits_ = 0;
};

// Raw kernels over packed words, used by the index inner loops.
[[nodiscard]] inline std::uint32_t hamming_words(const std::uint64_t* a, const std::uint64_t* b,
                                                 std::size_t word_count) noexcept {
  std::uint32_t distance = 0;
  for (std::size_t w = 0; w < word_count; ++w) {
    distance += static_cast<std::uint32_t>(std::popcount(a[w] ^ b[w]));
  }
  return distance;
}

// Returns the exact distance if it is <= bound, otherwise any value > bound.
[[nodiscard]] inline std::uint32_t hamming_words_bounded(const std::uint64_t* a, const std::uint64_t* b,
                                                         std::size_t word_count,
                                                         std::uint32_t bound) noexcept {
  std::uint32_t distance = 0;
  for (std::size_t w = 0; w < word_count; ++w) {
    distance += static_cast<std::uint32_t>(std::popcount(a[w] ^ b[w]));
    if (distance > bound) return distance;
  }
  return distance;
}

// Number of differing bits. Throws IncompatibleDescriptors on length mismatch.
[[nodiscard]] std::uint32_t hamming(const BinaryDescriptor& a, const BinaryDescriptor& b);

// Concatenation in list order. Throws std::invalid_argument on an empty list.
[[nodiscard]] BinaryDescriptor concat(std::span<const BinaryDescriptor> parts);
[[nodiscard]] BinaryDescriptor concat(std::initializer_list<BinaryDescriptor> parts);

// times copies of b back to back; times == 0 yields no block at all.
[[nodiscard]] std::optional<BinaryDescriptor> repeat(const BinaryDescriptor& b, std::size_t times);

// Append-only builder for descriptors assembled from several blocks.
class BitWriter {
 public:
  BitWriter() = default;
  explicit BitWriter(std::size_t reserve_bits) { words_.reserve(words_for_bits(reserve_bits)); }

  void push_bit(bool value);
  void append(const BinaryDescriptor& block);
  // Appends zero bits until size() is a multiple of 8.
  void pad_to_byte();

  [[nodiscard]] std::size_t size() const noexcept { return length_bits_; }
  // Throws std::invalid_argument if nothing has been written.
  [[nodiscard]] BinaryDescriptor finish() &&;

 private:
  std::vector<std::uint64_t> words_;
  std::size_t length_bits_ = 0;
};

// Little-endian: u32 length_bits, then ceil(length_bits / 8) bytes with bit i
// at byte i / 8, position i % 8.
void serialize(const BinaryDescriptor& d, std::vector<std::uint8_t>& out);
[[nodiscard]] std::vector<std::uint8_t> serialize(const BinaryDescriptor& d);
// Reads one descriptor starting at offset and advances it. Throws FormatError.
[[nodiscard]] BinaryDescriptor deserialize(std::span<const std::uint8_t> bytes, std::size_t& offset);
[[nodiscard]] std::size_t serialized_size(std::size_t length_bits) noexcept;

}  // namespace cuedesc
