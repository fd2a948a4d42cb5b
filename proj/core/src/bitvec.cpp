#include "cuedesc/bitvec.hpp"

#include <algorithm>
#include <string>

namespace cuedesc {

namespace {

std::uint64_t tail_mask(std::size_t length_bits) noexcept {
  const std::size_t used = length_bits % kWordBits;
  return used == 0 ? ~std::uint64_t{0} : (std::uint64_t{1} << used) - 1;
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

}  // namespace

BinaryDescriptor::BinaryDescriptor(std::size_t length_bits)
    : words_(words_for_bits(length_bits), 0), length_bits_(length_bits) {
  if (length_bits == 0) throw std::invalid_argument("descriptor length must be > 0");
}

BinaryDescriptor::BinaryDescriptor(std::vector<Word> words, std::size_t length_bits)
    : words_(std::move(words)), length_bits_(length_bits) {
  if (length_bits == 0) throw std::invalid_argument("descriptor length must be > 0");
  if (words_.size() != words_for_bits(length_bits)) {
    throw std::invalid_argument("word count " + std::to_string(words_.size()) +
                                " does not match length " + std::to_string(length_bits));
  }
  if ((words_.back() & ~tail_mask(length_bits)) != 0) {
    throw std::invalid_argument("padding bits beyond descriptor length must be zero");
  }
}

BinaryDescriptor BinaryDescriptor::from_bits(std::initializer_list<int> bits) {
  BitWriter writer(bits.size());
  for (int b : bits) writer.push_bit(b != 0);
  return std::move(writer).finish();
}

BinaryDescriptor BinaryDescriptor::from_bits(std::span<const std::uint8_t> bits) {
  BitWriter writer(bits.size());
  for (auto b : bits) writer.push_bit(b != 0);
  return std::move(writer).finish();
}

BinaryDescriptor BinaryDescriptor::from_string(std::string_view bits) {
  BitWriter writer(bits.size());
  for (char c : bits) {
    if (c != '0' && c != '1') throw std::invalid_argument("bit string may only contain '0' and '1'");
    writer.push_bit(c == '1');
  }
  return std::move(writer).finish();
}

bool BinaryDescriptor::test(std::size_t bit) const {
  if (bit >= length_bits_) throw std::out_of_range("bit index out of range");
  return ((words_[bit / kWordBits] >> (bit % kWordBits)) & 1U) != 0;
}

std::size_t BinaryDescriptor::popcount() const noexcept {
  std::size_t count = 0;
  for (auto w : words_) count += static_cast<std::size_t>(std::popcount(w));
  return count;
}

BinaryDescriptor BinaryDescriptor::complement() const {
  std::vector<Word> out(words_.size());
  std::transform(words_.begin(), words_.end(), out.begin(), [](Word w) { return ~w; });
  out.back() &= tail_mask(length_bits_);
  return BinaryDescriptor(std::move(out), length_bits_);
}

BinaryDescriptor BinaryDescriptor::with_bit(std::size_t bit, bool value) const {
  if (bit >= length_bits_) throw std::out_of_range("bit index out of range");
  auto out = words_;
  const Word mask = Word{1} << (bit % kWordBits);
  if (value) {
    out[bit / kWordBits] |= mask;
  } else {
    out[bit / kWordBits] &= ~mask;
  }
  return BinaryDescriptor(std::move(out), length_bits_);
}

std::string BinaryDescriptor::to_string() const {
  std::string s(length_bits_, '0');
  for (std::size_t i = 0; i < length_bits_; ++i) {
    if ((words_[i / kWordBits] >> (i % kWordBits)) & 1U) s[i] = '1';
  }
  return s;
}

std::uint32_t hamming(const BinaryDescriptor& a, const BinaryDescriptor& b) {
  if (a.size() != b.size()) {
    throw IncompatibleDescriptors("cannot compare descriptors of " + std::to_string(a.size()) +
                                  " and " + std::to_string(b.size()) + " bits");
  }
  return hamming_words(a.words().data(), b.words().data(), a.word_count());
}

void BitWriter::push_bit(bool value) {
  const std::size_t offset = length_bits_ % kWordBits;
  if (offset == 0) words_.push_back(0);
  if (value) words_.back() |= std::uint64_t{1} << offset;
  ++length_bits_;
}

void BitWriter::append(const BinaryDescriptor& block) {
  const std::size_t shift = length_bits_ % kWordBits;
  const auto src = block.words();
  if (shift == 0) {
    words_.insert(words_.end(), src.begin(), src.end());
  } else {
    // Spill each source word across the current tail word and a new one.
    for (auto w : src) {
      words_.back() |= w << shift;
      words_.push_back(w >> (kWordBits - shift));
    }
  }
  length_bits_ += block.size();
  words_.resize(words_for_bits(length_bits_));
}

void BitWriter::pad_to_byte() {
  while (length_bits_ % 8 != 0) push_bit(false);
}

BinaryDescriptor BitWriter::finish() && {
  if (length_bits_ == 0) throw std::invalid_argument("cannot build an empty descriptor");
  return BinaryDescriptor(std::move(words_), length_bits_);
}

BinaryDescriptor concat(std::span<const BinaryDescriptor> parts) {
  if (parts.empty()) throw std::invalid_argument("concat requires at least one part");
  std::size_t total = 0;
  for (const auto& p : parts) total += p.size();
  BitWriter writer(total);
  for (const auto& p : parts) writer.append(p);
  return std::move(writer).finish();
}

BinaryDescriptor concat(std::initializer_list<BinaryDescriptor> parts) {
  return concat(std::span<const BinaryDescriptor>(parts.begin(), parts.size()));
}

std::optional<BinaryDescriptor> repeat(const BinaryDescriptor& b, std::size_t times) {
  if (times == 0) return std::nullopt;
  BitWriter writer(b.size() * times);
  for (std::size_t i = 0; i < times; ++i) writer.append(b);
  return std::move(writer).finish();
}

std::size_t serialized_size(std::size_t length_bits) noexcept { return 4 + (length_bits + 7) / 8; }

void serialize(const BinaryDescriptor& d, std::vector<std::uint8_t>& out) {
  put_u32(out, static_cast<std::uint32_t>(d.size()));
  const std::size_t bytes = (d.size() + 7) / 8;
  const auto words = d.words();
  for (std::size_t i = 0; i < bytes; ++i) {
    out.push_back(static_cast<std::uint8_t>(words[i / 8] >> (8 * (i % 8))));
  }
}

std::vector<std::uint8_t> serialize(const BinaryDescriptor& d) {
  std::vector<std::uint8_t> out;
  out.reserve(serialized_size(d.size()));
  serialize(d, out);
  return out;
}

BinaryDescriptor deserialize(std::span<const std::uint8_t> bytes, std::size_t& offset) {
  if (bytes.size() < offset + 4) throw FormatError("truncated descriptor header");
  std::uint32_t length_bits = 0;
  for (int i = 0; i < 4; ++i) length_bits |= std::uint32_t{bytes[offset + i]} << (8 * i);
  if (length_bits == 0) throw FormatError("descriptor length must be > 0");
  const std::size_t nbytes = (std::size_t{length_bits} + 7) / 8;
  if (bytes.size() - offset - 4 < nbytes) throw FormatError("truncated descriptor payload");
  std::vector<std::uint64_t> words(words_for_bits(length_bits), 0);
  for (std::size_t i = 0; i < nbytes; ++i) {
    words[i / 8] |= std::uint64_t{bytes[offset + 4 + i]} << (8 * (i % 8));
  }
  if ((words.back() & ~tail_mask(length_bits)) != 0) {
    throw FormatError("non-zero padding bits in serialized descriptor");
  }
  offset += 4 + nbytes;
  return BinaryDescriptor(std::move(words), length_bits);
}

}  // namespace cuedesc
