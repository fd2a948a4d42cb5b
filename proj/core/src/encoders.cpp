#include "cuedesc/encoders.hpp"

#include <cmath>
#include <set>
#include <stdexcept>
#include <string>

namespace cuedesc {

namespace {

constexpr double kBelowOne = 0x1.fffffffffffffp-1;  // largest double < 1

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void append_continuous(BitWriter& writer, double c, std::uint32_t intervals) {
  const std::uint32_t steps = quantization_steps(c, intervals);
  for (std::uint32_t i = 0; i + 1 < intervals; ++i) writer.push_bit(i < steps);
}

}  // namespace

void ContinuousCueSpec::validate() const {
  if (intervals < 2) throw SchemaError("continuous cue needs at least 2 intervals");
  if (!std::isfinite(alpha) || alpha == 0.0) throw SchemaError("continuous cue alpha must be finite and non-zero");
  if (!std::isfinite(beta)) throw SchemaError("continuous cue beta must be finite");
}

void SelectorCueSpec::validate() const {
  if (cardinality < 2) throw SchemaError("selector cue needs cardinality >= 2");
}

CueSchema::CueSchema(std::vector<NamedCue> cues, std::uint32_t lambda, bool pad_block_to_byte)
    : cues_(std::move(cues)), lambda_(lambda), pad_(pad_block_to_byte) {
  if (cues_.empty()) throw SchemaError("schema needs at least one cue");
  std::set<std::string> names;
  for (const auto& cue : cues_) {
    if (cue.name.empty()) throw SchemaError("cue names must be non-empty");
    if (!names.insert(cue.name).second) throw SchemaError("duplicate cue name '" + cue.name + "'");
    std::visit([](const auto& spec) { spec.validate(); }, cue.spec);
    unpadded_bits_ += std::visit([](const auto& spec) { return spec.bits(); }, cue.spec);
  }
}

std::size_t CueSchema::block_bits() const noexcept {
  return pad_ ? (unpadded_bits_ + 7) / 8 * 8 : unpadded_bits_;
}

std::size_t CueSchema::selector_count() const noexcept {
  std::size_t n = 0;
  for (const auto& cue : cues_) n += std::holds_alternative<SelectorCueSpec>(cue.spec) ? 1 : 0;
  return n;
}

std::size_t CueSchema::continuous_bits() const noexcept {
  std::size_t n = 0;
  for (const auto& cue : cues_) {
    if (const auto* spec = std::get_if<ContinuousCueSpec>(&cue.spec)) n += spec->bits();
  }
  return n;
}

CueSchema CueSchema::with_lambda(std::uint32_t lambda) const {
  CueSchema copy = *this;
  copy.lambda_ = lambda;
  return copy;
}

double normalize(double c, const ContinuousCueSpec& spec) {
  if (!std::isfinite(c)) throw std::domain_error("cannot normalize a non-finite cue value");
  const double v = spec.alpha * c + spec.beta;
  if (!(v > 0.0)) return 0.0;
  return v < kBelowOne ? v : kBelowOne;
}

std::uint32_t quantization_steps(double c, std::uint32_t intervals) {
  if (intervals < 2) throw SchemaError("continuous cue needs at least 2 intervals");
  if (!(c >= 0.0 && c < 1.0)) throw std::domain_error("continuous cue must lie in [0, 1); normalize first");
  std::uint32_t steps = 0;
  while (steps + 1 < intervals && c > static_cast<double>(steps + 1) / intervals) ++steps;
  return steps;
}

BinaryDescriptor encode_continuous(double c, std::uint32_t intervals) {
  BitWriter writer(intervals - 1);
  append_continuous(writer, c, intervals);
  return std::move(writer).finish();
}

BinaryDescriptor encode_selector(std::int64_t index, std::uint32_t cardinality) {
  SelectorCueSpec{cardinality}.validate();
  if (index < 0 || index >= static_cast<std::int64_t>(cardinality)) {
    throw std::out_of_range("selector index " + std::to_string(index) + " outside [0, " +
                            std::to_string(cardinality) + ")");
  }
  BinaryDescriptor one_hot(cardinality);
  return one_hot.with_bit(static_cast<std::size_t>(index), true);
}

BinaryDescriptor encode_cues(std::span<const CueValue> values, const CueSchema& schema) {
  const auto& cues = schema.cues();
  if (values.size() != cues.size()) {
    throw SchemaError("expected " + std::to_string(cues.size()) + " cue values, got " +
                      std::to_string(values.size()));
  }
  BitWriter writer(schema.block_bits());
  for (std::size_t n = 0; n < cues.size(); ++n) {
    const auto& name = cues[n].name;
    std::visit(Overloaded{
                   [&](const ContinuousCueSpec& spec, const ContinuousValue& v) {
                     append_continuous(writer, normalize(v.value, spec), spec.intervals);
                   },
                   [&](const SelectorCueSpec& spec, const SelectorValue& v) {
                     writer.append(encode_selector(v.index, spec.cardinality));
                   },
                   [&](const auto&, const auto&) {
                     throw SchemaError("cue '" + name + "': value kind does not match its spec");
                   },
               },
               cues[n].spec, values[n]);
  }
  if (schema.pad_block_to_byte()) writer.pad_to_byte();
  return std::move(writer).finish();
}

BinaryDescriptor augment_with_block(const BinaryDescriptor& d, const BinaryDescriptor& block,
                                    std::uint32_t lambda) {
  if (lambda == 0) return d;
  BitWriter writer(d.size() + block.size() * lambda);
  writer.append(d);
  for (std::uint32_t i = 0; i < lambda; ++i) writer.append(block);
  return std::move(writer).finish();
}

BinaryDescriptor augment(const BinaryDescriptor& d, std::span<const CueValue> values, const CueSchema& schema) {
  // Validate even when lambda is zero so bad input never passes silently.
  auto block = encode_cues(values, schema);
  return augment_with_block(d, block, schema.lambda());
}

CueSchema keypoint_schema(std::uint32_t width, std::uint32_t height, std::uint32_t intervals_u,
                          std::uint32_t intervals_v, std::uint32_t lambda, bool pad_block_to_byte) {
  if (width == 0 || height == 0) throw SchemaError("image size must be positive");
  return CueSchema(
      {
          NamedCue{"u", ContinuousCueSpec{1.0 / width, 0.0, intervals_u}},
          NamedCue{"v", ContinuousCueSpec{1.0 / height, 0.0, intervals_v}},
      },
      lambda, pad_block_to_byte);
}

CoordinateLut::CoordinateLut(std::uint32_t width, std::uint32_t height, CueSchema schema)
    : width_(width),
      height_(height),
      schema_(std::move(schema)),
      block_bits_(schema_.block_bits()),
      words_per_entry_(words_for_bits(block_bits_)) {}

CoordinateLut build_coordinate_lut(std::uint32_t width, std::uint32_t height, std::uint32_t intervals_u,
                                   std::uint32_t intervals_v, bool pad_block_to_byte) {
  CoordinateLut lut(width, height, keypoint_schema(width, height, intervals_u, intervals_v, 1, pad_block_to_byte));
  lut.table_.resize(lut.size() * lut.words_per_entry_);
  for (std::uint32_t v = 0; v < height; ++v) {
    for (std::uint32_t u = 0; u < width; ++u) {
      const CueValue values[] = {ContinuousValue{static_cast<double>(u)}, ContinuousValue{static_cast<double>(v)}};
      const auto block = encode_cues(values, lut.schema_);
      const auto words = block.words();
      std::copy(words.begin(), words.end(),
                lut.table_.begin() + static_cast<std::ptrdiff_t>((std::size_t{v} * width + u) * lut.words_per_entry_));
    }
  }
  return lut;
}

std::span<const std::uint64_t> CoordinateLut::lookup_words(std::uint32_t u, std::uint32_t v) const {
  if (u >= width_ || v >= height_) {
    throw std::out_of_range("pixel (" + std::to_string(u) + ", " + std::to_string(v) + ") outside " +
                            std::to_string(width_) + "x" + std::to_string(height_) + " image");
  }
  return {table_.data() + (std::size_t{v} * width_ + u) * words_per_entry_, words_per_entry_};
}

BinaryDescriptor CoordinateLut::lookup(std::uint32_t u, std::uint32_t v) const {
  const auto words = lookup_words(u, v);
  return BinaryDescriptor(std::vector<std::uint64_t>(words.begin(), words.end()), block_bits_);
}

}  // namespace cuedesc
