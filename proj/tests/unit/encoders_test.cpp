#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "cuedesc/encoders.hpp"
#include "oracles.hpp"

using namespace cuedesc;

namespace {

BinaryDescriptor bits(std::string_view s) { return BinaryDescriptor::from_string(s); }

// Thresholds exceeded, counted directly from the definition.
std::uint32_t steps(double c, std::uint32_t intervals) {
  std::uint32_t n = 0;
  for (std::uint32_t i = 0; i + 1 < intervals; ++i) n += c > static_cast<double>(i + 1) / intervals ? 1 : 0;
  return n;
}

}  // namespace

TEST(Normalize, AffineAndClamped) {
  EXPECT_DOUBLE_EQ(normalize(0.5, {1.0, 0.0, 2}), 0.5);
  EXPECT_DOUBLE_EQ(normalize(640.0, {1.0 / 1280.0, 0.0, 2}), 0.5);
  const double top = std::nextafter(1.0, 0.0);
  EXPECT_EQ(normalize(2.0, {1.0, 0.0, 2}), top);
  EXPECT_EQ(normalize(1.0, {1.0, 0.0, 2}), top);
  EXPECT_EQ(normalize(-3.0, {1.0, 0.0, 2}), 0.0);
  EXPECT_LT(normalize(1279.0, {1.0 / 1279.0, 0.0, 8}), 1.0);
  EXPECT_THROW((void)normalize(std::nan(""), {1.0, 0.0, 2}), std::domain_error);
  EXPECT_THROW((void)normalize(INFINITY, {1.0, 0.0, 2}), std::domain_error);
}

TEST(Specs, Validation) {
  EXPECT_THROW(ContinuousCueSpec({1.0, 0.0, 1}).validate(), SchemaError);
  EXPECT_THROW(ContinuousCueSpec({0.0, 0.0, 4}).validate(), SchemaError);
  EXPECT_THROW(SelectorCueSpec{1}.validate(), SchemaError);
  EXPECT_NO_THROW(SelectorCueSpec{2}.validate());
}

TEST(EncodeContinuous, FirstIntervalSetsNothing) {
  EXPECT_EQ(encode_continuous(0.1, 5), bits("0000"));
  EXPECT_EQ(encode_continuous(0.0, 5), bits("0000"));
}

TEST(EncodeContinuous, ThermometerExamples) {
  EXPECT_EQ(encode_continuous(0.5, 5), bits("1100"));
  EXPECT_EQ(encode_continuous(0.99, 5), bits("1111"));
  EXPECT_EQ(encode_continuous(0.4, 5), bits("1000"));  // 0.4 is a threshold: strict comparison
  EXPECT_EQ(encode_continuous(std::nextafter(0.4, 1.0), 5), bits("1100"));
  EXPECT_EQ(encode_continuous(0.75, 2), bits("1"));
  EXPECT_THROW((void)encode_continuous(1.0, 5), std::domain_error);
  EXPECT_THROW((void)encode_continuous(-0.1, 5), std::domain_error);
}

TEST(EncodeContinuous, ThermometerLawOnGrid) {
  for (std::uint32_t intervals : {2u, 3u, 5u, 8u, 16u}) {
    std::vector<BinaryDescriptor> codes;
    std::vector<std::uint32_t> s;
    for (int i = 0; i < 1000; i += 7) {
      const double c = i / 1000.0;
      codes.push_back(encode_continuous(c, intervals));
      s.push_back(steps(c, intervals));
      // Set bits form a prefix.
      const auto& b = codes.back();
      for (std::size_t k = 0; k < b.size(); ++k) EXPECT_EQ(b.test(k), k < s.back());
    }
    for (std::size_t i = 0; i < codes.size(); ++i) {
      for (std::size_t j = 0; j < codes.size(); ++j) {
        const auto expected = s[i] > s[j] ? s[i] - s[j] : s[j] - s[i];
        ASSERT_EQ(hamming(codes[i], codes[j]), expected);
      }
    }
  }
}

TEST(EncodeContinuous, MonotoneInDistance) {
  const std::uint32_t intervals = 8;
  for (int a = 0; a < 1000; a += 37) {
    for (int b = a; b < 1000; b += 41) {
      for (int c = b; c < 1000; c += 53) {
        const auto ea = encode_continuous(a / 1000.0, intervals);
        EXPECT_GE(hamming(ea, encode_continuous(c / 1000.0, intervals)),
                  hamming(ea, encode_continuous(b / 1000.0, intervals)));
      }
    }
  }
}

TEST(EncodeSelector, OneHot) {
  EXPECT_EQ(encode_selector(4, 12), bits("000010000000"));
  EXPECT_THROW((void)encode_selector(12, 12), std::out_of_range);
  EXPECT_THROW((void)encode_selector(-1, 12), std::out_of_range);
  for (int i = 0; i < 12; ++i) {
    for (int j = 0; j < 12; ++j) {
      EXPECT_EQ(hamming(encode_selector(i, 12), encode_selector(j, 12)), i == j ? 0u : 2u);
    }
  }
}

TEST(CueSchema, Invariants) {
  EXPECT_THROW(CueSchema({}, 1), SchemaError);
  EXPECT_THROW(CueSchema({{"a", SelectorCueSpec{3}}, {"a", SelectorCueSpec{4}}}, 1), SchemaError);
  EXPECT_THROW(CueSchema({{"", SelectorCueSpec{3}}}, 1), SchemaError);
  EXPECT_THROW(CueSchema({{"a", ContinuousCueSpec{1.0, 0.0, 1}}}, 1), SchemaError);

  const CueSchema kc8 = keypoint_schema(1241, 376, 8, 8, 1);
  EXPECT_EQ(kc8.unpadded_block_bits(), 14u);
  EXPECT_EQ(kc8.block_bits(), 16u);
  EXPECT_EQ(kc8.augmentation_bits(), 16u);
  EXPECT_EQ(kc8.with_lambda(4).augmentation_bits(), 64u);
  EXPECT_EQ(keypoint_schema(1241, 376, 8, 8, 1, false).block_bits(), 14u);

  const CueSchema mixed({{"label", SelectorCueSpec{12}}, {"u", ContinuousCueSpec{0.01, 0.0, 5}}}, 2);
  EXPECT_EQ(mixed.selector_count(), 1u);
  EXPECT_EQ(mixed.continuous_bits(), 4u);
  EXPECT_EQ(mixed.block_bits(), 16u);
}

TEST(EncodeCues, KeypointExample) {
  // I_u = 5, I_v = 3 on a 100x100 image: u = 50 -> 1100, v = 70 -> 11.
  const CueSchema schema = keypoint_schema(100, 100, 5, 3, 1, false);
  const std::vector<CueValue> values{ContinuousValue{50.0}, ContinuousValue{70.0}};
  EXPECT_EQ(encode_cues(values, schema), bits("110011"));
  const CueSchema padded = keypoint_schema(100, 100, 5, 3, 1, true);
  EXPECT_EQ(encode_cues(values, padded), bits("11001100"));
}

TEST(EncodeCues, RoadLabel) {
  const CueSchema sl({{"label", SelectorCueSpec{12}}}, 1, false);
  const std::vector<CueValue> road{SelectorValue{4}};
  EXPECT_EQ(encode_cues(road, sl), bits("000010000000"));
}

TEST(EncodeCues, ArityAndKindErrors) {
  const CueSchema schema({{"u", ContinuousCueSpec{1.0, 0.0, 4}}, {"l", SelectorCueSpec{3}}}, 1);
  const std::vector<CueValue> short_row{ContinuousValue{0.2}};
  EXPECT_THROW((void)encode_cues(short_row, schema), SchemaError);
  const std::vector<CueValue> swapped{SelectorValue{1}, ContinuousValue{0.2}};
  EXPECT_THROW((void)encode_cues(swapped, schema), SchemaError);
  const std::vector<CueValue> bad_index{ContinuousValue{0.2}, SelectorValue{3}};
  EXPECT_THROW((void)encode_cues(bad_index, schema), std::out_of_range);
}

TEST(EncodeCues, BlockDistanceIsSumOfStepDifferences) {
  const CueSchema schema({{"a", ContinuousCueSpec{1.0, 0.0, 4}}, {"b", ContinuousCueSpec{1.0, 0.0, 3}}}, 1);
  for (int a = 0; a < 100; a += 9) {
    for (int a2 = 0; a2 < 100; a2 += 11) {
      for (int b = 0; b < 100; b += 13) {
        for (int b2 = 0; b2 < 100; b2 += 17) {
          const std::vector<CueValue> x{ContinuousValue{a / 100.0}, ContinuousValue{b / 100.0}};
          const std::vector<CueValue> y{ContinuousValue{a2 / 100.0}, ContinuousValue{b2 / 100.0}};
          const auto k = std::abs(static_cast<int>(steps(a / 100.0, 4)) - static_cast<int>(steps(a2 / 100.0, 4)));
          const auto m = std::abs(static_cast<int>(steps(b / 100.0, 3)) - static_cast<int>(steps(b2 / 100.0, 3)));
          ASSERT_EQ(hamming(encode_cues(x, schema), encode_cues(y, schema)), static_cast<std::uint32_t>(k + m));
        }
      }
    }
  }
}

TEST(Augment, LambdaZeroIsIdentity) {
  std::mt19937_64 rng(4);
  const auto d = oracle::random_descriptor(256, rng);
  const std::vector<CueValue> values{ContinuousValue{10.0}, ContinuousValue{20.0}};
  EXPECT_EQ(augment(d, values, keypoint_schema(640, 480, 8, 8, 0)), d);
}

TEST(Augment, WeightedDistanceExample) {
  // d, d' 10 apart; blocks 3 apart; lambda 2 -> 16.
  std::mt19937_64 rng(6);
  const auto d = oracle::random_descriptor(64, rng);
  auto d2 = d;
  for (std::size_t i = 0; i < 10; ++i) d2 = d2.with_bit(i, !d2.test(i));
  const CueSchema schema({{"u", ContinuousCueSpec{1.0, 0.0, 8}}}, 2);
  const std::vector<CueValue> x{ContinuousValue{0.05}};  // 0 steps
  const std::vector<CueValue> y{ContinuousValue{0.45}};  // 3 steps
  EXPECT_EQ(hamming(augment(d, x, schema), augment(d2, y, schema)), 16u);
}

TEST(Augment, BriefWithKeypointBlockThreshold) {
  std::mt19937_64 rng(7);
  const auto d = oracle::random_descriptor(256, rng);
  const std::vector<CueValue> values{ContinuousValue{100.0}, ContinuousValue{600.0}};
  const auto out = augment(d, values, keypoint_schema(1241, 376, 8, 8, 1));
  EXPECT_EQ(out.size(), 272u);
  EXPECT_NEAR(0.1 * static_cast<double>(out.size()), 27.2, 1e-12);
}

TEST(Augment, WeightedIdentityOnRandomInputs) {
  std::mt19937_64 rng(9);
  const CueSchema base({{"v", ContinuousCueSpec{1.0 / 376, 0.0, 8}},
                        {"u", ContinuousCueSpec{1.0 / 1241, 0.0, 8}},
                        {"label", SelectorCueSpec{12}}},
                       0);
  std::uniform_real_distribution<double> u(0.0, 1241.0);
  std::uniform_real_distribution<double> v(0.0, 376.0);
  std::uniform_int_distribution<int> label(0, 11);
  for (std::uint32_t lambda : {0u, 1u, 2u, 4u, 8u, 16u, 32u}) {
    const auto schema = base.with_lambda(lambda);
    for (int trial = 0; trial < 50; ++trial) {
      const auto d = oracle::random_descriptor(256, rng);
      const auto d2 = oracle::random_descriptor(256, rng);
      const std::vector<CueValue> x{ContinuousValue{v(rng)}, ContinuousValue{u(rng)}, SelectorValue{label(rng)}};
      const std::vector<CueValue> y{ContinuousValue{v(rng)}, ContinuousValue{u(rng)}, SelectorValue{label(rng)}};
      const auto bx = encode_cues(x, schema);
      const auto by = encode_cues(y, schema);
      ASSERT_EQ(hamming(augment(d, x, schema), augment(d2, y, schema)), hamming(d, d2) + lambda * hamming(bx, by));
    }
  }
}

TEST(Augment, Deterministic) {
  const auto schema = keypoint_schema(1241, 376, 8, 8, 3);
  const auto d = BinaryDescriptor::from_string("1100101");
  const std::vector<CueValue> values{ContinuousValue{33.0}, ContinuousValue{901.0}};
  EXPECT_EQ(augment(d, values, schema), augment(d, values, schema));
}

TEST(CoordinateLut, MatchesDirectEncoding) {
  const auto lut = build_coordinate_lut(640, 480, 8, 8);
  EXPECT_EQ(lut.size(), 640u * 480u);
  std::mt19937_64 rng(10);
  for (int i = 0; i < 1000; ++i) {
    const auto u = static_cast<std::uint32_t>(rng() % 640);
    const auto v = static_cast<std::uint32_t>(rng() % 480);
    const std::vector<CueValue> values{ContinuousValue{static_cast<double>(u)}, ContinuousValue{static_cast<double>(v)}};
    ASSERT_EQ(lut.lookup(u, v), encode_cues(values, lut.schema()));
  }
  EXPECT_THROW((void)lut.lookup(640, 0), std::out_of_range);
  EXPECT_THROW((void)lut.lookup(0, 480), std::out_of_range);
}

TEST(CoordinateLut, SinglePixelImage) {
  const auto lut = build_coordinate_lut(1, 1, 8, 8);
  EXPECT_EQ(lut.lookup(0, 0).popcount(), 0u);
}

TEST(CoordinateLut, KeypointGolden) {
  const auto lut = build_coordinate_lut(100, 100, 5, 3);
  EXPECT_EQ(lut.lookup(50, 70), bits("110011"));
}
