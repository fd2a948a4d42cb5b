#include <gtest/gtest.h>

#include "cuedesc/encoders.hpp"

using namespace cuedesc;

TEST(SchemaJson, RoundTrip) {
  const std::vector<CueSchema> schemas{
      keypoint_schema(1241, 376, 8, 8, 4),
      keypoint_schema(640, 480, 5, 3, 0, false),
      CueSchema({{"label", SelectorCueSpec{12}}}, 2),
      CueSchema({{"depth", ContinuousCueSpec{0.1, -0.25, 6}}, {"label", SelectorCueSpec{3}}}, 16),
      // Values that do not print exactly in short decimal form.
      CueSchema({{"x", ContinuousCueSpec{1.0 / 3.0, 1e-17, 2}}}, 1),
  };
  for (const auto& s : schemas) {
    const auto text = schema_to_json(s);
    EXPECT_EQ(schema_from_json(text), s) << text;
    EXPECT_EQ(schema_to_json(schema_from_json(text)), text);
  }
}

TEST(SchemaJson, Defaults) {
  const auto s = schema_from_json(R"({"cues": [{"name": "u", "kind": "continuous", "alpha": 0.5, "intervals": 4}]})");
  EXPECT_EQ(s.lambda(), 1u);
  EXPECT_TRUE(s.pad_block_to_byte());
  EXPECT_EQ(std::get<ContinuousCueSpec>(s.cues()[0].spec).beta, 0.0);
}

TEST(SchemaJson, ErrorsNameTheField) {
  const auto message = [](const char* text) {
    try {
      (void)schema_from_json(text);
    } catch (const SchemaError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  EXPECT_NE(message("{").find("schema"), std::string::npos);
  EXPECT_NE(message(R"({"cues": 3})").find("schema.cues"), std::string::npos);
  EXPECT_NE(message(R"({"cues": [{"name": "u", "kind": "continuous", "alpha": 1}]})").find("schema.cues[0].intervals"),
            std::string::npos);
  EXPECT_NE(message(R"({"cues": [{"name": "u", "kind": "angle"}]})").find("schema.cues[0].kind"), std::string::npos);
  EXPECT_NE(message(R"({"cues": [{"name": "l", "kind": "selector", "cardinality": 1}]})").find("schema.cues[0]"),
            std::string::npos);
  EXPECT_NE(message(R"({"cues": []})"), "no error");
  EXPECT_NE(message(R"({"cues": [{"name": "l", "kind": "selector", "cardinality": 3}], "lambda": -1})")
                .find("schema.lambda"),
            std::string::npos);
}
