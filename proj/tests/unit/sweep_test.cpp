#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>

#include "cuedesc/sweep.hpp"

using namespace cuedesc;
namespace fs = std::filesystem;

namespace {

RunConfig small_run(const std::string& out) {
  SyntheticConfig s;
  s.place_count = 6;
  s.revisits_per_place = 1;
  s.descriptors_per_image = 30;
  s.descriptor_bits = 128;
  s.distractor_image_count = 2;
  RunConfig c;
  c.synthetic = s;
  c.lsh.key_bits = 10;
  c.bof.vocabulary = VocabularyParams{4, 2, 1, 10};
  c.bof.retrain_every = 4;
  c.bst.max_leaf_size = 8;
  c.timing_runs = 0;
  c.output_dir = fs::temp_directory_path() / ("cuedesc_" + out);
  c.reseed(7);
  return c;
}

std::map<std::string, std::string> read_dir(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    std::ifstream in(e.path(), std::ios::binary);
    out[e.path().filename().string()] = {std::istreambuf_iterator<char>(in), {}};
  }
  return out;
}

}  // namespace

TEST(Sweep, FullGridOrderAndFiles) {
  const auto c = small_run("sweep_grid");
  fs::remove_all(c.output_dir);
  const auto ds = load_run_dataset(c);
  const auto reports = run_sweep(c, ds);
  ASSERT_EQ(reports.size(), 28u);
  for (std::size_t b = 0; b < 4; ++b) {
    for (std::size_t l = 0; l < 7; ++l) {
      EXPECT_EQ(reports[b * 7 + l].backend, c.backends[b]);
      EXPECT_EQ(reports[b * 7 + l].lambda, c.lambdas[l]);
      EXPECT_EQ(reports[b * 7 + l].descriptor_bits, 128 + c.lambdas[l] * 16);
    }
  }
  write_sweep_outputs(c, reports);
  const auto files = read_dir(c.output_dir);
  EXPECT_EQ(files.size(), 2u + 28u);
  const auto& sweep = files.at("sweep.csv");
  EXPECT_EQ(sweep.rfind("# config={", 0), 0u);
  EXPECT_EQ(std::count(sweep.begin(), sweep.end(), '\n'), 2 + 28);
  EXPECT_TRUE(files.contains("pr_bst_32.csv"));
  fs::remove_all(c.output_dir);
}

TEST(Sweep, RepeatedRunIsByteIdentical) {
  auto c = small_run("sweep_repeat");
  c.lambdas = {0, 4};
  fs::remove_all(c.output_dir);
  write_sweep_outputs(c, run_sweep(c, load_run_dataset(c)));
  const auto first = read_dir(c.output_dir);
  fs::remove_all(c.output_dir);
  write_sweep_outputs(c, run_sweep(c, load_run_dataset(c)));
  EXPECT_EQ(read_dir(c.output_dir), first);
  fs::remove_all(c.output_dir);
}

TEST(Sweep, NoiselessBruteForceIsPerfect) {
  auto c = small_run("sweep_clean");
  c.synthetic->bit_flip_probability = 0.0;
  c.synthetic->keypoint_noise_sigma = 0.0;
  c.synthetic->label_flip_probability = 0.0;
  c.backends = {"bf"};
  c.lambdas = {0, 8};
  for (const auto& r : run_sweep(c, load_run_dataset(c))) {
    EXPECT_DOUBLE_EQ(r.map, 1.0) << "lambda " << r.lambda;
    EXPECT_EQ(r.per_query.size(), 6u);
  }
}

TEST(Sweep, LambdaZeroKeepsRawDescriptors) {
  const auto c = small_run("sweep_raw");
  const auto ds = load_run_dataset(c);
  const auto blocks = encode_dataset_cues(ds, c.schema);
  const auto images = augment_images(ds, blocks, 0);
  for (std::size_t i = 0; i < images.size(); ++i) EXPECT_EQ(images[i].descriptors, ds.images[i].descriptors);
}

TEST(Sweep, IncrementalProtocol) {
  auto c = small_run("sweep_incr");
  c.protocol = Protocol::incremental;
  c.stride = 1;
  c.backends = {"bf"};
  c.lambdas = {0};
  const auto reports = run_sweep(c, load_run_dataset(c));
  ASSERT_EQ(reports.size(), 1u);
  // Every image is queried before it is inserted; only revisits have
  // relevant images indexed before them.
  EXPECT_EQ(reports[0].per_query.size(), 2u + 12u);
  std::size_t counted = 0;
  for (const auto& q : reports[0].per_query) counted += q.counted ? 1 : 0;
  EXPECT_EQ(counted, 6u);
}

TEST(Sweep, TimingIsMeasuredWhenRequested) {
  auto c = small_run("sweep_time");
  c.backends = {"bf", "bst"};
  c.lambdas = {0};
  c.timing_runs = 2;
  for (const auto& r : run_sweep(c, load_run_dataset(c))) {
    EXPECT_EQ(r.timing_runs, 2u);
    EXPECT_GT(r.mean_processing_time_seconds, 0.0);
  }
}

TEST(Sweep, SchemaColumnsMustExist) {
  auto c = small_run("sweep_schema");
  const auto ds = load_run_dataset(c);
  EXPECT_THROW((void)encode_dataset_cues(ds, CueSchema({{"depth", ContinuousCueSpec{}}}, 1)), SchemaError);
  EXPECT_THROW((void)encode_dataset_cues(ds, CueSchema({{"label", ContinuousCueSpec{}}}, 1)), SchemaError);
  EXPECT_NO_THROW((void)encode_dataset_cues(ds, CueSchema({{"label", SelectorCueSpec{12}}}, 1)));
}

TEST(Sweep, UnknownBackend) {
  const auto c = small_run("sweep_unknown");
  EXPECT_THROW((void)make_index("kd", 64, c), std::invalid_argument);
}

TEST(Sweep, MergeRuns) {
  auto a = small_run("merge_a");
  auto b = small_run("merge_b");
  a.backends = b.backends = {"bf"};
  a.lambdas = b.lambdas = {0};
  b.reseed(8);
  for (const auto* c : {&a, &b}) {
    fs::remove_all(c->output_dir);
    write_sweep_outputs(*c, run_sweep(*c, load_run_dataset(*c)));
  }
  const auto out = fs::temp_directory_path() / "cuedesc_merged.csv";
  merge_sweep_csvs({a.output_dir, b.output_dir}, out);
  std::ifstream in(out);
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(line);
  ASSERT_EQ(lines.size(), 3u);
  EXPECT_EQ(lines[0].rfind("run,backend,lambda", 0), 0u);
  EXPECT_EQ(lines[1].rfind("cuedesc_merge_a,bf,0,", 0), 0u);
  EXPECT_EQ(lines[2].rfind("cuedesc_merge_b,bf,0,", 0), 0u);
  fs::remove(out);
  fs::remove_all(a.output_dir);
  fs::remove_all(b.output_dir);
}
