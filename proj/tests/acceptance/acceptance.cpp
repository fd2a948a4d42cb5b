// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any fails. Seeds are fixed so every printed value is
// reproducible.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "cuedesc/bf_index.hpp"
#include "cuedesc/bst_index.hpp"
#include "cuedesc/eval.hpp"
#include "cuedesc/lsh_index.hpp"
#include "cuedesc/sweep.hpp"
#include "oracles.hpp"

using namespace cuedesc;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string format(const char* fmt, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return buf;
}

std::uint32_t steps(double c, std::uint32_t intervals) {
  std::uint32_t n = 0;
  for (std::uint32_t i = 0; i + 1 < intervals; ++i) n += c > static_cast<double>(i + 1) / intervals ? 1 : 0;
  return n;
}

// 1
Outcome thermometer_law() {
  std::size_t pairs = 0;
  for (std::uint32_t intervals : {2u, 3u, 5u, 8u, 16u}) {
    std::vector<BinaryDescriptor> codes;
    std::vector<std::uint32_t> s;
    for (int i = 0; i < 1000; ++i) {
      codes.push_back(encode_continuous(i / 1000.0, intervals));
      s.push_back(steps(i / 1000.0, intervals));
    }
    for (std::size_t a = 0; a < codes.size(); ++a) {
      for (std::size_t b = 0; b < codes.size(); ++b) {
        const auto expected = s[a] > s[b] ? s[a] - s[b] : s[b] - s[a];
        if (hamming(codes[a], codes[b]) != expected) {
          return {false, format("I=%u c=%.3f c'=%.3f", intervals, a / 1000.0, b / 1000.0)};
        }
        ++pairs;
      }
    }
  }
  if (encode_continuous(0.1, 5).popcount() != 0) return {false, "first interval sets bits"};
  return {true, format("%zu pairs, first-interval code all zero", pairs)};
}

// 2
Outcome augmented_distance_identity() {
  std::mt19937_64 rng(2);
  const CueSchema base({{"u", ContinuousCueSpec{1.0 / 1241, 0.0, 8}},
                        {"v", ContinuousCueSpec{1.0 / 376, 0.0, 8}},
                        {"label", SelectorCueSpec{12}}},
                       0);
  const std::uint32_t lambdas[] = {0, 1, 2, 4, 8, 16, 32};
  std::uniform_real_distribution<double> u(0.0, 1241.0);
  std::uniform_real_distribution<double> v(0.0, 376.0);
  std::uniform_int_distribution<int> label(0, 11);
  for (int trial = 0; trial < 10000; ++trial) {
    const auto lambda = lambdas[trial % 7];
    const auto schema = base.with_lambda(lambda);
    const auto d = oracle::random_descriptor(256, rng);
    const auto d2 = oracle::random_descriptor(256, rng);
    const std::vector<CueValue> x{ContinuousValue{u(rng)}, ContinuousValue{v(rng)}, SelectorValue{label(rng)}};
    const std::vector<CueValue> y{ContinuousValue{u(rng)}, ContinuousValue{v(rng)}, SelectorValue{label(rng)}};
    const auto lhs = oracle::hamming(augment(d, x, schema), augment(d2, y, schema));
    const auto rhs = oracle::hamming(d, d2) + lambda * oracle::hamming(encode_cues(x, schema), encode_cues(y, schema));
    if (lhs != rhs) return {false, format("trial %d: %u != %u", trial, lhs, rhs)};
  }
  return {true, "10000 tuples, lambda in {0,1,2,4,8,16,32}"};
}

// 3
Outcome golden_vectors() {
  const auto kc = BinaryDescriptor::from_string("110011");
  const CueSchema schema = keypoint_schema(100, 100, 5, 3, 1, false);
  const std::vector<CueValue> keypoint{ContinuousValue{50.0}, ContinuousValue{70.0}};
  const auto encoded = encode_cues(keypoint, schema);
  const auto lut = build_coordinate_lut(100, 100, 5, 3).lookup(50, 70);
  const auto padded = encode_cues(keypoint, keypoint_schema(100, 100, 5, 3, 1, true));
  const auto road = encode_selector(4, 12);
  const double tau = tau_for(TauRule{}, 256, keypoint_schema(1241, 376, 8, 8), 1);
  const bool ok = encoded == kc && lut == kc && padded == BinaryDescriptor::from_string("11001100") &&
                  road == BinaryDescriptor::from_string("000010000000") && std::abs(tau - 27.2) < 1e-12;
  return {ok, format("keypoint %s, padded %s, label %s, tau %.4f", encoded.to_string().c_str(),
                     padded.to_string().c_str(), road.to_string().c_str(), tau)};
}

struct Instance {
  std::vector<ImageRecord> references;
  ImageRecord query;
};

Instance random_instance(std::mt19937_64& rng, std::size_t bits, std::size_t max_descriptors) {
  Instance in;
  const std::size_t images = 1 + rng() % 5;
  const std::size_t per_image = 1 + rng() % (max_descriptors / images);
  for (std::size_t i = 0; i < images; ++i) {
    in.references.push_back(oracle::random_image("r" + std::to_string(i), per_image, bits, rng));
  }
  if (images > 1) in.references[1].descriptors[0] = in.references[0].descriptors[0];
  const auto flat = oracle::flatten(in.references);
  in.query.image_id = "q";
  in.query.role = ImageRole::query;
  for (std::size_t q = 0; q < 50; ++q) {
    const auto& source = flat[rng() % flat.size()];
    in.query.descriptors.push_back(q % 3 == 2 ? oracle::random_descriptor(bits, rng)
                                              : oracle::flip(source, 0.05 * static_cast<double>(q % 3), rng));
  }
  return in;
}

std::vector<MatchResult> run_index(SearchIndex& index, const Instance& in, double tau) {
  for (const auto& r : in.references) index.insert(r);
  index.commit();
  return index.query(in.query, tau).matches;
}

// 4
Outcome bf_oracle() {
  std::mt19937_64 rng(4);
  std::size_t matches = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t bits = std::array<std::size_t, 4>{64, 100, 256, 512}[trial % 4];
    const auto in = random_instance(rng, bits, 500);
    const double tau = 0.1 * static_cast<double>(bits) * (1 + trial % 3);
    BruteForceIndex bf(bits);
    const auto got = run_index(bf, in, tau);
    const auto flat = oracle::flatten(in.references);
    std::vector<std::uint32_t> image_of;
    for (std::uint32_t i = 0; i < in.references.size(); ++i) {
      image_of.insert(image_of.end(), in.references[i].descriptors.size(), i);
    }
    std::vector<MatchResult> expected;
    const auto nn = oracle::nearest_neighbors(in.query.descriptors, flat, tau);
    for (std::uint32_t q = 0; q < nn.size(); ++q) {
      if (nn[q]) expected.push_back({q, nn[q]->reference, image_of[nn[q]->reference], nn[q]->distance});
    }
    if (got != expected) return {false, format("trial %d differs", trial)};
    matches += got.size();
  }
  return {true, format("100 sets, %zu matches identical", matches)};
}

// 5
Outcome degenerate_equivalence() {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const auto in = random_instance(rng, 256, 500);
    BruteForceIndex bf(256);
    BstIndex bst(256, BstConfig{std::nullopt});
    const auto expected = run_index(bf, in, 64);
    if (run_index(bst, in, 64) != expected) return {false, format("bst trial %d", trial)};
  }
  for (int trial = 0; trial < 20; ++trial) {
    const auto in = random_instance(rng, 128, 500);
    BruteForceIndex bf(128);
    LshIndex lsh(128, LshConfig{2, 10, 10, static_cast<std::uint64_t>(trial)});
    const auto expected = run_index(bf, in, 38.4);
    if (run_index(lsh, in, 38.4) != expected) return {false, format("lsh trial %d", trial)};
  }
  return {true, "20 BST (single leaf) and 20 LSH (probe radius = key bits) instances equal BF"};
}

// The 10k-descriptor benchmark shared by criteria 6 and 10.
RunConfig benchmark_config() {
  SyntheticConfig s;
  s.place_count = 20;
  s.revisits_per_place = 1;
  s.descriptors_per_image = 500;
  s.descriptor_bits = 256;
  s.bit_flip_probability = 0.05;
  RunConfig c;
  c.synthetic = s;
  c.backends = {"bf", "lsh", "bst"};
  c.lambdas = {0};
  c.reseed(6);
  return c;
}

// 6
Outcome approximate_recall() {
  const auto config = benchmark_config();
  const auto ds = generate_synthetic(*config.synthetic);
  const double tau = tau_for(config.tau, 256, config.schema, 0);
  std::map<std::string, std::unique_ptr<SearchIndex>> indexes;
  for (const auto& name : config.backends) {
    indexes[name] = make_index(name, 256, config);
    for (const auto& image : ds.images) {
      if (image.role == ImageRole::reference) indexes[name]->insert(image);
    }
    indexes[name]->commit();
  }
  std::map<std::string, std::size_t> agree;
  std::size_t bf_found = 0;
  for (const auto& image : ds.images) {
    if (image.role != ImageRole::query) continue;
    const auto bf = indexes["bf"]->query(image, tau).matches;
    bf_found += bf.size();
    for (const char* name : {"lsh", "bst"}) {
      const auto got = indexes[name]->query(image, tau).matches;
      std::map<std::uint32_t, std::uint32_t> by_query;
      for (const auto& m : got) by_query[m.query_descriptor] = m.distance;
      for (const auto& m : bf) {
        auto it = by_query.find(m.query_descriptor);
        if (it != by_query.end() && it->second == m.distance) ++agree[name];
      }
    }
  }
  const double lsh = static_cast<double>(agree["lsh"]) / static_cast<double>(bf_found);
  const double bst = static_cast<double>(agree["bst"]) / static_cast<double>(bf_found);
  return {lsh >= 0.5 && bst >= 0.5,
          format("recall@1 lsh %.4f bst %.4f over %zu BF matches (synthetic seed %llu, lsh seed %llu)", lsh, bst,
                 bf_found, static_cast<unsigned long long>(config.synthetic->seed),
                 static_cast<unsigned long long>(config.lsh.seed))};
}

// Sequence for criteria 7 and 8: 200 places seen twice, groups of four
// places sharing one appearance, few features persisting across visits.
RunConfig sequence_config(std::uint32_t bits) {
  SyntheticConfig s;
  s.place_count = 200;
  s.revisits_per_place = 1;
  s.descriptors_per_image = 500;
  s.descriptor_bits = bits;
  s.bit_flip_probability = 0.05;
  s.keypoint_noise_sigma = 5.0;
  s.label_count = 12;
  s.label_flip_probability = 0.1;
  s.appearance_group_size = 4;
  s.appearance_group_noise = 0.0;
  s.feature_persistence = 0.03;
  RunConfig c;
  c.synthetic = s;
  c.backends = {"bf"};
  c.schema = keypoint_schema(1241, 376, 8, 8);
  c.timing_runs = 0;
  c.reseed(1);
  return c;
}

std::map<std::uint32_t, double> bf_map(const RunConfig& c, const Dataset& ds) {
  std::map<std::uint32_t, double> out;
  for (const auto& r : run_sweep(c, ds)) out[r.lambda] = r.map;
  return out;
}

std::string describe(const std::map<std::uint32_t, double>& maps) {
  std::string s;
  for (const auto& [lambda, map] : maps) s += format("%s%u:%.4f", s.empty() ? "" : " ", lambda, map);
  return s;
}

// 7
Outcome trend() {
  auto long_cfg = sequence_config(256);
  long_cfg.lambdas = {0, 16};
  const auto long_maps = bf_map(long_cfg, generate_synthetic(*long_cfg.synthetic));
  const bool gain = long_maps.at(16) - long_maps.at(0) >= 0.05;

  auto short_cfg = sequence_config(64);
  short_cfg.lambdas = {0, 1, 2, 4, 8, 16, 32};
  const auto short_maps = bf_map(short_cfg, generate_synthetic(*short_cfg.synthetic));
  double peak = 0.0;
  for (const auto& [lambda, map] : short_maps) peak = std::max(peak, map);
  const bool drop = short_maps.at(32) < peak;
  return {gain && drop, format("256-bit mAP {%s}; 64-bit mAP {%s}, peak %.4f", describe(long_maps).c_str(),
                               describe(short_maps).c_str(), peak)};
}

// 8
Outcome selector_benefit() {
  auto c = sequence_config(256);
  c.schema = CueSchema({{"label", SelectorCueSpec{12}}}, 0);
  c.lambdas = {0, 1, 2, 4};
  const auto maps = bf_map(c, generate_synthetic(*c.synthetic));
  const double best = std::max({maps.at(1), maps.at(2), maps.at(4)});
  return {best >= maps.at(0) - 0.01, format("label-cue mAP {%s}, best %.4f", describe(maps).c_str(), best)};
}

// 9
Outcome ap_oracle() {
  std::size_t lists = 0;
  double worst = 0.0;
  for (std::size_t len = 0; len <= 6; ++len) {
    for (std::uint32_t pattern = 0; pattern < (1u << len); ++pattern) {
      std::vector<bool> hits(len);
      bool flat[7] = {};
      std::size_t found = 0;
      for (std::size_t i = 0; i < len; ++i) {
        hits[i] = ((pattern >> i) & 1u) != 0;
        flat[i] = hits[i];
        found += hits[i] ? 1 : 0;
      }
      for (std::size_t relevant = found; relevant <= found + 2; ++relevant) {
        const double expected = oracle::average_precision(hits, static_cast<std::int64_t>(relevant)).value();
        const double got = average_precision(std::span<const bool>(flat, len), relevant);
        worst = std::max(worst, std::abs(got - expected));
        ++lists;
      }
    }
  }
  // Both sides are exact rationals; the only difference allowed is the
  // rounding of the double evaluation.
  return {worst <= 1e-15, format("%zu (list, relevant count) cases, max |diff| %.3g", lists, worst)};
}

// 10
Outcome timing() {
  auto config = benchmark_config();
  config.backends = {"bf", "bst"};
  config.timing_runs = 10;
  const auto reports = run_sweep(config, generate_synthetic(*config.synthetic));
  const double bf = reports[0].mean_processing_time_seconds;
  const double bst = reports[1].mean_processing_time_seconds;
  return {bst < bf, format("t_mean over 10 runs: bf %.3f ms, bst %.3f ms per image", bf * 1e3, bst * 1e3)};
}

std::map<std::string, std::string> read_dir(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    std::ifstream in(e.path(), std::ios::binary);
    out[fs::relative(e.path(), dir).string()] = {std::istreambuf_iterator<char>(in), {}};
  }
  return out;
}

// 11
Outcome determinism() {
  SyntheticConfig s;
  s.place_count = 8;
  s.revisits_per_place = 2;
  s.descriptors_per_image = 60;
  s.distractor_image_count = 4;
  RunConfig c;
  c.synthetic = s;
  c.lambdas = {0, 2, 8};
  c.bof.vocabulary = VocabularyParams{4, 2, 0, 10};
  c.bof.retrain_every = 5;
  c.timing_runs = 0;
  c.output_dir = fs::temp_directory_path() / "cuedesc_acceptance_run";
  c.reseed(11);
  const auto data_dir = fs::temp_directory_path() / "cuedesc_acceptance_data";

  std::vector<std::map<std::string, std::string>> runs;
  for (int repeat = 0; repeat < 2; ++repeat) {
    fs::remove_all(c.output_dir);
    fs::remove_all(data_dir);
    const auto ds = generate_synthetic(*c.synthetic);
    save_dataset(ds, data_dir, synthetic_config_to_json(*c.synthetic));
    write_sweep_outputs(c, run_sweep(c, load_dataset(data_dir)));
    auto files = read_dir(c.output_dir);
    for (auto& [name, text] : read_dir(data_dir)) files["dataset/" + name] = std::move(text);
    runs.push_back(std::move(files));
  }
  fs::remove_all(c.output_dir);
  fs::remove_all(data_dir);
  return {runs[0] == runs[1], format("%zu output files byte-identical across two runs", runs[0].size())};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> check;
  };
  const std::vector<Criterion> criteria{
      {"thermometer law", thermometer_law},
      {"augmented distance identity", augmented_distance_identity},
      {"keypoint/label golden vectors and tau", golden_vectors},
      {"brute force equals naive oracle", bf_oracle},
      {"degenerate BST/LSH equal brute force", degenerate_equivalence},
      {"approximate backends recall@1", approximate_recall},
      {"lambda trend on synthetic sequence", trend},
      {"label cue does not hurt", selector_benefit},
      {"average precision oracle", ap_oracle},
      {"timing harness, BST faster than BF", timing},
      {"determinism", determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s %2zu %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].name, o.detail.c_str(),
                secs);
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
  }
  std::printf("%d of %zu criteria failed\n", failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
