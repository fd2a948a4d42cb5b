#include "cuedesc/sweep.hpp"

#include <charconv>
#include <chrono>
#include <fstream>
#include <map>
#include <sstream>

#include "cuedesc/bf_index.hpp"
#include "cuedesc/bof_index.hpp"
#include "cuedesc/bst_index.hpp"
#include "cuedesc/lsh_index.hpp"
#include "json_detail.hpp"

namespace cuedesc {

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;
using detail::Json;

struct QueryOutcome {
  std::string query;
  std::vector<std::pair<std::string, double>> ranking;
  std::set<std::string> relevant_indexed;
};

struct Timings {
  std::chrono::nanoseconds query{0};
  std::chrono::nanoseconds insert{0};
  std::size_t queries = 0;
  std::size_t inserts = 0;
};

QueryOutcome query_once(const SearchIndex& index, const ImageRecord& image, const GroundTruth& gt, double tau,
                        Timings& t, bool record) {
  const auto start = Clock::now();
  auto result = index.query(image, tau);
  t.query += Clock::now() - start;
  ++t.queries;
  QueryOutcome out;
  if (!record) return out;
  out.query = image.image_id;
  out.ranking.reserve(result.ranking.size());
  for (const auto& s : result.ranking) out.ranking.emplace_back(index.image_id(s.image), s.score);
  for (const auto& r : gt.relevant_to(image.image_id)) {
    if (index.find_image(r)) out.relevant_indexed.insert(r);
  }
  return out;
}

void insert_once(SearchIndex& index, const ImageRecord& image, Timings& t) {
  const auto start = Clock::now();
  index.insert(image);
  t.insert += Clock::now() - start;
  ++t.inserts;
}

// Mean seconds spent per processed image.
double seconds_per_image(const Timings& t, Protocol protocol) {
  const auto secs = [](std::chrono::nanoseconds ns) { return static_cast<double>(ns.count()) / 1e9; };
  if (protocol == Protocol::incremental) {
    return t.queries == 0 ? 0.0 : (secs(t.query) + secs(t.insert)) / static_cast<double>(t.queries);
  }
  const double q = t.queries == 0 ? 0.0 : secs(t.query) / static_cast<double>(t.queries);
  const double i = t.inserts == 0 ? 0.0 : secs(t.insert) / static_cast<double>(t.inserts);
  return q + i;
}

std::vector<QueryOutcome> run_protocol(const std::vector<ImageRecord>& images, const GroundTruth& gt,
                                       SearchIndex& index, double tau, const RunConfig& config, Timings& t,
                                       bool record) {
  std::vector<QueryOutcome> outcomes;
  if (config.protocol == Protocol::batch) {
    for (const auto& image : images) {
      if (image.role == ImageRole::reference) insert_once(index, image, t);
    }
    const auto start = Clock::now();
    index.commit();
    t.insert += Clock::now() - start;
    for (const auto& image : images) {
      if (image.role == ImageRole::query) outcomes.push_back(query_once(index, image, gt, tau, t, record));
    }
  } else {
    for (std::size_t i = 0; i < images.size(); i += config.stride) {
      outcomes.push_back(query_once(index, images[i], gt, tau, t, record));
      insert_once(index, images[i], t);
    }
  }
  return outcomes;
}

std::string fmt(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out.flush()) throw std::runtime_error("failed writing " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

std::unique_ptr<SearchIndex> make_index(const std::string& backend, std::size_t descriptor_bits,
                                        const RunConfig& config) {
  if (backend == "bf") return std::make_unique<BruteForceIndex>(descriptor_bits);
  if (backend == "lsh") return std::make_unique<LshIndex>(descriptor_bits, config.lsh);
  if (backend == "bof") return std::make_unique<BofIndex>(descriptor_bits, config.bof);
  if (backend == "bst") return std::make_unique<BstIndex>(descriptor_bits, config.bst);
  throw std::invalid_argument("unknown backend '" + backend + "' (expected bf, lsh, bof or bst)");
}

std::vector<std::vector<BinaryDescriptor>> encode_dataset_cues(const Dataset& dataset, const CueSchema& schema) {
  std::vector<std::size_t> columns;
  for (const auto& cue : schema.cues()) {
    const auto index = dataset.column_index(cue.name);
    if (!index) throw SchemaError("schema cue '" + cue.name + "' has no dataset column");
    const bool continuous = std::holds_alternative<ContinuousCueSpec>(cue.spec);
    if (continuous != (dataset.cue_columns[*index].kind == CueKind::continuous)) {
      throw SchemaError("schema cue '" + cue.name + "' and its dataset column differ in kind");
    }
    columns.push_back(*index);
  }
  std::vector<std::vector<BinaryDescriptor>> blocks(dataset.images.size());
  std::vector<CueValue> values(columns.size());
  for (std::size_t i = 0; i < dataset.images.size(); ++i) {
    const auto& image = dataset.images[i];
    blocks[i].reserve(image.cue_values.size());
    for (const auto& row : image.cue_values) {
      for (std::size_t c = 0; c < columns.size(); ++c) values[c] = row.at(columns[c]);
      blocks[i].push_back(encode_cues(values, schema));
    }
  }
  return blocks;
}

std::vector<ImageRecord> augment_images(const Dataset& dataset,
                                        const std::vector<std::vector<BinaryDescriptor>>& blocks,
                                        std::uint32_t lambda) {
  std::vector<ImageRecord> out;
  out.reserve(dataset.images.size());
  for (std::size_t i = 0; i < dataset.images.size(); ++i) {
    const auto& image = dataset.images[i];
    ImageRecord aug{image.image_id, {}, {}, image.role};
    aug.descriptors.reserve(image.descriptors.size());
    for (std::size_t k = 0; k < image.descriptors.size(); ++k) {
      aug.descriptors.push_back(augment_with_block(image.descriptors[k], blocks.at(i).at(k), lambda));
    }
    out.push_back(std::move(aug));
  }
  return out;
}

EvalReport evaluate_cell(const std::vector<ImageRecord>& images, const GroundTruth& gt, const std::string& backend,
                         std::uint32_t lambda, double tau, const RunConfig& config) {
  std::size_t bits = 0;
  for (const auto& image : images) {
    if (!image.descriptors.empty()) {
      bits = image.descriptors.front().size();
      break;
    }
  }
  if (bits == 0) throw std::invalid_argument("dataset has no descriptors");

  EvalReport report;
  report.backend = backend;
  report.lambda = lambda;
  report.descriptor_bits = bits;
  report.tau = tau;

  Timings warmup;
  std::vector<QueryOutcome> outcomes;
  {
    auto index = make_index(backend, bits, config);
    outcomes = run_protocol(images, gt, *index, tau, config, warmup, true);
  }
  if (outcomes.empty()) throw std::invalid_argument("protocol produced no queries (no query images?)");

  std::vector<ReportedPair> pairs;
  GroundTruth effective;
  for (const auto& o : outcomes) {
    std::vector<std::string> ranked;
    ranked.reserve(o.ranking.size());
    for (const auto& [id, score] : o.ranking) {
      ranked.push_back(id);
      pairs.push_back({o.query, id, score});
      if (o.relevant_indexed.contains(id)) ++report.correct_pairs;
    }
    report.per_query.push_back({o.query, average_precision(ranked, o.relevant_indexed), !o.relevant_indexed.empty()});
    effective.relevant[o.query] = o.relevant_indexed;
    report.possible_pairs += o.relevant_indexed.size();
  }
  report.reported_pairs = pairs.size();
  report.map = mean_average_precision(report.per_query);
  report.curve = pr_curve(pairs, effective);

  if (config.timing_runs > 0) {
    double total = 0.0;
    for (std::uint32_t run = 0; run < config.timing_runs; ++run) {
      Timings t;
      auto index = make_index(backend, bits, config);
      (void)run_protocol(images, gt, *index, tau, config, t, false);
      total += seconds_per_image(t, config.protocol);
    }
    report.mean_processing_time_seconds = total / config.timing_runs;
    report.timing_runs = config.timing_runs;
  }
  return report;
}

Dataset load_run_dataset(const RunConfig& config) {
  if (config.synthetic) return generate_synthetic(*config.synthetic);
  if (config.dataset_manifest) return load_dataset(*config.dataset_manifest);
  throw std::invalid_argument("run config names no dataset");
}

std::vector<EvalReport> run_sweep(const RunConfig& config, const Dataset& dataset) {
  config.validate();
  dataset.validate();
  const auto blocks = encode_dataset_cues(dataset, config.schema);
  const auto bits = dataset.descriptor_bits();
  // Lambda-major computation keeps one augmented copy alive at a time.
  std::map<std::pair<std::size_t, std::size_t>, EvalReport> cells;
  for (std::size_t l = 0; l < config.lambdas.size(); ++l) {
    const auto lambda = config.lambdas[l];
    const auto images = augment_images(dataset, blocks, lambda);
    const double tau = tau_for(config.tau, bits, config.schema, lambda);
    for (std::size_t b = 0; b < config.backends.size(); ++b) {
      cells.emplace(std::pair{b, l}, evaluate_cell(images, dataset.ground_truth, config.backends[b], lambda, tau, config));
    }
  }
  std::vector<EvalReport> reports;
  reports.reserve(cells.size());
  for (auto& [key, report] : cells) reports.push_back(std::move(report));
  return reports;
}

void write_sweep_outputs(const RunConfig& config, const std::vector<EvalReport>& reports) {
  const fs::path dir = config.output_dir;
  const bool created_dir = !fs::exists(dir);
  std::vector<fs::path> written;
  const std::string echo = run_config_to_json(config);
  const std::string header = "# config=" + echo + "\n";

  try {
    fs::create_directories(dir);
    const auto emit = [&](const fs::path& name, const std::string& text) {
      written.push_back(dir / name);
      write_text(dir / name, text);
    };

    std::string sweep = header +
                        "backend,lambda,descriptor_bits,tau,queries,counted_queries,map,reported_pairs,"
                        "correct_pairs,possible_pairs\n";
    for (const auto& r : reports) {
      std::size_t counted = 0;
      for (const auto& q : r.per_query) counted += q.counted ? 1 : 0;
      sweep += r.backend + "," + std::to_string(r.lambda) + "," + std::to_string(r.descriptor_bits) + "," +
               fmt(r.tau) + "," + std::to_string(r.per_query.size()) + "," + std::to_string(counted) + "," +
               fmt(r.map) + "," + std::to_string(r.reported_pairs) + "," + std::to_string(r.correct_pairs) + "," +
               std::to_string(r.possible_pairs) + "\n";
    }
    emit("sweep.csv", sweep);

    for (const auto& r : reports) {
      std::string pr = header + "threshold,recall,precision\n";
      for (const auto& p : r.curve.points) pr += fmt(p.threshold) + "," + fmt(p.recall) + "," + fmt(p.precision) + "\n";
      emit("pr_" + r.backend + "_" + std::to_string(r.lambda) + ".csv", pr);
    }

    Json doc;
    doc["config"] = Json::parse(echo);
    Json list = Json::array();
    for (const auto& r : reports) {
      Json j;
      j["backend"] = r.backend;
      j["lambda"] = r.lambda;
      j["descriptor_bits"] = r.descriptor_bits;
      j["tau"] = r.tau;
      j["map"] = r.map;
      j["reported_pairs"] = r.reported_pairs;
      j["correct_pairs"] = r.correct_pairs;
      j["possible_pairs"] = r.possible_pairs;
      Json per_query = Json::array();
      for (const auto& q : r.per_query) per_query.push_back({{"query", q.query}, {"ap", q.ap}, {"counted", q.counted}});
      j["per_query"] = std::move(per_query);
      Json curve = Json::array();
      for (const auto& p : r.curve.points) {
        curve.push_back({{"threshold", p.threshold}, {"recall", p.recall}, {"precision", p.precision}});
      }
      j["pr_curve"] = std::move(curve);
      list.push_back(std::move(j));
    }
    doc["reports"] = std::move(list);
    emit("report.json", doc.dump(2) + "\n");

    if (config.timing_runs > 0) {
      std::string timing = header + "backend,lambda,timing_runs,mean_processing_time_seconds\n";
      for (const auto& r : reports) {
        timing += r.backend + "," + std::to_string(r.lambda) + "," + std::to_string(r.timing_runs) + "," +
                  fmt(r.mean_processing_time_seconds) + "\n";
      }
      emit("timing.csv", timing);
    }
  } catch (...) {
    std::error_code ec;
    for (const auto& f : written) fs::remove(f, ec);
    if (created_dir) fs::remove(dir, ec);
    throw;
  }
}

void merge_sweep_csvs(const std::vector<fs::path>& run_dirs, const fs::path& out_file) {
  if (run_dirs.empty()) throw std::invalid_argument("nothing to merge");
  std::string header;
  std::string body;
  for (const auto& dir : run_dirs) {
    const auto text = read_text(dir / "sweep.csv");
    std::istringstream lines(text);
    std::string line;
    bool have_header = false;
    const auto run = dir.filename().empty() ? dir.parent_path().filename().string() : dir.filename().string();
    while (std::getline(lines, line)) {
      if (line.empty() || line.starts_with("#")) continue;
      if (!have_header) {
        if (header.empty()) header = line;
        if (line != header) throw std::runtime_error((dir / "sweep.csv").string() + ": header differs from the first run");
        have_header = true;
        continue;
      }
      body += run + "," + line + "\n";
    }
    if (!have_header) throw std::runtime_error((dir / "sweep.csv").string() + ": missing header");
  }
  if (out_file.has_parent_path()) fs::create_directories(out_file.parent_path());
  write_text(out_file, "run," + header + "\n" + body);
}

}  // namespace cuedesc
