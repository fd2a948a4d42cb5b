#pragma once

// The sweep driver: for every (backend, lambda) cell, augment the dataset,
// run the evaluation protocol and collect an EvalReport.
//
// Protocols
//   batch        insert every reference image in sequence order, then query
//                every query image. Relevant images are those in the index.
//   incremental  walk the sequence taking every stride-th image; each one is
//                first queried against the images taken before it, then
//                inserted. Queries with nothing relevant indexed yet are left
//                out of mAP.
//
// Output files (all deterministic except timing.csv, which holds wall-clock
// measurements):
//   sweep.csv                   one summary row per cell
//   pr_<backend>_<lambda>.csv   operating points of the cell's PR curve
//   report.json                 resolved config plus every report
//   timing.csv                  mean processing time per cell (if timed)
// CSV files start with a "# config=<json>" line echoing the resolved config.

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "cuedesc/eval.hpp"
#include "cuedesc/run_config.hpp"
#include "cuedesc/search_index.hpp"

namespace cuedesc {

// Throws std::invalid_argument for an unknown backend name.
[[nodiscard]] std::unique_ptr<SearchIndex> make_index(const std::string& backend, std::size_t descriptor_bits,
                                                      const RunConfig& config);

// One augmentation block per descriptor, per image; independent of lambda.
// Schema cues are matched to dataset cue columns by name. Throws SchemaError
// for a missing column or a kind mismatch.
[[nodiscard]] std::vector<std::vector<BinaryDescriptor>> encode_dataset_cues(const Dataset& dataset,
                                                                              const CueSchema& schema);

// Copy of the images with every descriptor augmented by lambda blocks.
// lambda = 0 returns the descriptors unchanged.
[[nodiscard]] std::vector<ImageRecord> augment_images(const Dataset& dataset,
                                                      const std::vector<std::vector<BinaryDescriptor>>& blocks,
                                                      std::uint32_t lambda);

// Runs the protocol once on already augmented images. With timing_runs > 0
// the protocol is repeated that many more times on fresh indexes to measure
// the mean processing time.
[[nodiscard]] EvalReport evaluate_cell(const std::vector<ImageRecord>& images, const GroundTruth& gt,
                                       const std::string& backend, std::uint32_t lambda, double tau,
                                       const RunConfig& config);

// Loads or generates the dataset named by the config.
[[nodiscard]] Dataset load_run_dataset(const RunConfig& config);

// Every cell, in backend-major, lambda-minor order.
[[nodiscard]] std::vector<EvalReport> run_sweep(const RunConfig& config, const Dataset& dataset);

// Writes the output files into config.output_dir. Files written before a
// failure are removed again.
void write_sweep_outputs(const RunConfig& config, const std::vector<EvalReport>& reports);

// Merges the sweep.csv files of several output directories into one CSV with
// a leading "run" column (the directory name). Throws when headers differ.
void merge_sweep_csvs(const std::vector<std::filesystem::path>& run_dirs, const std::filesystem::path& out_file);

}  // namespace cuedesc
