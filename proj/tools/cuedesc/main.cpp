// cuedesc: generate synthetic datasets, run lambda sweeps, merge sweep results.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "cuedesc/dataset.hpp"
#include "cuedesc/run_config.hpp"
#include "cuedesc/sweep.hpp"

namespace {

void apply_seed(cuedesc::RunConfig& config, std::uint64_t seed) {
  // A seed given on the command line takes over every sub-seed.
  config.explicit_synthetic_seed = false;
  config.explicit_lsh_seed = false;
  config.explicit_vocabulary_seed = false;
  config.reseed(seed);
}

int cmd_generate(const std::string& config_path, const std::string& out, std::optional<std::uint64_t> seed) {
  auto config = cuedesc::load_run_config(config_path);
  if (seed) apply_seed(config, *seed);
  if (!config.synthetic) {
    std::cerr << "error: " << config_path << ": generate needs dataset.synthetic\n";
    return 1;
  }
  const auto dataset = cuedesc::generate_synthetic(*config.synthetic);
  cuedesc::save_dataset(dataset, out, cuedesc::synthetic_config_to_json(*config.synthetic));
  std::size_t descriptors = 0;
  for (const auto& image : dataset.images) descriptors += image.descriptors.size();
  std::printf("wrote %zu images (%zu descriptors) to %s\n", dataset.images.size(), descriptors, out.c_str());
  return 0;
}

int cmd_run(const std::string& config_path, const std::string& out, const std::vector<std::string>& backends,
            const std::vector<std::uint32_t>& lambdas, std::optional<std::uint64_t> seed) {
  auto config = cuedesc::load_run_config(config_path);
  if (!out.empty()) config.output_dir = out;
  if (!backends.empty()) config.backends = backends;
  if (!lambdas.empty()) config.lambdas = lambdas;
  if (seed) apply_seed(config, *seed);
  config.validate();

  const auto dataset = cuedesc::load_run_dataset(config);
  const auto reports = cuedesc::run_sweep(config, dataset);
  cuedesc::write_sweep_outputs(config, reports);

  std::printf("%-8s %7s %6s %8s %8s", "backend", "lambda", "bits", "tau", "mAP");
  if (config.timing_runs > 0) std::printf(" %12s", "t_mean[ms]");
  std::printf("\n");
  for (const auto& r : reports) {
    std::printf("%-8s %7u %6zu %8.2f %8.4f", r.backend.c_str(), r.lambda, r.descriptor_bits, r.tau, r.map);
    if (config.timing_runs > 0) std::printf(" %12.3f", r.mean_processing_time_seconds * 1e3);
    std::printf("\n");
  }
  std::printf("outputs in %s\n", config.output_dir.string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cue-augmented binary descriptor search: datasets, sweeps and reports"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out;
  std::vector<std::string> backends;
  std::vector<std::uint32_t> lambdas;
  std::uint64_t seed_value = 0;

  auto* generate = app.add_subcommand("generate", "Write a synthetic dataset described by a run config");
  generate->add_option("--config", config_path, "Run config with a dataset.synthetic section")
      ->required()
      ->check(CLI::ExistingFile);
  generate->add_option("--out", out, "Dataset directory to create")->required();
  auto* generate_seed = generate->add_option("--seed", seed_value, "Master seed (overrides every sub-seed)");

  auto* run = app.add_subcommand("run", "Run the backend x lambda sweep of a config");
  run->add_option("--config", config_path, "Run config (or a report.json to rerun)")
      ->required()
      ->check(CLI::ExistingFile);
  run->add_option("--out", out, "Output directory (overrides output_dir)");
  run->add_option("--backend", backends, "Backends to run: bf, lsh, bof, bst")
      ->delimiter(',')
      ->check(CLI::IsMember({"bf", "lsh", "bof", "bst"}));
  run->add_option("--lambda", lambdas, "Augmentation weights, e.g. 0,1,2,4")->delimiter(',');
  auto* run_seed = run->add_option("--seed", seed_value, "Master seed (overrides every sub-seed)");

  std::vector<std::string> run_dirs;
  std::string merged;
  auto* report = app.add_subcommand("report", "Merge the sweep.csv files of several runs");
  report->add_option("runs", run_dirs, "Run output directories")->required()->check(CLI::ExistingDirectory);
  report->add_option("--out", merged, "Merged CSV file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (generate->parsed()) {
      return cmd_generate(config_path, out, generate_seed->count() ? std::optional(seed_value) : std::nullopt);
    }
    if (run->parsed()) {
      return cmd_run(config_path, out, backends, lambdas, run_seed->count() ? std::optional(seed_value) : std::nullopt);
    }
    if (report->parsed()) {
      std::vector<std::filesystem::path> dirs(run_dirs.begin(), run_dirs.end());
      cuedesc::merge_sweep_csvs(dirs, merged);
      std::printf("merged %zu runs into %s\n", dirs.size(), merged.c_str());
      return 0;
    }
  } catch (const cuedesc::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
