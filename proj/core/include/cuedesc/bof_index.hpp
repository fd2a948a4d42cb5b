#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "cuedesc/search_index.hpp"
#include "cuedesc/vocabulary.hpp"

namespace cuedesc {

struct BofConfig {
  VocabularyParams vocabulary;
  std::uint32_t top_n = 50;
  // Retrain on everything indexed so far after this many new images.
  std::uint32_t retrain_every = 50;

  void validate() const;
};

// Bag of binary words. Images become idf-weighted, L1-normalized word
// histograms; queries score every image sharing a word through an inverted
// index with 1 - |a - b|_1 / 2 and return the best top_n. Descriptor matches
// are filled in by an exhaustive nearest-neighbour search restricted to the
// returned images.
//
// The vocabulary is trained on the indexed images themselves: on the first
// insert that provides at least k descriptors, then after every
// retrain_every further images, and on commit() if anything was inserted
// since the last training.
class BofIndex final : public SearchIndex {
 public:
  BofIndex(std::size_t descriptor_bits, BofConfig config);

  [[nodiscard]] std::string_view name() const noexcept override { return "bof"; }
  [[nodiscard]] const BofConfig& config() const noexcept { return config_; }
  [[nodiscard]] const std::optional<Vocabulary>& vocabulary() const noexcept { return vocab_; }
  [[nodiscard]] const BowVector& bow(std::uint32_t image) const { return bows_.at(image); }
  [[nodiscard]] std::size_t training_count() const noexcept { return trainings_; }

  void commit() override;
  // Scores every indexed image against a histogram; zero scores included.
  [[nodiscard]] std::vector<double> score_all(const BowVector& query) const;

 protected:
  void on_insert(std::uint32_t image, std::uint32_t first, std::uint32_t count) override;
  QueryResult run_query(const ImageRecord& image, std::uint32_t max_distance) const override;

 private:
  void retrain();
  void index_image(std::uint32_t image);

  BofConfig config_;
  std::optional<Vocabulary> vocab_;
  std::vector<BowVector> bows_;
  // word -> (image, weight), images ascending.
  std::vector<std::vector<std::pair<std::uint32_t, double>>> inverted_;
  std::uint32_t since_training_ = 0;
  std::size_t trainings_ = 0;
};

}  // namespace cuedesc
