#include "cuedesc/bof_index.hpp"

#include <algorithm>

namespace cuedesc {

void BofConfig::validate() const {
  vocabulary.validate();
  if (top_n == 0) throw std::invalid_argument("bof.top_n must be >= 1");
  if (retrain_every == 0) throw std::invalid_argument("bof.retrain_every must be >= 1");
}

BofIndex::BofIndex(std::size_t descriptor_bits, BofConfig config)
    : SearchIndex(descriptor_bits), config_(config) {
  config_.validate();
}

void BofIndex::on_insert(std::uint32_t image, std::uint32_t, std::uint32_t) {
  bows_.emplace_back();
  ++since_training_;
  const bool first_training = !vocab_ && store().size() >= config_.vocabulary.branching;
  if (first_training || (vocab_ && since_training_ >= config_.retrain_every)) {
    retrain();
  } else if (vocab_) {
    index_image(image);
  }
}

void BofIndex::commit() {
  if (since_training_ > 0 && store().size() >= config_.vocabulary.branching) retrain();
}

void BofIndex::retrain() {
  std::vector<std::uint32_t> document_of(store().size());
  for (std::uint32_t id = 0; id < document_of.size(); ++id) document_of[id] = image_of(id);
  vocab_ = Vocabulary::train(store(), document_of, config_.vocabulary);
  ++trainings_;
  since_training_ = 0;
  inverted_.assign(vocab_->word_count(), {});
  for (std::uint32_t image = 0; image < image_count(); ++image) index_image(image);
}

void BofIndex::index_image(std::uint32_t image) {
  const auto [first, count] = descriptor_range(image);
  bows_[image] = vocab_->transform(store(), first, count);
  for (const auto& [word, weight] : bows_[image].entries) inverted_[word].emplace_back(image, weight);
}

std::vector<double> BofIndex::score_all(const BowVector& query) const {
  std::vector<double> scores(image_count(), 0.0);
  for (const auto& [word, q] : query.entries) {
    for (const auto& [image, w] : inverted_[word]) scores[image] += std::min(q, w);
  }
  return scores;
}

QueryResult BofIndex::run_query(const ImageRecord& image, std::uint32_t max_distance) const {
  QueryResult result;
  if (!vocab_) return result;
  const auto scores = score_all(vocab_->transform(image.descriptors));
  for (std::uint32_t i = 0; i < scores.size(); ++i) {
    if (scores[i] > 0.0) result.ranking.push_back({i, scores[i]});
  }
  std::stable_sort(result.ranking.begin(), result.ranking.end(),
                   [](const ScoredImage& a, const ScoredImage& b) { return a.score > b.score; });
  if (result.ranking.size() > config_.top_n) result.ranking.resize(config_.top_n);

  // Candidate ids in ascending order so ties resolve to the lowest id.
  std::vector<std::uint32_t> candidates;
  std::vector<std::uint32_t> top;
  for (const auto& s : result.ranking) top.push_back(s.image);
  std::sort(top.begin(), top.end());
  for (auto img : top) {
    const auto [first, count] = descriptor_range(img);
    for (std::uint32_t id = first; id < first + count; ++id) candidates.push_back(id);
  }
  for (std::size_t q = 0; q < image.descriptors.size(); ++q) {
    const auto best = scan_nearest(store(), candidates, image.descriptors[q].words().data(), max_distance);
    if (best) {
      result.matches.push_back({static_cast<std::uint32_t>(q), best->id, image_of(best->id), best->distance});
    }
  }
  return result;
}

}  // namespace cuedesc
