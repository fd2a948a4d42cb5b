#include "cuedesc/search_index.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace cuedesc {

std::uint32_t max_distance_for(double tau) {
  if (std::isnan(tau) || tau < 0.0) throw std::invalid_argument("match threshold tau must be >= 0");
  if (tau >= static_cast<double>(std::numeric_limits<std::uint32_t>::max())) {
    return std::numeric_limits<std::uint32_t>::max() - 1;
  }
  return static_cast<std::uint32_t>(std::floor(tau));
}

SearchIndex::SearchIndex(std::size_t descriptor_bits) : store_(descriptor_bits) {}

void SearchIndex::insert(const ImageRecord& image) {
  if (handles_.contains(image.image_id)) throw DuplicateImage("image '" + image.image_id + "' already indexed");
  for (const auto& d : image.descriptors) {
    if (d.size() != store_.descriptor_bits()) {
      throw IncompatibleDescriptors("image '" + image.image_id + "' has " + std::to_string(d.size()) +
                                    "-bit descriptors, index expects " +
                                    std::to_string(store_.descriptor_bits()));
    }
  }
  const auto handle = static_cast<std::uint32_t>(image_ids_.size());
  const auto first = static_cast<std::uint32_t>(store_.size());
  const auto count = static_cast<std::uint32_t>(image.descriptors.size());
  store_.reserve(store_.size() + count);
  for (const auto& d : image.descriptors) store_.push(d);
  image_of_.insert(image_of_.end(), count, handle);
  image_ids_.push_back(image.image_id);
  ranges_.emplace_back(first, count);
  handles_.emplace(image.image_id, handle);
  on_insert(handle, first, count);
}

QueryResult SearchIndex::query(const ImageRecord& image, double tau) const {
  const auto max_distance = max_distance_for(tau);
  for (const auto& d : image.descriptors) {
    if (d.size() != store_.descriptor_bits()) {
      throw IncompatibleDescriptors("query '" + image.image_id + "' has " + std::to_string(d.size()) +
                                    "-bit descriptors, index expects " +
                                    std::to_string(store_.descriptor_bits()));
    }
  }
  const auto start = std::chrono::steady_clock::now();
  QueryResult result;
  if (!store_.empty() || image_count() > 0) result = run_query(image, max_distance);
  result.elapsed = std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - start);
  return result;
}

std::optional<std::uint32_t> SearchIndex::find_image(const std::string& id) const {
  if (auto it = handles_.find(id); it != handles_.end()) return it->second;
  return std::nullopt;
}

std::vector<ScoredImage> rank_by_match_count(std::span<const MatchResult> matches) {
  std::map<std::uint32_t, std::uint32_t> votes;
  for (const auto& m : matches) ++votes[m.reference_image];
  std::vector<ScoredImage> ranking;
  ranking.reserve(votes.size());
  for (auto [image, count] : votes) ranking.push_back({image, static_cast<double>(count)});
  // votes is ordered by handle, so a stable sort keeps ties lowest-first.
  std::stable_sort(ranking.begin(), ranking.end(),
                   [](const ScoredImage& a, const ScoredImage& b) { return a.score > b.score; });
  return ranking;
}

QueryResult NearestNeighborIndex::run_query(const ImageRecord& image, std::uint32_t max_distance) const {
  QueryResult result;
  if (store().empty()) return result;
  const auto neighbors = nearest_all(image, max_distance);
  for (std::size_t q = 0; q < neighbors.size(); ++q) {
    if (const auto& best = neighbors[q]) {
      result.matches.push_back(
          {static_cast<std::uint32_t>(q), best->id, image_of(best->id), best->distance});
    }
  }
  result.ranking = rank_by_match_count(result.matches);
  return result;
}

std::vector<std::optional<Neighbor>> NearestNeighborIndex::nearest_all(const ImageRecord& image,
                                                                       std::uint32_t max_distance) const {
  std::vector<std::optional<Neighbor>> out;
  out.reserve(image.descriptors.size());
  for (const auto& d : image.descriptors) out.push_back(nearest(d.words().data(), max_distance));
  return out;
}

std::optional<Neighbor> scan_nearest(const DescriptorStore& store, std::span<const std::uint32_t> ids,
                                     const std::uint64_t* query, std::uint32_t max_distance) {
  const std::size_t words = store.words_per_descriptor();
  // Only strictly smaller distances replace the incumbent, so the lowest id
  // wins ties as long as ids ascend.
  std::uint32_t bound = max_distance;
  std::optional<Neighbor> best;
  for (auto id : ids) {
    const auto d = hamming_words_bounded(query, store.row(id), words, bound);
    if (d <= bound) {
      best = Neighbor{id, d};
      if (d == 0) break;
      bound = d - 1;
    }
  }
  return best;
}

std::optional<Neighbor> scan_nearest_range(const DescriptorStore& store, std::uint32_t first, std::uint32_t last,
                                           const std::uint64_t* query, std::uint32_t max_distance) {
  const std::size_t words = store.words_per_descriptor();
  std::uint32_t bound = max_distance;
  std::optional<Neighbor> best;
  for (std::uint32_t id = first; id < last; ++id) {
    const auto d = hamming_words_bounded(query, store.row(id), words, bound);
    if (d <= bound) {
      best = Neighbor{id, d};
      if (d == 0) break;
      bound = d - 1;
    }
  }
  return best;
}

}  // namespace cuedesc
