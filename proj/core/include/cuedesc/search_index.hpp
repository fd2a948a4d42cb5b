#pragma once

// Common contract of the similarity-search backends.
//
// Images are inserted whole and receive dense handles in insertion order;
// descriptors receive dense ids in insertion order. Ties are always broken
// towards the lowest handle or id, so results are deterministic.
//
// Threading: query() is const and touches no mutable state, so any number
// of queries may run concurrently. insert() and commit() need exclusive access.

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cuedesc/descriptor_store.hpp"
#include "cuedesc/image.hpp"

namespace cuedesc {

struct MatchResult {
  std::uint32_t query_descriptor = 0;
  std::uint32_t reference_descriptor = 0;
  std::uint32_t reference_image = 0;
  std::uint32_t distance = 0;
  friend bool operator==(const MatchResult&, const MatchResult&) = default;
};

struct ScoredImage {
  std::uint32_t image = 0;
  double score = 0.0;
  friend bool operator==(const ScoredImage&, const ScoredImage&) = default;
};

struct QueryResult {
  // Descending score, ties by lowest handle. Images scoring zero are omitted.
  std::vector<ScoredImage> ranking;
  std::vector<MatchResult> matches;
  std::chrono::nanoseconds elapsed{0};
};

class DuplicateImage : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Largest integer distance admitted by a real threshold tau (distance <= tau).
// Throws std::invalid_argument for negative or NaN tau.
[[nodiscard]] std::uint32_t max_distance_for(double tau);

class SearchIndex {
 public:
  explicit SearchIndex(std::size_t descriptor_bits);
  virtual ~SearchIndex() = default;
  SearchIndex(const SearchIndex&) = delete;
  SearchIndex& operator=(const SearchIndex&) = delete;

  [[nodiscard]] virtual std::string_view name() const noexcept = 0;

  // Throws IncompatibleDescriptors on a length mismatch and DuplicateImage
  // for an id already present; the index is unchanged on failure.
  void insert(const ImageRecord& image);
  // Finishes pending work after a batch of inserts (e.g. vocabulary training).
  virtual void commit() {}
  // Empty index gives an empty result.
  [[nodiscard]] QueryResult query(const ImageRecord& image, double tau) const;

  [[nodiscard]] std::size_t descriptor_bits() const noexcept { return store_.descriptor_bits(); }
  [[nodiscard]] std::size_t image_count() const noexcept { return image_ids_.size(); }
  [[nodiscard]] std::size_t descriptor_count() const noexcept { return store_.size(); }
  [[nodiscard]] const std::string& image_id(std::uint32_t handle) const { return image_ids_.at(handle); }
  [[nodiscard]] std::optional<std::uint32_t> find_image(const std::string& id) const;
  [[nodiscard]] std::uint32_t image_of(std::uint32_t descriptor) const { return image_of_.at(descriptor); }
  [[nodiscard]] const DescriptorStore& store() const noexcept { return store_; }

 protected:
  // Called after the descriptors are in store(); ids are [first, first + count).
  virtual void on_insert(std::uint32_t image, std::uint32_t first, std::uint32_t count) = 0;
  virtual QueryResult run_query(const ImageRecord& image, std::uint32_t max_distance) const = 0;

  // Image handle -> first descriptor id and count.
  [[nodiscard]] std::pair<std::uint32_t, std::uint32_t> descriptor_range(std::uint32_t image) const {
    return ranges_.at(image);
  }

 private:
  DescriptorStore store_;
  std::vector<std::string> image_ids_;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> ranges_;
  std::vector<std::uint32_t> image_of_;
  std::unordered_map<std::string, std::uint32_t> handles_;
};

struct Neighbor {
  std::uint32_t id = 0;
  std::uint32_t distance = 0;
};

// Backends that answer each query descriptor with one nearest neighbour and
// score images by their match count.
class NearestNeighborIndex : public SearchIndex {
 public:
  using SearchIndex::SearchIndex;

  // Best stored descriptor within max_distance, ties to the lowest id.
  [[nodiscard]] virtual std::optional<Neighbor> nearest(const std::uint64_t* query,
                                                        std::uint32_t max_distance) const = 0;
  // nearest() for every descriptor of an image. Overridable by backends
  // that can share work across the descriptors.
  [[nodiscard]] virtual std::vector<std::optional<Neighbor>> nearest_all(const ImageRecord& image,
                                                                         std::uint32_t max_distance) const;

 protected:
  QueryResult run_query(const ImageRecord& image, std::uint32_t max_distance) const override;
};

// Vote ranking shared by the nearest-neighbour backends.
[[nodiscard]] std::vector<ScoredImage> rank_by_match_count(std::span<const MatchResult> matches);

// Exhaustive scan of the given descriptor ids (ascending) for the nearest
// neighbour within max_distance.
[[nodiscard]] std::optional<Neighbor> scan_nearest(const DescriptorStore& store, std::span<const std::uint32_t> ids,
                                                   const std::uint64_t* query, std::uint32_t max_distance);
// Same over the contiguous id range [first, last).
[[nodiscard]] std::optional<Neighbor> scan_nearest_range(const DescriptorStore& store, std::uint32_t first,
                                                         std::uint32_t last, const std::uint64_t* query,
                                                         std::uint32_t max_distance);

}  // namespace cuedesc
