#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "cuedesc/search_index.hpp"

namespace cuedesc {

struct BstConfig {
  // nullopt: never split (single leaf).
  std::optional<std::size_t> max_leaf_size = 100;
};

// Hamming binary search tree. Inner nodes route a descriptor by one bit;
// leaves hold buckets of descriptor ids. An overflowing leaf splits on the
// untested bit whose set fraction among the bucket is closest to one half
// (ties to the lowest bit index). Queries descend a single path, without
// backtracking, and search only the leaf they reach.
class BstIndex final : public NearestNeighborIndex {
 public:
  static constexpr std::int32_t kLeaf = -1;

  struct Node {
    std::int32_t split_bit = kLeaf;
    std::uint32_t child[2] = {0, 0};
    std::vector<std::uint32_t> bucket;
    // Set when no untested bit separates the bucket; cleared when a new
    // descriptor makes a split possible.
    bool unsplittable = false;
  };

  BstIndex(std::size_t descriptor_bits, BstConfig config);

  [[nodiscard]] std::string_view name() const noexcept override { return "bst"; }
  [[nodiscard]] const BstConfig& config() const noexcept { return config_; }
  [[nodiscard]] const std::vector<Node>& nodes() const noexcept { return nodes_; }
  [[nodiscard]] std::size_t leaf_count() const noexcept;
  [[nodiscard]] std::size_t depth() const noexcept;

  [[nodiscard]] std::optional<Neighbor> nearest(const std::uint64_t* query,
                                                std::uint32_t max_distance) const override;

 protected:
  void on_insert(std::uint32_t image, std::uint32_t first, std::uint32_t count) override;

 private:
  void insert_descriptor(std::uint32_t id);
  // Returns false if no untested bit separates the bucket.
  bool split(std::uint32_t node, const std::vector<bool>& tested);

  BstConfig config_;
  std::vector<Node> nodes_;
};

}  // namespace cuedesc
