#pragma once

#include <vector>

#include "cuedesc/search_index.hpp"

namespace cuedesc {

// Exhaustive matcher: every query descriptor is compared with every stored
// descriptor. Exact, and the reference the approximate backends are
// measured against.
class BruteForceIndex final : public NearestNeighborIndex {
 public:
  using NearestNeighborIndex::NearestNeighborIndex;

  [[nodiscard]] std::string_view name() const noexcept override { return "bf"; }
  [[nodiscard]] std::optional<Neighbor> nearest(const std::uint64_t* query,
                                                std::uint32_t max_distance) const override;
  // Walks the store in cache-sized tiles, comparing each tile with all query
  // descriptors before moving on, and rejects most candidates on the first
  // one or two words alone. Same results as nearest() per descriptor.
  [[nodiscard]] std::vector<std::optional<Neighbor>> nearest_all(const ImageRecord& image,
                                                                 std::uint32_t max_distance) const override;

 protected:
  void on_insert(std::uint32_t image, std::uint32_t first, std::uint32_t count) override;

 private:
  // Leading words of every stored descriptor, one array per word, so the
  // prefilter runs over contiguous memory.
  std::vector<std::uint64_t> lead0_;
  std::vector<std::uint64_t> lead1_;
};

}  // namespace cuedesc
