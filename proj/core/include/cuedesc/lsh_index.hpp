#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "cuedesc/search_index.hpp"

namespace cuedesc {

struct LshConfig {
  std::uint32_t table_count = 4;
  std::uint32_t key_bits = 12;  // at most 64 and at most the descriptor length
  std::uint32_t probe_radius = 1;
  std::uint64_t seed = 0x5eed;

  // Throws std::invalid_argument.
  void validate(std::size_t descriptor_bits) const;
};

// Multi-probe Hamming LSH. Each table keys descriptors by a random subset of
// key_bits bit positions; a query probes every bucket whose key differs from
// its own in at most probe_radius positions, in every table, and the union
// of those buckets is searched exhaustively.
class LshIndex final : public NearestNeighborIndex {
 public:
  LshIndex(std::size_t descriptor_bits, LshConfig config);

  [[nodiscard]] std::string_view name() const noexcept override { return "lsh"; }
  [[nodiscard]] const LshConfig& config() const noexcept { return config_; }
  // Sampled bit positions of one table.
  [[nodiscard]] const std::vector<std::uint32_t>& table_bits(std::size_t table) const { return bits_.at(table); }

  [[nodiscard]] std::optional<Neighbor> nearest(const std::uint64_t* query,
                                                std::uint32_t max_distance) const override;
  // Sorted, de-duplicated candidate ids probed for one query.
  [[nodiscard]] std::vector<std::uint32_t> candidates(const std::uint64_t* query) const;

 protected:
  void on_insert(std::uint32_t image, std::uint32_t first, std::uint32_t count) override;

 private:
  [[nodiscard]] std::uint64_t key(std::size_t table, const std::uint64_t* words) const noexcept;

  LshConfig config_;
  std::vector<std::vector<std::uint32_t>> bits_;
  // Buckets keep insertion order.
  std::vector<std::unordered_map<std::uint64_t, std::vector<std::uint32_t>>> tables_;
};

}  // namespace cuedesc
