#pragma once

// Hierarchical vocabulary of binary visual words.
//
// Built by recursive k-majority clustering: k centroids seeded by sampling
// distinct training descriptors, assignment by Hamming distance (ties to the
// lowest centroid), centroid update by per-bit majority vote (equal counts
// give 0), repeated until the assignment is stable or the iteration cap is
// hit. Each cluster is clustered again until depth L; the leaves are words.

#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "cuedesc/descriptor_store.hpp"

namespace cuedesc {

struct VocabularyParams {
  std::uint32_t branching = 10;  // k
  std::uint32_t depth = 3;       // L
  std::uint64_t seed = 0x5eed;
  std::uint32_t max_iterations = 25;

  void validate() const;
};

// Sparse word histogram: (word id, weight) sorted by word id.
struct BowVector {
  std::vector<std::pair<std::uint32_t, double>> entries;

  [[nodiscard]] bool empty() const noexcept { return entries.empty(); }
  [[nodiscard]] double weight(std::uint32_t word) const noexcept;
  friend bool operator==(const BowVector&, const BowVector&) = default;
};

// Similarity of two L1-normalized vectors: 1 - |a - b|_1 / 2, in [0, 1].
// Computed as the sum over shared words of min(a_w, b_w).
[[nodiscard]] double l1_score(const BowVector& a, const BowVector& b);

struct KMajorityResult {
  std::vector<std::vector<std::uint64_t>> centroids;  // packed words each
  std::vector<std::uint32_t> assignment;              // parallel to the input ids
  // Sum of distances to the assigned centroid after each assignment step.
  std::vector<std::uint64_t> cost_history;
  std::uint32_t iterations = 0;
};

// One level of clustering over the given descriptor ids.
// Requires ids.size() >= k >= 2.
[[nodiscard]] KMajorityResult k_majority(const DescriptorStore& store, std::span<const std::uint32_t> ids,
                                         std::uint32_t k, std::mt19937_64& rng, std::uint32_t max_iterations);

class Vocabulary {
 public:
  static constexpr std::int32_t kInner = -1;

  struct Node {
    std::vector<std::uint64_t> centroid;  // empty for the root
    std::uint32_t first_child = 0;        // children are contiguous
    std::uint32_t child_count = 0;
    std::int32_t word = kInner;
    friend bool operator==(const Node&, const Node&) = default;
  };

  // document_of[i] names the training image of descriptor i and decides the
  // idf weights log(N / n_w); words never seen in training get weight 0.
  // Throws std::invalid_argument when fewer than k descriptors are given.
  static Vocabulary train(const DescriptorStore& store, std::span<const std::uint32_t> document_of,
                          const VocabularyParams& params);
  static Vocabulary train(std::span<const std::vector<BinaryDescriptor>> documents, const VocabularyParams& params);

  [[nodiscard]] std::size_t descriptor_bits() const noexcept { return bits_; }
  [[nodiscard]] std::uint32_t branching() const noexcept { return k_; }
  [[nodiscard]] std::uint32_t depth() const noexcept { return depth_; }
  [[nodiscard]] std::size_t word_count() const noexcept { return idf_.size(); }
  [[nodiscard]] const std::vector<Node>& nodes() const noexcept { return nodes_; }
  [[nodiscard]] const std::vector<double>& idf() const noexcept { return idf_; }

  // Greedy descent: nearest child at every level, ties to the lowest child.
  [[nodiscard]] std::uint32_t word_of(const std::uint64_t* words) const;
  [[nodiscard]] std::uint32_t word_of(const BinaryDescriptor& d) const;

  // idf-weighted word counts, L1-normalized (empty if every weight is zero).
  [[nodiscard]] BowVector transform(const DescriptorStore& store, std::uint32_t first, std::uint32_t count) const;
  [[nodiscard]] BowVector transform(std::span<const BinaryDescriptor> descriptors) const;

  // Versioned binary format: magic "CDVC", u32 version, u32 k, u32 L,
  // u32 descriptor bits, u32 node count, per node (i32 word, u32 first child,
  // u32 child count, u8 has-centroid, centroid in descriptor serialization),
  // u32 word count, f64 idf per word. Little-endian throughout.
  [[nodiscard]] std::vector<std::uint8_t> to_bytes() const;
  // Throws FormatError.
  static Vocabulary from_bytes(std::span<const std::uint8_t> bytes);
  void save(const std::filesystem::path& path) const;
  static Vocabulary load(const std::filesystem::path& path);

  friend bool operator==(const Vocabulary&, const Vocabulary&) = default;

 private:
  Vocabulary() = default;
  void grow(const DescriptorStore& store, std::uint32_t node, std::vector<std::uint32_t> ids, std::uint32_t level,
            std::mt19937_64& rng, std::uint32_t max_iterations);

  std::size_t bits_ = 0;
  std::uint32_t k_ = 0;
  std::uint32_t depth_ = 0;
  std::vector<Node> nodes_;
  std::vector<double> idf_;
};

}  // namespace cuedesc
