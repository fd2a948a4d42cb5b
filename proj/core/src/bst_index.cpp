#include "cuedesc/bst_index.hpp"

#include <bit>
#include <cstdlib>
#include <functional>

namespace cuedesc {

BstIndex::BstIndex(std::size_t descriptor_bits, BstConfig config)
    : NearestNeighborIndex(descriptor_bits), config_(config) {
  if (config_.max_leaf_size && *config_.max_leaf_size == 0) {
    throw std::invalid_argument("bst.max_leaf_size must be >= 1");
  }
  nodes_.emplace_back();
}

void BstIndex::on_insert(std::uint32_t, std::uint32_t first, std::uint32_t count) {
  for (std::uint32_t id = first; id < first + count; ++id) insert_descriptor(id);
}

void BstIndex::insert_descriptor(std::uint32_t id) {
  std::vector<bool> tested(descriptor_bits(), false);
  std::uint32_t node = 0;
  while (nodes_[node].split_bit != kLeaf) {
    const auto bit = static_cast<std::size_t>(nodes_[node].split_bit);
    tested[bit] = true;
    node = nodes_[node].child[store().test(id, bit) ? 1 : 0];
  }
  auto& leaf = nodes_[node];
  if (leaf.unsplittable) {
    // Every untested bit was constant over the bucket; the newcomer makes a
    // split possible iff it differs from the bucket on one of them.
    const auto* a = store().row(leaf.bucket.front());
    const auto* b = store().row(id);
    for (std::size_t bit = 0; bit < descriptor_bits(); ++bit) {
      if (!tested[bit] && (((a[bit / kWordBits] ^ b[bit / kWordBits]) >> (bit % kWordBits)) & 1U)) {
        leaf.unsplittable = false;
        break;
      }
    }
  }
  leaf.bucket.push_back(id);
  if (config_.max_leaf_size && leaf.bucket.size() > *config_.max_leaf_size && !leaf.unsplittable) {
    if (!split(node, tested)) nodes_[node].unsplittable = true;
  }
}

bool BstIndex::split(std::uint32_t node, const std::vector<bool>& tested) {
  const std::size_t bits = descriptor_bits();
  const auto& bucket = nodes_[node].bucket;
  const auto n = static_cast<std::int64_t>(bucket.size());
  std::vector<std::int64_t> ones(bits, 0);
  for (auto id : bucket) {
    const auto* row = store().row(id);
    for (std::size_t w = 0; w < store().words_per_descriptor(); ++w) {
      for (auto word = row[w]; word != 0; word &= word - 1) ++ones[w * kWordBits + std::countr_zero(word)];
    }
  }
  // Balance |2 * ones - n| is minimal when the set fraction is closest to 1/2.
  std::int64_t best_balance = n;
  std::int32_t best_bit = kLeaf;
  for (std::size_t bit = 0; bit < bits; ++bit) {
    if (tested[bit] || ones[bit] == 0 || ones[bit] == n) continue;
    const auto balance = std::llabs(2 * ones[bit] - n);
    if (balance < best_balance) {
      best_balance = balance;
      best_bit = static_cast<std::int32_t>(bit);
    }
  }
  if (best_bit == kLeaf) return false;

  Node zero;
  Node one;
  for (auto id : bucket) (store().test(id, static_cast<std::size_t>(best_bit)) ? one : zero).bucket.push_back(id);
  const auto zero_index = static_cast<std::uint32_t>(nodes_.size());
  nodes_.push_back(std::move(zero));
  nodes_.push_back(std::move(one));
  auto& parent = nodes_[node];
  parent.split_bit = best_bit;
  parent.child[0] = zero_index;
  parent.child[1] = zero_index + 1;
  parent.bucket.clear();
  parent.bucket.shrink_to_fit();

  // A child can only still overflow when max_leaf_size shrank below a bucket
  // that was already oversized; split it further.
  auto child_tested = tested;
  child_tested[static_cast<std::size_t>(best_bit)] = true;
  for (std::uint32_t c : {zero_index, zero_index + 1}) {
    if (nodes_[c].bucket.size() > *config_.max_leaf_size && !split(c, child_tested)) nodes_[c].unsplittable = true;
  }
  return true;
}

std::optional<Neighbor> BstIndex::nearest(const std::uint64_t* query, std::uint32_t max_distance) const {
  std::uint32_t node = 0;
  while (nodes_[node].split_bit != kLeaf) {
    const auto bit = static_cast<std::size_t>(nodes_[node].split_bit);
    node = nodes_[node].child[(query[bit / kWordBits] >> (bit % kWordBits)) & 1U];
  }
  return scan_nearest(store(), nodes_[node].bucket, query, max_distance);
}

std::size_t BstIndex::leaf_count() const noexcept {
  std::size_t n = 0;
  for (const auto& node : nodes_) n += node.split_bit == kLeaf ? 1 : 0;
  return n;
}

std::size_t BstIndex::depth() const noexcept {
  std::function<std::size_t(std::uint32_t)> walk = [&](std::uint32_t node) -> std::size_t {
    if (nodes_[node].split_bit == kLeaf) return 0;
    return 1 + std::max(walk(nodes_[node].child[0]), walk(nodes_[node].child[1]));
  };
  return walk(0);
}

}  // namespace cuedesc
