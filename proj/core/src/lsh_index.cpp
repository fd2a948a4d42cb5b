#include "cuedesc/lsh_index.hpp"

#include <algorithm>
#include <bit>
#include <numeric>
#include <random>
#include <string>

namespace cuedesc {

namespace {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Number of keys within Hamming radius r of a key_bits-bit key, saturating.
std::uint64_t probe_count(std::uint32_t key_bits, std::uint32_t r) {
  std::uint64_t total = 0;
  std::uint64_t binom = 1;
  for (std::uint32_t i = 0; i <= std::min(r, key_bits); ++i) {
    if (i > 0) binom = binom * (key_bits - i + 1) / i;
    total += binom;
    if (total > (std::uint64_t{1} << 40)) return total;
  }
  return total;
}

template <class Fn>
void for_each_key_within(std::uint64_t key, std::uint32_t key_bits, std::uint32_t radius, std::uint32_t start,
                         Fn&& fn) {
  fn(key);
  if (radius == 0) return;
  for (std::uint32_t b = start; b < key_bits; ++b) {
    for_each_key_within(key ^ (std::uint64_t{1} << b), key_bits, radius - 1, b + 1, fn);
  }
}

}  // namespace

void LshConfig::validate(std::size_t descriptor_bits) const {
  if (table_count == 0) throw std::invalid_argument("lsh.table_count must be >= 1");
  if (key_bits == 0 || key_bits > 64) throw std::invalid_argument("lsh.key_bits must be in [1, 64]");
  if (key_bits > descriptor_bits) {
    throw std::invalid_argument("lsh.key_bits (" + std::to_string(key_bits) + ") exceeds descriptor length " +
                                std::to_string(descriptor_bits));
  }
}

LshIndex::LshIndex(std::size_t descriptor_bits, LshConfig config)
    : NearestNeighborIndex(descriptor_bits), config_(config), tables_(config.table_count) {
  config_.validate(descriptor_bits);
  std::vector<std::uint32_t> positions(descriptor_bits);
  for (std::uint32_t t = 0; t < config_.table_count; ++t) {
    // Each table draws from its own seed stream.
    std::mt19937_64 rng(splitmix64(config_.seed + t));
    std::iota(positions.begin(), positions.end(), 0U);
    for (std::uint32_t i = 0; i < config_.key_bits; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, positions.size() - 1);
      std::swap(positions[i], positions[pick(rng)]);
    }
    bits_.emplace_back(positions.begin(), positions.begin() + config_.key_bits);
  }
}

std::uint64_t LshIndex::key(std::size_t table, const std::uint64_t* words) const noexcept {
  std::uint64_t k = 0;
  const auto& bits = bits_[table];
  for (std::size_t i = 0; i < bits.size(); ++i) {
    k |= ((words[bits[i] / kWordBits] >> (bits[i] % kWordBits)) & 1U) << i;
  }
  return k;
}

void LshIndex::on_insert(std::uint32_t, std::uint32_t first, std::uint32_t count) {
  for (std::uint32_t id = first; id < first + count; ++id) {
    for (std::size_t t = 0; t < tables_.size(); ++t) tables_[t][key(t, store().row(id))].push_back(id);
  }
}

std::vector<std::uint32_t> LshIndex::candidates(const std::uint64_t* query) const {
  std::vector<std::uint32_t> out;
  const std::uint64_t probes = probe_count(config_.key_bits, config_.probe_radius);
  for (std::size_t t = 0; t < tables_.size(); ++t) {
    const auto& table = tables_[t];
    const std::uint64_t qkey = key(t, query);
    if (probes <= table.size()) {
      for_each_key_within(qkey, config_.key_bits, config_.probe_radius, 0, [&](std::uint64_t k) {
        if (auto it = table.find(k); it != table.end()) out.insert(out.end(), it->second.begin(), it->second.end());
      });
    } else {
      // Fewer occupied buckets than probe keys: test each bucket instead.
      for (const auto& [k, ids] : table) {
        if (static_cast<std::uint32_t>(std::popcount(k ^ qkey)) <= config_.probe_radius) {
          out.insert(out.end(), ids.begin(), ids.end());
        }
      }
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::optional<Neighbor> LshIndex::nearest(const std::uint64_t* query, std::uint32_t max_distance) const {
  const auto ids = candidates(query);
  return scan_nearest(store(), ids, query, max_distance);
}

}  // namespace cuedesc
