#include "cuedesc/bf_index.hpp"

#include <algorithm>
#include <array>
#include <bit>

namespace cuedesc {

namespace {

constexpr std::uint32_t kTile = 8192;
constexpr std::uint32_t kChunk = 256;

}  // namespace

void BruteForceIndex::on_insert(std::uint32_t, std::uint32_t first, std::uint32_t count) {
  const auto& s = store();
  for (std::uint32_t id = first; id < first + count; ++id) {
    lead0_.push_back(s.row(id)[0]);
    if (s.words_per_descriptor() > 1) lead1_.push_back(s.row(id)[1]);
  }
}

std::optional<Neighbor> BruteForceIndex::nearest(const std::uint64_t* query, std::uint32_t max_distance) const {
  return scan_nearest_range(store(), 0, static_cast<std::uint32_t>(store().size()), query, max_distance);
}

std::vector<std::optional<Neighbor>> BruteForceIndex::nearest_all(const ImageRecord& image,
                                                                  std::uint32_t max_distance) const {
  const auto& s = store();
  const std::size_t words = s.words_per_descriptor();
  const std::size_t n = image.descriptors.size();
  std::vector<std::optional<Neighbor>> best(n);
  if (s.empty()) return best;

  // Per query: the bound any later candidate must meet, and whether an exact
  // duplicate already ended its search.
  std::vector<std::uint32_t> bound(n, max_distance);
  std::vector<char> done(n, 0);
  std::array<std::uint32_t, kChunk> prefix{};
  const auto total = static_cast<std::uint32_t>(s.size());
  const bool two = words > 1;

  for (std::uint32_t tile = 0; tile < total; tile += std::min(kTile, total - tile)) {
    const std::uint32_t tile_end = tile + std::min(kTile, total - tile);
    for (std::size_t q = 0; q < n; ++q) {
      if (done[q]) continue;
      const std::uint64_t* query = image.descriptors[q].words().data();
      const std::uint64_t q0 = query[0];
      const std::uint64_t q1 = two ? query[1] : 0;
      std::uint32_t b = bound[q];
      for (std::uint32_t chunk = tile; chunk < tile_end && !done[q]; chunk += kChunk) {
        const std::uint32_t len = std::min(kChunk, tile_end - chunk);
        const std::uint64_t* l0 = lead0_.data() + chunk;
        if (two) {
          const std::uint64_t* l1 = lead1_.data() + chunk;
          for (std::uint32_t i = 0; i < len; ++i) {
            prefix[i] = static_cast<std::uint32_t>(std::popcount(q0 ^ l0[i]) + std::popcount(q1 ^ l1[i]));
          }
        } else {
          for (std::uint32_t i = 0; i < len; ++i) prefix[i] = static_cast<std::uint32_t>(std::popcount(q0 ^ l0[i]));
        }
        for (std::uint32_t i = 0; i < len; ++i) {
          if (prefix[i] > b) continue;
          const std::uint32_t id = chunk + i;
          const auto d = hamming_words_bounded(query, s.row(id), words, b);
          if (d <= b) {
            best[q] = Neighbor{id, d};
            if (d == 0) {
              done[q] = 1;
              break;
            }
            b = d - 1;
          }
        }
      }
      bound[q] = b;
    }
  }
  return best;
}

}  // namespace cuedesc
