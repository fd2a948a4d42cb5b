#include "cuedesc/vocabulary.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <numeric>
#include <set>
#include <string>

namespace cuedesc {

namespace {

constexpr char kMagic[4] = {'C', 'D', 'V', 'C'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f64(std::vector<std::uint8_t>& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t{bytes_[pos_ + i]} << (8 * i);
    pos_ += 4;
    return v;
  }
  std::uint8_t u8() {
    need(1);
    return bytes_[pos_++];
  }
  double f64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t{bytes_[pos_ + i]} << (8 * i);
    pos_ += 8;
    return std::bit_cast<double>(v);
  }
  BinaryDescriptor descriptor() { return deserialize(bytes_, pos_); }
  void expect_magic() {
    need(4);
    if (std::memcmp(bytes_.data() + pos_, kMagic, 4) != 0) throw FormatError("not a vocabulary file (bad magic)");
    pos_ += 4;
  }
  [[nodiscard]] bool done() const noexcept { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw FormatError("truncated vocabulary data");
  }
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

std::uint32_t nearest_centroid(const std::uint64_t* row, const std::vector<std::vector<std::uint64_t>>& centroids,
                               std::size_t words, std::uint32_t* distance) {
  std::uint32_t best = 0;
  std::uint32_t best_distance = std::numeric_limits<std::uint32_t>::max();
  for (std::uint32_t c = 0; c < centroids.size(); ++c) {
    const auto d = hamming_words(row, centroids[c].data(), words);
    if (d < best_distance) {
      best_distance = d;
      best = c;
    }
  }
  if (distance) *distance = best_distance;
  return best;
}

}  // namespace

void VocabularyParams::validate() const {
  if (branching < 2) throw std::invalid_argument("vocabulary branching factor k must be >= 2");
  if (depth < 1) throw std::invalid_argument("vocabulary depth L must be >= 1");
  if (max_iterations < 1) throw std::invalid_argument("vocabulary max_iterations must be >= 1");
}

double BowVector::weight(std::uint32_t word) const noexcept {
  auto it = std::lower_bound(entries.begin(), entries.end(), word,
                             [](const auto& e, std::uint32_t w) { return e.first < w; });
  return it != entries.end() && it->first == word ? it->second : 0.0;
}

double l1_score(const BowVector& a, const BowVector& b) {
  double score = 0.0;
  auto i = a.entries.begin();
  auto j = b.entries.begin();
  while (i != a.entries.end() && j != b.entries.end()) {
    if (i->first < j->first) {
      ++i;
    } else if (j->first < i->first) {
      ++j;
    } else {
      score += std::min(i->second, j->second);
      ++i;
      ++j;
    }
  }
  return score;
}

KMajorityResult k_majority(const DescriptorStore& store, std::span<const std::uint32_t> ids, std::uint32_t k,
                           std::mt19937_64& rng, std::uint32_t max_iterations) {
  if (k < 2) throw std::invalid_argument("k-majority needs k >= 2");
  if (ids.size() < k) throw std::invalid_argument("k-majority needs at least k descriptors");
  const std::size_t words = store.words_per_descriptor();
  const std::size_t bits = store.descriptor_bits();

  KMajorityResult result;
  std::vector<std::size_t> order(ids.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::uint32_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, order.size() - 1);
    std::swap(order[i], order[pick(rng)]);
    const auto* row = store.row(ids[order[i]]);
    result.centroids.emplace_back(row, row + words);
  }

  result.assignment.assign(ids.size(), std::numeric_limits<std::uint32_t>::max());
  std::vector<std::uint32_t> ones(std::size_t{k} * bits);
  std::vector<std::uint32_t> members(k);
  for (std::uint32_t iter = 0; iter < max_iterations; ++iter) {
    bool changed = false;
    std::uint64_t cost = 0;
    for (std::size_t i = 0; i < ids.size(); ++i) {
      std::uint32_t d = 0;
      const auto c = nearest_centroid(store.row(ids[i]), result.centroids, words, &d);
      cost += d;
      if (c != result.assignment[i]) {
        result.assignment[i] = c;
        changed = true;
      }
    }
    result.cost_history.push_back(cost);
    result.iterations = iter + 1;
    if (!changed) break;

    std::fill(ones.begin(), ones.end(), 0U);
    std::fill(members.begin(), members.end(), 0U);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      const auto c = result.assignment[i];
      ++members[c];
      const auto* row = store.row(ids[i]);
      for (std::size_t w = 0; w < words; ++w) {
        for (auto word = row[w]; word != 0; word &= word - 1) {
          ++ones[c * bits + w * kWordBits + static_cast<std::size_t>(std::countr_zero(word))];
        }
      }
    }
    for (std::uint32_t c = 0; c < k; ++c) {
      if (members[c] == 0) continue;  // empty cluster keeps its centroid
      auto& centroid = result.centroids[c];
      std::fill(centroid.begin(), centroid.end(), 0);
      for (std::size_t bit = 0; bit < bits; ++bit) {
        // Strict majority sets the bit; a tie resolves to 0.
        if (2 * ones[c * bits + bit] > members[c]) centroid[bit / kWordBits] |= std::uint64_t{1} << (bit % kWordBits);
      }
    }
  }
  return result;
}

void Vocabulary::grow(const DescriptorStore& store, std::uint32_t node, std::vector<std::uint32_t> ids,
                      std::uint32_t level, std::mt19937_64& rng, std::uint32_t max_iterations) {
  const std::size_t words = store.words_per_descriptor();
  const auto identical = [&](std::uint32_t a, std::uint32_t b) {
    return std::equal(store.row(a), store.row(a) + words, store.row(b));
  };
  const bool uniform =
      std::all_of(ids.begin(), ids.end(), [&](std::uint32_t id) { return identical(id, ids.front()); });
  if (level == depth_ || ids.size() <= 1 || uniform) {
    nodes_[node].word = static_cast<std::int32_t>(idf_.size());
    idf_.push_back(0.0);
    return;
  }

  std::vector<std::vector<std::uint64_t>> centroids;
  std::vector<std::vector<std::uint32_t>> groups;
  if (ids.size() <= k_) {
    // Too few to cluster: every distinct descriptor is its own child.
    for (auto id : ids) {
      std::size_t g = 0;
      while (g < groups.size() && !identical(groups[g].front(), id)) ++g;
      if (g == groups.size()) {
        centroids.emplace_back(store.row(id), store.row(id) + words);
        groups.emplace_back();
      }
      groups[g].push_back(id);
    }
  } else {
    auto clusters = k_majority(store, ids, k_, rng, max_iterations);
    std::vector<std::vector<std::uint32_t>> members(k_);
    for (std::size_t i = 0; i < ids.size(); ++i) members[clusters.assignment[i]].push_back(ids[i]);
    for (std::uint32_t c = 0; c < k_; ++c) {
      if (members[c].empty()) continue;
      centroids.push_back(std::move(clusters.centroids[c]));
      groups.push_back(std::move(members[c]));
    }
  }

  const auto first = static_cast<std::uint32_t>(nodes_.size());
  nodes_[node].first_child = first;
  nodes_[node].child_count = static_cast<std::uint32_t>(groups.size());
  for (auto& centroid : centroids) nodes_.push_back(Node{std::move(centroid), 0, 0, kInner});
  ids.clear();
  ids.shrink_to_fit();
  for (std::uint32_t c = 0; c < groups.size(); ++c) {
    grow(store, first + c, std::move(groups[c]), level + 1, rng, max_iterations);
  }
}

Vocabulary Vocabulary::train(const DescriptorStore& store, std::span<const std::uint32_t> document_of,
                             const VocabularyParams& params) {
  params.validate();
  if (store.size() < params.branching) {
    throw std::invalid_argument("vocabulary training needs at least k = " + std::to_string(params.branching) +
                                " descriptors, got " + std::to_string(store.size()));
  }
  if (document_of.size() != store.size()) throw std::invalid_argument("document_of must cover every descriptor");

  Vocabulary vocab;
  vocab.bits_ = store.descriptor_bits();
  vocab.k_ = params.branching;
  vocab.depth_ = params.depth;
  vocab.nodes_.push_back(Node{});
  std::vector<std::uint32_t> ids(store.size());
  std::iota(ids.begin(), ids.end(), 0U);
  std::mt19937_64 rng(params.seed);
  vocab.grow(store, 0, std::move(ids), 0, rng, params.max_iterations);

  std::vector<std::set<std::uint32_t>> documents(vocab.idf_.size());
  std::set<std::uint32_t> all_documents(document_of.begin(), document_of.end());
  for (std::size_t i = 0; i < store.size(); ++i) documents[vocab.word_of(store.row(i))].insert(document_of[i]);
  const auto n = static_cast<double>(all_documents.size());
  for (std::size_t w = 0; w < documents.size(); ++w) {
    vocab.idf_[w] = documents[w].empty() ? 0.0 : std::log(n / static_cast<double>(documents[w].size()));
  }
  return vocab;
}

Vocabulary Vocabulary::train(std::span<const std::vector<BinaryDescriptor>> documents,
                             const VocabularyParams& params) {
  std::size_t bits = 0;
  for (const auto& doc : documents) {
    if (!doc.empty()) {
      bits = doc.front().size();
      break;
    }
  }
  if (bits == 0) throw std::invalid_argument("vocabulary training needs descriptors");
  DescriptorStore store(bits);
  std::vector<std::uint32_t> document_of;
  for (std::uint32_t d = 0; d < documents.size(); ++d) {
    for (const auto& desc : documents[d]) {
      store.push(desc);
      document_of.push_back(d);
    }
  }
  return train(store, document_of, params);
}

std::uint32_t Vocabulary::word_of(const std::uint64_t* words) const {
  const std::size_t nwords = words_for_bits(bits_);
  std::uint32_t node = 0;
  while (nodes_[node].word == kInner) {
    const auto& parent = nodes_[node];
    std::uint32_t best = parent.first_child;
    std::uint32_t best_distance = std::numeric_limits<std::uint32_t>::max();
    for (std::uint32_t c = parent.first_child; c < parent.first_child + parent.child_count; ++c) {
      const auto d = hamming_words(words, nodes_[c].centroid.data(), nwords);
      if (d < best_distance) {
        best_distance = d;
        best = c;
      }
    }
    node = best;
  }
  return static_cast<std::uint32_t>(nodes_[node].word);
}

std::uint32_t Vocabulary::word_of(const BinaryDescriptor& d) const {
  if (d.size() != bits_) throw IncompatibleDescriptors("descriptor length does not match the vocabulary");
  return word_of(d.words().data());
}

namespace {

BowVector weigh_and_normalize(std::vector<std::uint32_t>& words, const std::vector<double>& idf) {
  std::sort(words.begin(), words.end());
  BowVector bow;
  double total = 0.0;
  for (std::size_t i = 0; i < words.size();) {
    std::size_t j = i;
    while (j < words.size() && words[j] == words[i]) ++j;
    const double w = static_cast<double>(j - i) * idf[words[i]];
    if (w > 0.0) {
      bow.entries.emplace_back(words[i], w);
      total += w;
    }
    i = j;
  }
  for (auto& e : bow.entries) e.second /= total;
  return bow;
}

}  // namespace

BowVector Vocabulary::transform(const DescriptorStore& store, std::uint32_t first, std::uint32_t count) const {
  if (store.descriptor_bits() != bits_) throw IncompatibleDescriptors("descriptor length does not match the vocabulary");
  std::vector<std::uint32_t> words;
  words.reserve(count);
  for (std::uint32_t i = first; i < first + count; ++i) words.push_back(word_of(store.row(i)));
  return weigh_and_normalize(words, idf_);
}

BowVector Vocabulary::transform(std::span<const BinaryDescriptor> descriptors) const {
  std::vector<std::uint32_t> words;
  words.reserve(descriptors.size());
  for (const auto& d : descriptors) words.push_back(word_of(d));
  return weigh_and_normalize(words, idf_);
}

std::vector<std::uint8_t> Vocabulary::to_bytes() const {
  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  put_u32(out, kVersion);
  put_u32(out, k_);
  put_u32(out, depth_);
  put_u32(out, static_cast<std::uint32_t>(bits_));
  put_u32(out, static_cast<std::uint32_t>(nodes_.size()));
  for (const auto& node : nodes_) {
    put_u32(out, static_cast<std::uint32_t>(node.word));
    put_u32(out, node.first_child);
    put_u32(out, node.child_count);
    out.push_back(node.centroid.empty() ? 0 : 1);
    if (!node.centroid.empty()) serialize(BinaryDescriptor(node.centroid, bits_), out);
  }
  put_u32(out, static_cast<std::uint32_t>(idf_.size()));
  for (double w : idf_) put_f64(out, w);
  return out;
}

Vocabulary Vocabulary::from_bytes(std::span<const std::uint8_t> bytes) {
  Reader in(bytes);
  in.expect_magic();
  if (const auto version = in.u32(); version != kVersion) {
    throw FormatError("unsupported vocabulary version " + std::to_string(version));
  }
  Vocabulary vocab;
  vocab.k_ = in.u32();
  vocab.depth_ = in.u32();
  vocab.bits_ = in.u32();
  if (vocab.k_ < 2 || vocab.depth_ < 1 || vocab.bits_ == 0) throw FormatError("invalid vocabulary header");
  const auto node_count = in.u32();
  if (node_count == 0) throw FormatError("vocabulary has no nodes");
  for (std::uint32_t i = 0; i < node_count; ++i) {
    Node node;
    node.word = static_cast<std::int32_t>(in.u32());
    node.first_child = in.u32();
    node.child_count = in.u32();
    if (in.u8() != 0) {
      auto centroid = in.descriptor();
      if (centroid.size() != vocab.bits_) throw FormatError("centroid length does not match the vocabulary");
      node.centroid.assign(centroid.words().begin(), centroid.words().end());
    } else if (i != 0) {
      throw FormatError("non-root node without centroid");
    }
    if (node.word == kInner &&
        (node.child_count == 0 || node.child_count > vocab.k_ || node.first_child <= i ||
         std::uint64_t{node.first_child} + node.child_count > node_count)) {
      throw FormatError("invalid child range in vocabulary node " + std::to_string(i));
    }
    vocab.nodes_.push_back(std::move(node));
  }
  const auto word_count = in.u32();
  for (std::uint32_t i = 0; i < word_count; ++i) {
    const double w = in.f64();
    if (!(w >= 0.0) || !std::isfinite(w)) throw FormatError("idf weights must be finite and non-negative");
    vocab.idf_.push_back(w);
  }
  for (const auto& node : vocab.nodes_) {
    if (node.word != kInner && (node.word < 0 || static_cast<std::uint32_t>(node.word) >= word_count)) {
      throw FormatError("word id out of range");
    }
  }
  if (!in.done()) throw FormatError("trailing bytes after vocabulary");
  return vocab;
}

void Vocabulary::save(const std::filesystem::path& path) const {
  const auto bytes = to_bytes();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return from_bytes(bytes);
}

}  // namespace cuedesc
