#include "cuedesc/eval.hpp"

#include <algorithm>
#include <memory>
#include <numeric>

namespace cuedesc {

PrCurve pr_curve(std::span<const ReportedPair> pairs, const GroundTruth& gt) {
  std::size_t possible = 0;
  for (const auto& [query, relevant] : gt.relevant) possible += relevant.size();

  std::vector<std::size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<bool> correct(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    auto it = gt.relevant.find(pairs[i].query);
    if (it == gt.relevant.end()) throw UnknownImage("reported pair names unknown query '" + pairs[i].query + "'");
    correct[i] = it->second.contains(pairs[i].reference);
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return pairs[a].score > pairs[b].score; });

  PrCurve curve;
  if (pairs.empty()) {
    curve.points.push_back({0.0, 0.0, 1.0});
    return curve;
  }
  std::size_t hits = 0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (correct[order[i]]) ++hits;
    const bool last_of_level = i + 1 == order.size() || pairs[order[i + 1]].score != pairs[order[i]].score;
    if (!last_of_level) continue;
    const double reported = static_cast<double>(i + 1);
    curve.points.push_back({pairs[order[i]].score,
                            possible == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(possible),
                            static_cast<double>(hits) / reported});
  }
  return curve;
}

double average_precision(std::span<const bool> hits, std::size_t relevant_count) {
  if (relevant_count == 0) return 0.0;
  double ap = 0.0;
  double old_recall = 0.0;
  double old_precision = 1.0;
  std::size_t found = 0;
  for (std::size_t j = 0; j < hits.size(); ++j) {
    if (hits[j]) ++found;
    const double recall = static_cast<double>(found) / static_cast<double>(relevant_count);
    const double precision = static_cast<double>(found) / static_cast<double>(j + 1);
    ap += (recall - old_recall) * (old_precision + precision) / 2.0;
    old_recall = recall;
    old_precision = precision;
  }
  return ap;
}

double average_precision(std::span<const std::string> ranked, const std::set<std::string>& relevant) {
  // std::vector<bool> is not contiguous, hence the plain array.
  auto hits = std::make_unique<bool[]>(ranked.size());
  for (std::size_t i = 0; i < ranked.size(); ++i) hits[i] = relevant.contains(ranked[i]);
  return average_precision(std::span<const bool>(hits.get(), ranked.size()), relevant.size());
}

double mean_average_precision(std::span<const QueryAp> aps) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& q : aps) {
    if (!q.counted) continue;
    sum += q.ap;
    ++n;
  }
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

double mean_processing_time(std::span<const std::chrono::nanoseconds> samples) {
  if (samples.empty()) return 0.0;
  long double total = 0.0L;
  for (auto s : samples) total += static_cast<long double>(s.count());
  return static_cast<double>(total / static_cast<long double>(samples.size()) / 1e9L);
}

}  // namespace cuedesc
