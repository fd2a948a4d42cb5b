#pragma once

// Retrieval metrics: precision/recall curves over reported image pairs,
// trapezoidal average precision, mAP and mean processing time.

#include <chrono>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cuedesc/dataset.hpp"

namespace cuedesc {

class UnknownImage : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct PrPoint {
  double threshold = 0.0;  // minimum score reported at this operating point
  double recall = 0.0;
  double precision = 1.0;
  friend bool operator==(const PrPoint&, const PrPoint&) = default;
};

struct PrCurve {
  std::vector<PrPoint> points;  // recall non-decreasing
  friend bool operator==(const PrCurve&, const PrCurve&) = default;
};

// One reported (query, reference) image pair and the score it was reported with.
struct ReportedPair {
  std::string query;
  std::string reference;
  double score = 0.0;
};

// Operating points sweep a global score threshold from high to low; pairs
// with equal scores enter together. precision = correct / reported,
// recall = correct / possible, where possible counts every (query, relevant)
// pair in gt. With no reports the curve is the single point (0, 1).
// Throws UnknownImage when a pair's query has no entry in gt.
[[nodiscard]] PrCurve pr_curve(std::span<const ReportedPair> pairs, const GroundTruth& gt);

// Area under one query's PR curve, walking the ranked list: every relevant
// hit adds (previous precision + current precision) / 2 times the recall
// step, the previous precision starting at 1. relevant_count is the number of
// relevant items that exist (hits need not all appear in the list). Returns 0
// when relevant_count is 0.
[[nodiscard]] double average_precision(std::span<const bool> hits, std::size_t relevant_count);
[[nodiscard]] double average_precision(std::span<const std::string> ranked, const std::set<std::string>& relevant);

struct QueryAp {
  std::string query;
  double ap = 0.0;
  bool counted = true;  // false when the query had nothing relevant to find
  friend bool operator==(const QueryAp&, const QueryAp&) = default;
};

// Mean over counted queries; 0 when none counts.
[[nodiscard]] double mean_average_precision(std::span<const QueryAp> aps);

[[nodiscard]] double mean_processing_time(std::span<const std::chrono::nanoseconds> samples);

struct EvalReport {
  std::string backend;
  std::uint32_t lambda = 0;
  std::size_t descriptor_bits = 0;  // after augmentation
  double tau = 0.0;
  std::vector<QueryAp> per_query;
  double map = 0.0;
  PrCurve curve;
  std::size_t reported_pairs = 0;
  std::size_t correct_pairs = 0;
  std::size_t possible_pairs = 0;
  // Wall-clock seconds per processed image, averaged over timing_runs runs
  // after one untimed warm-up; 0 runs means timing was not measured.
  double mean_processing_time_seconds = 0.0;
  std::uint32_t timing_runs = 0;
};

}  // namespace cuedesc
