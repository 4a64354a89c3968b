#pragma once

#include <cstdint>
#include <set>
#include <span>
#include <string_view>
#include <vector>

#include "oreal/balancing.hpp"
#include "oreal/core.hpp"
#include "oreal/scoring.hpp"
#include "oreal/superpixel.hpp"

namespace oreal {

struct LabeledItem {
  SuperpixelRef ref;
  ClassId label = 0;

  bool operator==(const LabeledItem&) const = default;
};

/// Active-learning bookkeeping: labeled (A_t) and unlabeled (U_t) superpixels.
/// The two sets are disjoint and their union is the full superpixel pool.
struct ALState {
  std::vector<LabeledItem> labeled;
  std::set<SuperpixelRef> unlabeled;
  std::size_t step = 0;

  /// Every superpixel of every partition starts unlabeled.
  static ALState initial(std::span<const SuperpixelPartition> partitions);

  std::vector<ClassId> labels() const;

  /// Moves annotated refs from unlabeled to labeled. Throws InvalidArgument
  /// if a ref is not currently unlabeled.
  void absorb(std::span<const LabeledItem> items);
};

using QuerySet = std::vector<SuperpixelRef>;

enum class StrategyKind { Random, Entropy, BvSB, RevisitingSP, PixelBal, CBAL, OREAL };

inline constexpr StrategyKind kAllStrategies[] = {
    StrategyKind::Random,       StrategyKind::Entropy,  StrategyKind::BvSB,
    StrategyKind::RevisitingSP, StrategyKind::PixelBal, StrategyKind::CBAL,
    StrategyKind::OREAL};

std::string_view to_string(StrategyKind kind);
StrategyKind parse_strategy(std::string_view text);

struct ScoredRef {
  SuperpixelRef ref;
  double score = 0.0;
};

/// Uniform sample of `budget` unlabeled refs without replacement.
QuerySet select_random(const ALState& state, std::size_t budget, std::uint64_t seed);

/// Model outputs for the whole training pool, indexed by image id.
struct PoolView {
  std::span<const ProbabilityMap> probabilities;
  std::span<const SuperpixelPartition> partitions;
};

/// One score per unlabeled ref (in ref order) for the score-and-rank
/// strategies. `budget` only matters for CBAL, whose debt vector depends on it.
std::vector<ScoredRef> score_superpixels(const ALState& state, const PoolView& pool,
                                         StrategyKind kind, AggregationMode mode,
                                         std::size_t budget);

/// Highest scores first; ties by (image, superpixel) ascending.
QuerySet select_top_k(std::span<const ScoredRef> scores, std::size_t budget);

/// Per-class quota selection over precomputed one-vs-rest scores.
/// `candidates[i]` has score `class_scores[c][i]` for class c. Classes are
/// served in ascending order of their labeled count (ties by index); each
/// takes its delta_c best remaining candidates, which then leave the pool.
QuerySet select_by_class_quota(std::span<const SuperpixelRef> candidates,
                               std::span<const std::vector<double>> class_scores,
                               std::span<const std::int64_t> counts, std::size_t budget);

/// Balanced one-vs-rest entropy selection.
QuerySet select_oreal(const ALState& state, const PoolView& pool, std::size_t budget,
                      AggregationMode mode);

/// Dispatch on kind. Random ignores the pool and mode.
QuerySet select(StrategyKind kind, const ALState& state, const PoolView& pool,
                std::size_t budget, AggregationMode mode, std::uint64_t seed);

}  // namespace oreal
