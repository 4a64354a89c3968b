#include "oreal/balancing.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace oreal {

ClassCounts class_counts(std::span<const ClassId> labels, std::size_t num_classes) {
  ClassCounts counts(num_classes, 0);
  for (const ClassId label : labels) {
    if (label < 0 || static_cast<std::size_t>(label) >= num_classes) {
      throw Error(ErrorKind::InvalidArgument, "label outside [0, C) in class_counts");
    }
    ++counts[label];
  }
  return counts;
}

DebtVector items_per_class(std::span<const std::int64_t> counts, std::int64_t budget) {
  if (budget < 0) throw Error(ErrorKind::InvalidArgument, "budget must be non-negative");
  if (counts.empty()) {
    if (budget == 0) return {};
    throw Error(ErrorKind::InvalidArgument, "cannot distribute a budget over zero classes");
  }
  for (const auto n : counts) {
    if (n < 0) throw Error(ErrorKind::InvalidArgument, "class counts must be non-negative");
  }

  // Closed form of the one-unit-at-a-time fill: raise the water level to the
  // highest L with sum_c max(0, L - n_c) <= budget, then hand the remaining
  // units to classes sitting exactly at L, in ascending index.
  const std::size_t classes = counts.size();
  std::vector<std::int64_t> sorted(counts.begin(), counts.end());
  std::sort(sorted.begin(), sorted.end());

  std::int64_t level = sorted.front();
  std::int64_t remaining = budget;
  std::size_t below = 1;  // classes at or under `level`
  while (true) {
    while (below < classes && sorted[below] <= level) ++below;
    const std::int64_t next = below < classes ? sorted[below] : std::numeric_limits<std::int64_t>::max();
    const std::int64_t width = static_cast<std::int64_t>(below);
    const std::int64_t affordable = remaining / width;
    if (below == classes || level + affordable < next) {
      level += affordable;
      remaining -= affordable * width;
      break;
    }
    remaining -= (next - level) * width;
    level = next;
  }

  DebtVector debt(classes, 0);
  for (std::size_t c = 0; c < classes; ++c) debt[c] = std::max<std::int64_t>(0, level - counts[c]);
  for (std::size_t c = 0; c < classes && remaining > 0; ++c) {
    if (counts[c] + debt[c] == level) {
      ++debt[c];
      --remaining;
    }
  }
  return debt;
}

std::int64_t balanced_level(std::span<const std::int64_t> counts,
                            std::span<const std::int64_t> debt) {
  if (counts.size() != debt.size()) {
    throw Error(ErrorKind::ShapeMismatch, "counts and debt lengths differ");
  }
  std::int64_t level = std::numeric_limits<std::int64_t>::max();
  for (std::size_t c = 0; c < counts.size(); ++c) level = std::min(level, counts[c] + debt[c]);
  return level;
}

}  // namespace oreal
