#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "oreal/core.hpp"

namespace oreal {

/// n_c: number of labeled superpixels per class.
using ClassCounts = std::vector<std::int64_t>;

/// delta_c: additional superpixels requested per class; sums to the budget.
using DebtVector = std::vector<std::int64_t>;

/// Histogram of labels over [0, num_classes).
ClassCounts class_counts(std::span<const ClassId> labels, std::size_t num_classes);

/// Water-filling solution of  max_delta min_c (n_c + delta_c)  s.t.
/// sum_c delta_c = budget, delta_c >= 0. Units go one at a time to the class
/// with the lowest current n_c + delta_c, lowest index first.
DebtVector items_per_class(std::span<const std::int64_t> counts, std::int64_t budget);

/// min_c (n_c + delta_c).
std::int64_t balanced_level(std::span<const std::int64_t> counts, std::span<const std::int64_t> debt);

}  // namespace oreal
