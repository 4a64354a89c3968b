#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace oreal::oracle {

/// Exhaustive search over every delta in N^C with sum(delta) == budget.
/// Returns the best achievable min_c (n_c + delta_c). Exponential; meant for
/// small C and budget only.
std::int64_t best_balanced_level(std::span<const std::int64_t> counts, std::int64_t budget);

struct DeltaSweep {
  std::size_t cases = 0;
  std::size_t mismatches = 0;
  std::vector<std::string> failures;  // first few mismatching cases, human readable
};

/// Compares items_per_class against the exhaustive optimum for every count
/// vector in [0, max_count]^classes and every budget in [0, max_budget].
DeltaSweep sweep_items_per_class(std::size_t classes, std::int64_t max_count,
                                 std::int64_t max_budget);

}  // namespace oreal::oracle
