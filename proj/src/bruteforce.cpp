#include "oreal/bruteforce.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <sstream>

#include "oreal/balancing.hpp"

namespace oreal::oracle {

namespace {

void enumerate(std::span<const std::int64_t> counts, std::size_t index, std::int64_t remaining,
               std::int64_t current_min, std::int64_t& best) {
  if (index + 1 == counts.size()) {
    best = std::max(best, std::min(current_min, counts[index] + remaining));
    return;
  }
  for (std::int64_t d = 0; d <= remaining; ++d) {
    enumerate(counts, index + 1, remaining - d, std::min(current_min, counts[index] + d), best);
  }
}

std::string describe(std::span<const std::int64_t> values) {
  std::ostringstream out;
  out << "(";
  for (std::size_t i = 0; i < values.size(); ++i) out << (i ? "," : "") << values[i];
  out << ")";
  return out.str();
}

}  // namespace

std::int64_t best_balanced_level(std::span<const std::int64_t> counts, std::int64_t budget) {
  if (counts.empty()) return std::numeric_limits<std::int64_t>::max();
  std::int64_t best = std::numeric_limits<std::int64_t>::min();
  enumerate(counts, 0, budget, std::numeric_limits<std::int64_t>::max(), best);
  return best;
}

DeltaSweep sweep_items_per_class(std::size_t classes, std::int64_t max_count,
                                 std::int64_t max_budget) {
  DeltaSweep sweep;
  if (classes == 0) return sweep;
  std::vector<std::int64_t> counts(classes, 0);
  while (true) {
    for (std::int64_t budget = 0; budget <= max_budget; ++budget) {
      const auto debt = items_per_class(counts, budget);
      const std::int64_t total = std::accumulate(debt.begin(), debt.end(), std::int64_t{0});
      const bool nonneg = std::all_of(debt.begin(), debt.end(), [](auto d) { return d >= 0; });
      const std::int64_t got = balanced_level(counts, debt);
      const std::int64_t want = best_balanced_level(counts, budget);
      ++sweep.cases;
      if (total != budget || !nonneg || got != want) {
        ++sweep.mismatches;
        if (sweep.failures.size() < 10) {
          std::ostringstream msg;
          msg << "n=" << describe(counts) << " Q=" << budget << " delta=" << describe(debt)
              << " level=" << got << " optimum=" << want;
          sweep.failures.push_back(msg.str());
        }
      }
    }
    std::size_t pos = 0;
    while (pos < classes && counts[pos] == max_count) counts[pos++] = 0;
    if (pos == classes) break;
    ++counts[pos];
  }
  return sweep;
}

}  // namespace oreal::oracle
