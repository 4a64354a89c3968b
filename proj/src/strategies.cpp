#include "oreal/strategies.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

namespace oreal {

namespace {

void require_budget(std::size_t budget, std::size_t pool) {
  if (budget > pool) {
    std::ostringstream msg;
    msg << "budget " << budget << " exceeds pool of " << pool << " superpixels";
    throw Error(ErrorKind::BudgetExceedsPool, msg.str());
  }
}

std::size_t pool_classes(const PoolView& pool) {
  if (pool.probabilities.empty()) {
    throw Error(ErrorKind::InvalidArgument, "strategy needs model outputs for the pool");
  }
  if (pool.probabilities.size() != pool.partitions.size()) {
    throw Error(ErrorKind::ShapeMismatch, "probability map and partition counts differ");
  }
  return pool.probabilities.front().num_classes();
}

// Unlabeled refs grouped by image, preserving ref order.
std::map<std::uint32_t, std::vector<std::uint32_t>> group_by_image(const ALState& state,
                                                                   std::size_t images) {
  std::map<std::uint32_t, std::vector<std::uint32_t>> groups;
  for (const auto& ref : state.unlabeled) {
    if (ref.image >= images) {
      throw Error(ErrorKind::InvalidArgument, "unlabeled ref points past the pool");
    }
    groups[ref.image].push_back(ref.superpixel);
  }
  return groups;
}

// Modal argmax class of each superpixel, lowest index on ties.
std::vector<ClassId> predicted_dominant(const ProbabilityMap& pm,
                                        const SuperpixelPartition& partition) {
  const std::size_t classes = pm.num_classes();
  std::vector<ClassId> out(partition.count());
  std::vector<std::size_t> hist(classes);
  for (std::size_t sp = 0; sp < partition.count(); ++sp) {
    std::fill(hist.begin(), hist.end(), 0);
    for (const auto p : partition.members(sp)) ++hist[argmax(pm.pixel(p))];
    out[sp] = static_cast<ClassId>(std::max_element(hist.begin(), hist.end()) - hist.begin());
  }
  return out;
}

// w_c = 1 / (freq_c + eps), rescaled to mean 1.
std::vector<double> inverse_frequency_weights(std::span<const double> freq, double eps) {
  std::vector<double> w(freq.size());
  for (std::size_t c = 0; c < freq.size(); ++c) w[c] = 1.0 / (freq[c] + eps);
  const double mean = std::accumulate(w.begin(), w.end(), 0.0) / static_cast<double>(w.size());
  for (auto& v : w) v /= mean;
  return w;
}

}  // namespace

ALState ALState::initial(std::span<const SuperpixelPartition> partitions) {
  ALState state;
  for (std::size_t image = 0; image < partitions.size(); ++image) {
    for (std::size_t sp = 0; sp < partitions[image].count(); ++sp) {
      state.unlabeled.insert(
          SuperpixelRef{static_cast<std::uint32_t>(image), static_cast<std::uint32_t>(sp)});
    }
  }
  return state;
}

std::vector<ClassId> ALState::labels() const {
  std::vector<ClassId> out;
  out.reserve(labeled.size());
  for (const auto& item : labeled) out.push_back(item.label);
  return out;
}

void ALState::absorb(std::span<const LabeledItem> items) {
  for (const auto& item : items) {
    const auto it = unlabeled.find(item.ref);
    if (it == unlabeled.end()) {
      std::ostringstream msg;
      msg << "superpixel (" << item.ref.image << ", " << item.ref.superpixel
          << ") is not in the unlabeled pool";
      throw Error(ErrorKind::InvalidArgument, msg.str());
    }
    unlabeled.erase(it);
    labeled.push_back(item);
  }
}

std::string_view to_string(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::Random: return "random";
    case StrategyKind::Entropy: return "entropy";
    case StrategyKind::BvSB: return "bvsb";
    case StrategyKind::RevisitingSP: return "revisiting_sp";
    case StrategyKind::PixelBal: return "pixelbal";
    case StrategyKind::CBAL: return "cbal";
    case StrategyKind::OREAL: return "oreal";
  }
  return "unknown";
}

StrategyKind parse_strategy(std::string_view text) {
  for (const auto kind : kAllStrategies) {
    if (text == to_string(kind)) return kind;
  }
  throw Error(ErrorKind::InvalidArgument,
              "unknown strategy '" + std::string(text) +
                  "' (expected random|entropy|bvsb|revisiting_sp|pixelbal|cbal|oreal)");
}

QuerySet select_random(const ALState& state, std::size_t budget, std::uint64_t seed) {
  require_budget(budget, state.unlabeled.size());
  QuerySet pool(state.unlabeled.begin(), state.unlabeled.end());
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < budget; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  pool.resize(budget);
  return pool;
}

std::vector<ScoredRef> score_superpixels(const ALState& state, const PoolView& pool,
                                         StrategyKind kind, AggregationMode mode,
                                         std::size_t budget) {
  if (kind == StrategyKind::Random || kind == StrategyKind::OREAL) {
    throw Error(ErrorKind::InvalidArgument,
                std::string(to_string(kind)) + " is not a score-and-rank strategy");
  }
  const std::size_t classes = pool_classes(pool);
  const auto groups = group_by_image(state, pool.partitions.size());

  const PixelScore base_score = kind == StrategyKind::BvSB ? PixelScore::BvSB : PixelScore::Entropy;

  // Per-image base uncertainty, plus whatever the class-aware variants need.
  std::map<std::uint32_t, std::vector<double>> base;
  std::map<std::uint32_t, std::vector<ClassId>> dominant;
  std::map<std::uint32_t, std::vector<double>> mean_probs;
  std::vector<double> freq(classes, 0.0);
  double pixel_total = 0.0;

  for (const auto& [image, sps] : groups) {
    const auto& pm = pool.probabilities[image];
    const auto& partition = pool.partitions[image];
    if (pm.num_classes() != classes) {
      throw Error(ErrorKind::ShapeMismatch, "probability maps disagree on class count");
    }
    base[image] = superpixel_scores(pm, partition, base_score, mode);

    if (kind == StrategyKind::RevisitingSP || kind == StrategyKind::PixelBal) {
      dominant[image] = predicted_dominant(pm, partition);
    }
    if (kind == StrategyKind::RevisitingSP) {
      for (const auto sp : sps) freq[dominant[image][sp]] += 1.0;
    } else if (kind == StrategyKind::PixelBal) {
      for (const auto sp : sps) {
        for (const auto p : partition.members(sp)) {
          const auto probs = pm.pixel(p);
          for (std::size_t c = 0; c < classes; ++c) freq[c] += probs[c];
        }
        pixel_total += static_cast<double>(partition.members(sp).size());
      }
    } else if (kind == StrategyKind::CBAL) {
      mean_probs[image] = superpixel_mean_probabilities(pm, partition);
    }
  }

  std::vector<double> weights;
  const double unlabeled = static_cast<double>(state.unlabeled.size());
  if (kind == StrategyKind::RevisitingSP || kind == StrategyKind::PixelBal) {
    const double denom = kind == StrategyKind::RevisitingSP ? unlabeled : pixel_total;
    if (denom > 0.0) {
      for (auto& f : freq) f /= denom;
    }
    weights = inverse_frequency_weights(freq, unlabeled > 0.0 ? 1.0 / unlabeled : 1.0);
  }

  std::vector<double> target;
  if (kind == StrategyKind::CBAL) {
    const auto debt = items_per_class(class_counts(state.labels(), classes),
                                      static_cast<std::int64_t>(budget));
    const double total = static_cast<double>(std::accumulate(debt.begin(), debt.end(), std::int64_t{0}));
    target.assign(classes, 1.0 / static_cast<double>(classes));
    if (total > 0.0) {
      for (std::size_t c = 0; c < classes; ++c) target[c] = static_cast<double>(debt[c]) / total;
    }
  }

  std::vector<ScoredRef> out;
  out.reserve(state.unlabeled.size());
  for (const auto& [image, sps] : groups) {
    for (const auto sp : sps) {
      double score = base[image][sp];
      switch (kind) {
        case StrategyKind::RevisitingSP:
        case StrategyKind::PixelBal:
          score *= weights[dominant[image][sp]];
          break;
        case StrategyKind::CBAL: {
          const double* row = mean_probs[image].data() + sp * classes;
          double d2 = 0.0;
          for (std::size_t c = 0; c < classes; ++c) {
            const double diff = row[c] - target[c];
            d2 += diff * diff;
          }
          score -= std::sqrt(d2);
          break;
        }
        default:
          break;
      }
      out.push_back(ScoredRef{SuperpixelRef{image, sp}, score});
    }
  }
  return out;
}

QuerySet select_top_k(std::span<const ScoredRef> scores, std::size_t budget) {
  require_budget(budget, scores.size());
  std::vector<ScoredRef> ranked(scores.begin(), scores.end());
  auto better = [](const ScoredRef& a, const ScoredRef& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.ref < b.ref;
  };
  std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(budget),
                    ranked.end(), better);
  QuerySet out;
  out.reserve(budget);
  for (std::size_t i = 0; i < budget; ++i) out.push_back(ranked[i].ref);
  return out;
}

QuerySet select_by_class_quota(std::span<const SuperpixelRef> candidates,
                               std::span<const std::vector<double>> class_scores,
                               std::span<const std::int64_t> counts, std::size_t budget) {
  require_budget(budget, candidates.size());
  const std::size_t classes = counts.size();
  if (class_scores.size() != classes) {
    throw Error(ErrorKind::ShapeMismatch, "one score vector per class is required");
  }
  for (const auto& scores : class_scores) {
    if (scores.size() != candidates.size()) {
      throw Error(ErrorKind::ShapeMismatch, "class score vector length differs from candidates");
    }
  }

  const auto debt = items_per_class(counts, static_cast<std::int64_t>(budget));
  std::vector<std::size_t> order(classes);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return counts[a] < counts[b]; });

  std::vector<char> taken(candidates.size(), 0);
  std::vector<std::size_t> ranking(candidates.size());
  QuerySet out;
  out.reserve(budget);
  for (const std::size_t c : order) {
    if (debt[c] == 0) continue;
    const auto& scores = class_scores[c];
    std::iota(ranking.begin(), ranking.end(), 0);
    std::sort(ranking.begin(), ranking.end(), [&](std::size_t a, std::size_t b) {
      if (scores[a] != scores[b]) return scores[a] > scores[b];
      return candidates[a] < candidates[b];
    });
    std::int64_t need = debt[c];
    for (const std::size_t i : ranking) {
      if (need == 0) break;
      if (taken[i]) continue;
      taken[i] = 1;
      out.push_back(candidates[i]);
      --need;
    }
  }
  return out;
}

QuerySet select_oreal(const ALState& state, const PoolView& pool, std::size_t budget,
                      AggregationMode mode) {
  require_budget(budget, state.unlabeled.size());
  const std::size_t classes = pool_classes(pool);
  const auto groups = group_by_image(state, pool.partitions.size());

  std::vector<SuperpixelRef> candidates;
  candidates.reserve(state.unlabeled.size());
  std::vector<std::vector<double>> class_scores(classes);
  for (auto& scores : class_scores) scores.reserve(state.unlabeled.size());

  for (const auto& [image, sps] : groups) {
    const auto& pm = pool.probabilities[image];
    const auto& partition = pool.partitions[image];
    for (std::size_t c = 0; c < classes; ++c) {
      const auto per_sp = ovr_entropy_superpixel(pm, partition, static_cast<ClassId>(c), mode);
      for (const auto sp : sps) class_scores[c].push_back(per_sp[sp]);
    }
    for (const auto sp : sps) candidates.push_back(SuperpixelRef{image, sp});
  }

  const auto counts = class_counts(state.labels(), classes);
  return select_by_class_quota(candidates, class_scores, counts, budget);
}

QuerySet select(StrategyKind kind, const ALState& state, const PoolView& pool,
                std::size_t budget, AggregationMode mode, std::uint64_t seed) {
  switch (kind) {
    case StrategyKind::Random:
      return select_random(state, budget, seed);
    case StrategyKind::OREAL:
      return select_oreal(state, pool, budget, mode);
    default: {
      require_budget(budget, state.unlabeled.size());
      const auto scores = score_superpixels(state, pool, kind, mode, budget);
      return select_top_k(scores, budget);
    }
  }
}

}  // namespace oreal
