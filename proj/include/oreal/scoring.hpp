#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "oreal/core.hpp"
#include "oreal/superpixel.hpp"

namespace oreal {

/// Probabilities are clamped to [kLogClamp, 1 - kLogClamp] inside log terms.
inline constexpr double kLogClamp = 1e-12;

enum class AggregationMode { Mean, Max };

std::string_view to_string(AggregationMode mode);
AggregationMode parse_aggregation(std::string_view text);

enum class PixelScore { Entropy, BvSB };

/// Shannon entropy in nats.
double pixel_entropy(std::span<const float> p);

/// 1 - (p_best - p_second). Higher means less certain.
double bvsb_score(std::span<const float> p);

/// Binary entropy of class mass q against the rest, in nats; in [0, ln 2].
double ovr_entropy(double q);

/// One-vs-rest entropy of class c at one pixel.
double ovr_entropy_pixel(std::span<const float> p, ClassId c);

/// Max or arithmetic mean (sequential double sum). Throws EmptySuperpixel.
double aggregate(std::span<const double> values, AggregationMode mode);

/// Per-superpixel aggregate of a per-pixel uncertainty score.
std::vector<double> superpixel_scores(const ProbabilityMap& pm,
                                      const SuperpixelPartition& partition, PixelScore score,
                                      AggregationMode mode);

/// Per-superpixel aggregate of the one-vs-rest entropy of class c.
std::vector<double> ovr_entropy_superpixel(const ProbabilityMap& pm,
                                           const SuperpixelPartition& partition, ClassId c,
                                           AggregationMode mode = AggregationMode::Max);

/// Mean probability vector of each superpixel, row-major [K][C].
std::vector<double> superpixel_mean_probabilities(const ProbabilityMap& pm,
                                                  const SuperpixelPartition& partition);

}  // namespace oreal
