#include "oreal/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace oreal {

namespace {

double clamp_probability(double p) { return std::clamp(p, kLogClamp, 1.0 - kLogClamp); }

// -p ln p with 0 ln 0 := 0.
double plogp_term(double p) {
  if (p <= 0.0) return 0.0;
  return -p * std::log(clamp_probability(p));
}

void require_matching(const ProbabilityMap& pm, const SuperpixelPartition& partition) {
  if (pm.height() != partition.height() || pm.width() != partition.width()) {
    throw Error(ErrorKind::ShapeMismatch, "probability map shape does not match partition");
  }
}

template <typename PixelFn>
std::vector<double> aggregate_per_superpixel(const SuperpixelPartition& partition,
                                             AggregationMode mode, PixelFn&& pixel_value) {
  std::vector<double> out(partition.count());
  std::vector<double> buffer;
  for (std::size_t sp = 0; sp < partition.count(); ++sp) {
    const auto members = partition.members(sp);
    buffer.resize(members.size());
    for (std::size_t i = 0; i < members.size(); ++i) buffer[i] = pixel_value(members[i]);
    out[sp] = aggregate(buffer, mode);
  }
  return out;
}

}  // namespace

std::string_view to_string(AggregationMode mode) {
  return mode == AggregationMode::Max ? "max" : "mean";
}

AggregationMode parse_aggregation(std::string_view text) {
  if (text == "max") return AggregationMode::Max;
  if (text == "mean") return AggregationMode::Mean;
  throw Error(ErrorKind::InvalidArgument,
              "unknown aggregation mode '" + std::string(text) + "' (expected mean|max)");
}

double pixel_entropy(std::span<const float> p) {
  double h = 0.0;
  for (const float v : p) h += plogp_term(static_cast<double>(v));
  return h;
}

double bvsb_score(std::span<const float> p) {
  if (p.size() < 2) {
    throw Error(ErrorKind::InvalidArgument, "BvSB needs at least two classes");
  }
  double best = -1.0;
  double second = -1.0;
  for (const float value : p) {
    const double v = value;
    if (v > best) {
      second = best;
      best = v;
    } else if (v > second) {
      second = v;
    }
  }
  return 1.0 - (best - second);
}

double ovr_entropy(double q) { return plogp_term(q) + plogp_term(1.0 - q); }

double ovr_entropy_pixel(std::span<const float> p, ClassId c) {
  if (c < 0 || static_cast<std::size_t>(c) >= p.size()) {
    throw Error(ErrorKind::InvalidArgument, "class index out of range");
  }
  return ovr_entropy(static_cast<double>(p[c]));
}

double aggregate(std::span<const double> values, AggregationMode mode) {
  if (values.empty()) {
    throw Error(ErrorKind::EmptySuperpixel, "cannot aggregate an empty superpixel");
  }
  if (mode == AggregationMode::Max) return *std::max_element(values.begin(), values.end());
  double sum = 0.0;
  for (const double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

std::vector<double> superpixel_scores(const ProbabilityMap& pm,
                                      const SuperpixelPartition& partition, PixelScore score,
                                      AggregationMode mode) {
  require_matching(pm, partition);
  if (score == PixelScore::Entropy) {
    return aggregate_per_superpixel(partition, mode,
                                    [&](std::size_t p) { return pixel_entropy(pm.pixel(p)); });
  }
  return aggregate_per_superpixel(partition, mode,
                                  [&](std::size_t p) { return bvsb_score(pm.pixel(p)); });
}

std::vector<double> ovr_entropy_superpixel(const ProbabilityMap& pm,
                                           const SuperpixelPartition& partition, ClassId c,
                                           AggregationMode mode) {
  require_matching(pm, partition);
  if (c < 0 || static_cast<std::size_t>(c) >= pm.num_classes()) {
    throw Error(ErrorKind::InvalidArgument, "class index out of range");
  }
  return aggregate_per_superpixel(partition, mode, [&](std::size_t p) {
    return ovr_entropy(static_cast<double>(pm.pixel(p)[c]));
  });
}

std::vector<double> superpixel_mean_probabilities(const ProbabilityMap& pm,
                                                  const SuperpixelPartition& partition) {
  require_matching(pm, partition);
  const std::size_t classes = pm.num_classes();
  std::vector<double> out(partition.count() * classes, 0.0);
  for (std::size_t sp = 0; sp < partition.count(); ++sp) {
    const auto members = partition.members(sp);
    double* row = out.data() + sp * classes;
    for (const auto p : members) {
      const auto probs = pm.pixel(p);
      for (std::size_t c = 0; c < classes; ++c) row[c] += probs[c];
    }
    for (std::size_t c = 0; c < classes; ++c) row[c] /= static_cast<double>(members.size());
  }
  return out;
}

}  // namespace oreal
