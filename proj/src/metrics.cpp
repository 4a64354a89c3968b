#include "oreal/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace oreal {

ConfusionMatrix::ConfusionMatrix(std::size_t num_classes)
    : classes_(num_classes), counts_(num_classes * num_classes, 0) {
  if (num_classes == 0) throw Error(ErrorKind::InvalidArgument, "mIoU needs at least one class");
}

void ConfusionMatrix::add(const LabelMap& pred, const LabelMap& gt) {
  if (!pred.same_shape(gt) || pred.labels.size() != gt.labels.size()) {
    throw Error(ErrorKind::ShapeMismatch, "prediction and ground truth shapes differ");
  }
  for (std::size_t i = 0; i < gt.labels.size(); ++i) {
    const ClassId g = gt.labels[i];
    if (g == kUnlabeled) continue;
    const ClassId p = pred.labels[i];
    if (g < 0 || p < 0 || static_cast<std::size_t>(g) >= classes_ ||
        static_cast<std::size_t>(p) >= classes_) {
      throw Error(ErrorKind::InvalidArgument, "label outside [0, C) in mIoU");
    }
    ++counts_[static_cast<std::size_t>(g) * classes_ + static_cast<std::size_t>(p)];
  }
}

double ConfusionMatrix::iou(std::size_t c) const {
  std::uint64_t intersection = counts_[c * classes_ + c];
  std::uint64_t gt_total = 0;
  std::uint64_t pred_total = 0;
  for (std::size_t k = 0; k < classes_; ++k) {
    gt_total += counts_[c * classes_ + k];
    pred_total += counts_[k * classes_ + c];
  }
  const std::uint64_t uni = gt_total + pred_total - intersection;
  if (uni == 0) return -1.0;
  return static_cast<double>(intersection) / static_cast<double>(uni);
}

double ConfusionMatrix::miou() const {
  double sum = 0.0;
  std::size_t present = 0;
  for (std::size_t c = 0; c < classes_; ++c) {
    const double v = iou(c);
    if (v < 0.0) continue;
    sum += v;
    ++present;
  }
  return present == 0 ? 0.0 : sum / static_cast<double>(present);
}

double miou(const LabelMap& pred, const GroundTruthMask& gt, std::size_t num_classes) {
  ConfusionMatrix cm(num_classes);
  cm.add(pred, gt);
  return cm.miou();
}

double aualc(const ALCurve& curve) {
  if (curve.points.size() < 2) {
    throw Error(ErrorKind::DegenerateCurve, "AuALC needs at least two curve points");
  }
  if (!(curve.reference > 0.0)) {
    throw Error(ErrorKind::DegenerateCurve, "AuALC reference mIoU must be positive");
  }
  double area = 0.0;
  for (std::size_t i = 1; i < curve.points.size(); ++i) {
    const auto& a = curve.points[i - 1];
    const auto& b = curve.points[i];
    if (!(b.budget > a.budget)) {
      throw Error(ErrorKind::DegenerateCurve, "AuALC budgets must be strictly increasing");
    }
    area += 0.5 * (a.miou + b.miou) * (b.budget - a.budget);
  }
  const double span = curve.points.back().budget - curve.points.front().budget;
  return std::max(0.0, area / (curve.reference * span));
}

BalanceReport balance_report(std::span<const ClassId> labels, std::size_t num_classes) {
  BalanceReport report;
  if (num_classes == 0) return report;
  std::vector<std::int64_t> counts(num_classes, 0);
  for (const ClassId label : labels) {
    if (label < 0 || static_cast<std::size_t>(label) >= num_classes) {
      throw Error(ErrorKind::InvalidArgument, "label outside [0, C) in balance report");
    }
    ++counts[label];
  }
  report.min_class_count = *std::min_element(counts.begin(), counts.end());
  if (labels.empty() || num_classes < 2) return report;
  const double total = static_cast<double>(labels.size());
  double h = 0.0;
  for (const auto n : counts) {
    if (n == 0) continue;
    const double p = static_cast<double>(n) / total;
    h -= p * std::log(p);
  }
  report.normalized_entropy = h / std::log(static_cast<double>(num_classes));
  return report;
}

std::vector<char> boundary_band(const GroundTruthMask& gt, std::size_t radius) {
  const std::size_t h = gt.height;
  const std::size_t w = gt.width;
  std::vector<char> edge(h * w, 0);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const std::size_t p = y * w + x;
      const ClassId c = gt.labels[p];
      if ((x > 0 && gt.labels[p - 1] != c) || (x + 1 < w && gt.labels[p + 1] != c) ||
          (y > 0 && gt.labels[p - w] != c) || (y + 1 < h && gt.labels[p + w] != c)) {
        edge[p] = 1;
      }
    }
  }
  if (radius == 0) return edge;

  // Chebyshev dilation is separable: dilate rows, then columns.
  const auto r = static_cast<long>(radius);
  std::vector<char> rows(h * w, 0);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      if (!edge[y * w + x]) continue;
      const long lo = std::max(0L, static_cast<long>(x) - r);
      const long hi = std::min(static_cast<long>(w) - 1, static_cast<long>(x) + r);
      for (long xx = lo; xx <= hi; ++xx) rows[y * w + static_cast<std::size_t>(xx)] = 1;
    }
  }
  std::vector<char> band(h * w, 0);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      if (!rows[y * w + x]) continue;
      const long lo = std::max(0L, static_cast<long>(y) - r);
      const long hi = std::min(static_cast<long>(h) - 1, static_cast<long>(y) + r);
      for (long yy = lo; yy <= hi; ++yy) band[static_cast<std::size_t>(yy) * w + x] = 1;
    }
  }
  return band;
}

double boundary_fraction(std::span<const SuperpixelRef> queries,
                         std::span<const SuperpixelPartition> partitions,
                         std::span<const GroundTruthMask> gts, std::size_t radius) {
  if (partitions.size() != gts.size()) {
    throw Error(ErrorKind::ShapeMismatch, "partition and mask counts differ");
  }
  if (queries.empty()) return 0.0;
  std::vector<std::vector<char>> bands(gts.size());
  std::size_t hits = 0;
  for (const auto& ref : queries) {
    if (ref.image >= partitions.size()) {
      throw Error(ErrorKind::InvalidArgument, "query ref points past the dataset");
    }
    auto& band = bands[ref.image];
    if (band.empty()) band = boundary_band(gts[ref.image], radius);
    const auto members = partitions[ref.image].members(ref.superpixel);
    if (std::any_of(members.begin(), members.end(), [&](auto p) { return band[p] != 0; })) {
      ++hits;
    }
  }
  return static_cast<double>(hits) / static_cast<double>(queries.size());
}

}  // namespace oreal
