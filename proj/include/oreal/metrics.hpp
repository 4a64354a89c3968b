#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "oreal/core.hpp"
#include "oreal/superpixel.hpp"

namespace oreal {

/// Pixel confusion counts accumulated over any number of label maps.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t num_classes);

  /// Adds every pixel of `pred` against `gt`. Ground-truth pixels equal to
  /// kUnlabeled are skipped. Throws ShapeMismatch.
  void add(const LabelMap& pred, const LabelMap& gt);

  /// Mean IoU over classes present in the prediction or the ground truth;
  /// classes absent from both are left out. 0 when nothing was added.
  double miou() const;

  /// IoU of one class, or a negative value when the class never occurred.
  double iou(std::size_t c) const;

  std::size_t num_classes() const { return classes_; }

 private:
  std::size_t classes_;
  std::vector<std::uint64_t> counts_;  // [gt][pred]
};

/// mIoU of a single prediction against a single mask.
double miou(const LabelMap& pred, const GroundTruthMask& gt, std::size_t num_classes);

struct CurvePoint {
  double budget = 0.0;
  double miou = 0.0;
};

struct ALCurve {
  std::vector<CurvePoint> points;
  double reference = 0.0;  // mIoU of the fully-annotated model
};

/// Trapezoidal area under (budget, mIoU) divided by reference * budget span.
/// Throws DegenerateCurve on fewer than two points, non-increasing budgets, or
/// a non-positive reference.
double aualc(const ALCurve& curve);

struct BalanceReport {
  std::int64_t min_class_count = 0;
  double normalized_entropy = 0.0;  // H(labels) / ln C, 0 for an empty set
};

BalanceReport balance_report(std::span<const ClassId> labels, std::size_t num_classes);

/// Fraction of queried superpixels with at least one pixel within Chebyshev
/// distance `radius` of a ground-truth class boundary (a pixel whose
/// 4-neighbor carries a different class). 0 for an empty query.
double boundary_fraction(std::span<const SuperpixelRef> queries,
                         std::span<const SuperpixelPartition> partitions,
                         std::span<const GroundTruthMask> gts, std::size_t radius = 1);

/// Per-pixel flag: within Chebyshev distance `radius` of a class boundary.
std::vector<char> boundary_band(const GroundTruthMask& gt, std::size_t radius);

}  // namespace oreal
