#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "oreal/core.hpp"

namespace oreal {

/// Disjoint cover of an image by 4-connected pixel groups with dense ids
/// in [0, K). Immutable after construction.
class SuperpixelPartition {
 public:
  SuperpixelPartition() = default;

  /// Builds member lists from a per-pixel assignment. Ids must be dense:
  /// every value in [0, max id] must occur. Connectivity is not checked here
  /// (see is_valid_partition).
  static SuperpixelPartition from_assignment(std::size_t height, std::size_t width,
                                             std::vector<std::int32_t> assignment);

  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  std::size_t pixel_count() const { return height_ * width_; }
  std::size_t count() const { return members_.size(); }

  std::int32_t id_at(std::size_t pixel) const { return assignment_[pixel]; }
  std::span<const std::int32_t> assignment() const { return assignment_; }
  std::span<const std::uint32_t> members(std::size_t sp) const { return members_.at(sp); }

  bool operator==(const SuperpixelPartition& other) const {
    return height_ == other.height_ && width_ == other.width_ &&
           assignment_ == other.assignment_;
  }

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<std::int32_t> assignment_;
  std::vector<std::vector<std::uint32_t>> members_;
};

/// Disjoint cover, 4-connectivity of every superpixel, and member/assignment
/// consistency. Exhaustive, O(H*W).
bool is_valid_partition(const SuperpixelPartition& partition);

/// A superpixel of a dataset image.
struct SuperpixelRef {
  std::uint32_t image = 0;
  std::uint32_t superpixel = 0;

  auto operator<=>(const SuperpixelRef&) const = default;
};

/// Rectangular r x c tiling with r*c == count, r <= height, c <= width; the
/// factorization whose aspect is closest to the image's is used. Leading rows
/// and columns absorb the remainder. Throws InfeasibleGrid.
SuperpixelPartition grid_partition(std::size_t height, std::size_t width, std::size_t count);

struct SlicParams {
  double compactness = 10.0;
  int iterations = 10;
};

/// SLIC-style k-means over (color, position) followed by a connectivity pass
/// that merges fragments until at most `count` superpixels remain.
/// Deterministic for fixed inputs.
SuperpixelPartition slic_partition(const Image& image, std::size_t count,
                                   const SlicParams& params = {});

/// Modal ground-truth class of a superpixel; lowest class index wins ties.
ClassId dominant_label(const SuperpixelPartition& partition, std::size_t sp,
                       const GroundTruthMask& gt);

/// Sorted distinct ground-truth classes present in a superpixel.
std::vector<ClassId> weak_labels(const SuperpixelPartition& partition, std::size_t sp,
                                 const GroundTruthMask& gt);

enum class LabelScheme { Dominant, Weak };

struct Annotation {
  SuperpixelRef ref;
  /// One entry for the dominant scheme; the full class set for the weak scheme.
  std::vector<ClassId> labels;
};

struct AnnotationBatch {
  std::vector<Annotation> items;
  std::size_t clicks = 0;
};

/// Simulated annotator. Dominant costs one click per superpixel, weak costs
/// one click per class present.
AnnotationBatch annotate(std::span<const SuperpixelRef> queries,
                         std::span<const SuperpixelPartition> partitions,
                         std::span<const GroundTruthMask> gts, LabelScheme scheme);

/// Writes `label` into every pixel of superpixel `sp`.
void expand_to_pixels(const SuperpixelPartition& partition, std::size_t sp, ClassId label,
                      PartialLabelMap& target);

/// The label map an annotator would produce by dominant-labeling every superpixel.
LabelMap dominant_label_map(const SuperpixelPartition& partition, const GroundTruthMask& gt);

struct LabelFidelity {
  std::size_t wrong_pixels = 0;
  std::size_t total_pixels = 0;
  double error_fraction() const {
    return total_pixels == 0 ? 0.0 : static_cast<double>(wrong_pixels) / total_pixels;
  }
};

/// Pixels mislabeled by dominant labeling, from the modal counts:
/// H*W - sum over superpixels of the modal class count.
LabelFidelity dominant_label_fidelity(const SuperpixelPartition& partition,
                                      const GroundTruthMask& gt);

}  // namespace oreal
