#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace oreal {

/// Class index in [0, C). Classes are 0-based throughout the library.
using ClassId = std::int32_t;

/// Sentinel for a pixel that has not been annotated yet. Serialized as -1.
inline constexpr ClassId kUnlabeled = -1;

inline constexpr double kProbabilityTolerance = 1e-6;

enum class ErrorKind {
  InvalidArgument,
  ShapeMismatch,
  NotNormalized,
  NegativeEntry,
  InfeasibleGrid,
  EmptySuperpixel,
  BudgetExceedsPool,
  NoLabels,
  DegenerateCurve,
  Io,
  Format,
};

std::string_view to_string(ErrorKind kind);

/// Library-wide exception. `kind()` is stable and is what the CLI reports.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Three-channel float image, row-major, interleaved RGB in [0, 1].
struct Image {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<float> rgb;

  Image() = default;
  Image(std::size_t h, std::size_t w, float fill = 0.0f)
      : height(h), width(w), rgb(h * w * 3, fill) {}

  std::size_t pixel_count() const { return height * width; }
  float& at(std::size_t pixel, std::size_t channel) { return rgb[pixel * 3 + channel]; }
  float at(std::size_t pixel, std::size_t channel) const { return rgb[pixel * 3 + channel]; }

  bool operator==(const Image&) const = default;
};

/// Per-pixel label grid. Used for ground-truth masks (all entries in [0, C)),
/// predicted label maps, and partial label maps (entries may be kUnlabeled).
struct LabelMap {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<ClassId> labels;

  LabelMap() = default;
  LabelMap(std::size_t h, std::size_t w, ClassId fill)
      : height(h), width(w), labels(h * w, fill) {}

  std::size_t pixel_count() const { return height * width; }
  bool same_shape(const LabelMap& other) const {
    return height == other.height && width == other.width;
  }

  bool operator==(const LabelMap&) const = default;
};

using GroundTruthMask = LabelMap;
using PartialLabelMap = LabelMap;

/// All-kUnlabeled partial label map of the given shape.
PartialLabelMap make_unlabeled_map(std::size_t height, std::size_t width);

/// Throws ShapeMismatch/InvalidArgument unless every label is in [0, num_classes).
void require_ground_truth(const LabelMap& mask, std::size_t num_classes);

/// Per-pixel categorical distributions over `num_classes` classes, stored as
/// 32-bit reals, pixel-major. Immutable after construction.
class ProbabilityMap {
 public:
  ProbabilityMap() = default;
  ProbabilityMap(std::size_t height, std::size_t width, std::size_t num_classes,
                 std::vector<float> probs);

  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  std::size_t num_classes() const { return num_classes_; }
  std::size_t pixel_count() const { return height_ * width_; }

  std::span<const float> pixel(std::size_t index) const {
    return {probs_.data() + index * num_classes_, num_classes_};
  }
  std::span<const float> data() const { return probs_; }

  bool operator==(const ProbabilityMap&) const = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::size_t num_classes_ = 0;
  std::vector<float> probs_;
};

struct ProbabilityMapIssue {
  enum class Kind { NotNormalized, NegativeEntry };
  Kind kind;
  std::size_t pixel;
  std::size_t class_index;  // NegativeEntry only
  double sum;               // NotNormalized only
};

/// nullopt when every row is non-negative and sums to 1 within
/// kProbabilityTolerance (accumulated in double). Negative entries are
/// reported before normalization errors for the same pixel.
std::optional<ProbabilityMapIssue> validate_probability_map(const ProbabilityMap& pm);

/// Throwing form of validate_probability_map.
void require_valid(const ProbabilityMap& pm);

/// Argmax decode; ties go to the lowest class index.
LabelMap predicted_label_map(const ProbabilityMap& pm);

/// Index of the largest entry, lowest index on ties.
std::size_t argmax(std::span<const float> values);

}  // namespace oreal
