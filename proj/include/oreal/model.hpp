#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "oreal/core.hpp"

namespace oreal {

/// color (3), normalized x/y (2), 3x3 mean per channel (3), 3x3 std per channel (3).
inline constexpr std::size_t kFeatureDim = 11;
/// Features plus the bias term.
inline constexpr std::size_t kParamDim = kFeatureDim + 1;

struct PixelFeatures {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> values;  // [pixel][kFeatureDim]

  std::span<const double> pixel(std::size_t index) const {
    return {values.data() + index * kFeatureDim, kFeatureDim};
  }
  std::size_t pixel_count() const { return height * width; }
};

/// Deterministic per-pixel features. Windows at the border clamp to the edge;
/// coordinates are x/(W-1), y/(H-1) with 0/0 taken as 0.
PixelFeatures extract_features(const Image& image);

/// Softmax classifier parameters, row-major [class][kParamDim] (bias last),
/// with the Polyak-averaged shadow copy kept alongside.
struct ClassifierWeights {
  std::size_t num_classes = 0;
  std::vector<double> weights;
  std::vector<double> shadow;

  static ClassifierWeights zeros(std::size_t num_classes);

  bool operator==(const ClassifierWeights&) const = default;
};

struct TrainConfig {
  double learning_rate = 0.1;
  int max_epochs = 500;
  int patience = 10;
  /// Epochs before patience starts counting; the shadow needs about
  /// 1 / (1 - polyak) epochs to catch up with the live weights.
  int warmup_epochs = 100;
  double polyak = 0.99;
  /// Halvings of the step before training is considered converged.
  int max_halvings = 40;
};

/// Images with partial labels; kUnlabeled pixels are ignored.
struct TrainingData {
  std::span<const PixelFeatures> features;
  std::span<const PartialLabelMap> labels;
};

/// Fully labeled validation images. May be empty, which disables early stopping.
struct ValidationData {
  std::span<const PixelFeatures> features;
  std::span<const LabelMap> masks;
};

struct TrainResult {
  /// `weights` holds the shadow parameters at the best validation point;
  /// `shadow` equals it, so the result can seed a warm start directly.
  ClassifierWeights model;
  int epochs = 0;
  int best_epoch = 0;
  double best_validation_miou = 0.0;
  std::vector<double> loss_history;  // accepted full-batch losses, epoch 0 first
};

/// Full-batch gradient descent on the mean cross-entropy of labeled pixels.
/// A step that would raise the loss is undone and the learning rate halved.
/// The shadow is updated as shadow <- a*shadow + (1-a)*w after every epoch
/// and scored on the validation set; training stops once `patience` epochs
/// pass without a new best. Throws NoLabels.
TrainResult train(const TrainingData& data, const ValidationData& validation,
                  std::size_t num_classes, const ClassifierWeights* warm_start,
                  const TrainConfig& config);

struct LossAndGradient {
  double loss = 0.0;
  std::vector<double> gradient;  // same layout as ClassifierWeights::weights
  std::size_t samples = 0;
};

/// Mean cross-entropy over the labeled pixels and its analytic gradient.
LossAndGradient cross_entropy(std::span<const double> weights, std::size_t num_classes,
                              const TrainingData& data);

/// Softmax of the class logits at every pixel, using `weights.weights`.
ProbabilityMap predict_proba(const ClassifierWeights& weights, const PixelFeatures& features);

}  // namespace oreal
