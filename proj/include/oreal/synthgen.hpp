#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <json.hpp>

#include "oreal/core.hpp"
#include "oreal/superpixel.hpp"

namespace oreal {

/// Procedural scene parameters. Class 0 is background; foreground shapes take
/// classes 1..C-1 with probability proportional to `class_weights`.
struct SceneConfig {
  std::size_t height = 64;
  std::size_t width = 64;
  std::size_t num_classes = 5;
  std::size_t min_shapes = 4;
  std::size_t max_shapes = 8;
  /// One weight per foreground class (length C-1).
  std::vector<double> class_weights = {4.0, 4.0, 2.0, 1.0};
  /// Mean color per class (length C). Empty selects the built-in palette.
  std::vector<std::array<float, 3>> class_colors;
  double noise_sigma = 0.1;
  /// Shape radius range as a fraction of min(height, width).
  double min_radius = 0.1;
  double max_radius = 0.25;
  std::uint64_t seed = 7;

  /// Throws InvalidArgument on a malformed config.
  void validate() const;
  std::array<float, 3> color_of(std::size_t class_id) const;
};

struct Scene {
  Image image;
  GroundTruthMask mask;
};

/// Deterministic in (cfg.seed, index).
Scene generate_scene(const SceneConfig& cfg, std::size_t index);

struct DatasetConfig {
  SceneConfig scene;
  std::size_t n_train = 40;
  std::size_t n_val = 8;
  std::size_t n_test = 20;
  std::size_t superpixels_per_image = 36;
  SlicParams slic;
};

struct SplitRange {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const { return end - begin; }
};

/// Scenes with their ground truth and superpixels. Train, validation and test
/// occupy consecutive disjoint index ranges, in that order.
struct Dataset {
  DatasetConfig config;
  std::vector<Image> images;
  std::vector<GroundTruthMask> masks;
  std::vector<SuperpixelPartition> partitions;
  SplitRange train;
  SplitRange val;
  SplitRange test;

  std::size_t num_classes() const { return config.scene.num_classes; }

  template <typename T>
  static std::span<const T> slice(const std::vector<T>& all, SplitRange range) {
    return std::span<const T>(all).subspan(range.begin, range.size());
  }
};

Dataset generate_dataset(const DatasetConfig& cfg);

/// Fraction of pixels per class over a split.
std::vector<double> class_pixel_frequencies(const Dataset& dataset, SplitRange range);

void to_json(nlohmann::json& j, const SceneConfig& cfg);
void from_json(const nlohmann::json& j, SceneConfig& cfg);
void to_json(nlohmann::json& j, const DatasetConfig& cfg);
void from_json(const nlohmann::json& j, DatasetConfig& cfg);

inline constexpr int kDatasetFormatVersion = 1;

/// Writes manifest.json plus images/, masks/ and partitions/ containers.
void save_dataset(const Dataset& dataset, const std::filesystem::path& dir);
Dataset load_dataset(const std::filesystem::path& dir);

}  // namespace oreal
