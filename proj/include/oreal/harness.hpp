#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "oreal/model.hpp"
#include "oreal/scoring.hpp"
#include "oreal/strategies.hpp"
#include "oreal/superpixel.hpp"
#include "oreal/synthgen.hpp"

namespace oreal {

struct ExperimentConfig {
  StrategyKind strategy = StrategyKind::OREAL;
  AggregationMode mode = AggregationMode::Max;
  std::size_t budget = 60;  // superpixels per step
  std::size_t steps = 6;
  std::size_t seeds = 1;
  std::uint64_t root_seed = 0;
  LabelScheme scheme = LabelScheme::Dominant;
  TrainConfig training;
  std::size_t boundary_radius = 1;
  /// Wall-clock seconds are written only when enabled; otherwise 0, which
  /// keeps runs.csv byte-identical across reruns.
  bool record_timing = false;
  /// Worker threads for seeds; 0 picks hardware concurrency.
  std::size_t threads = 0;

  /// Throws InvalidArgument: budget >= C, steps >= 1, seeds >= 1, dominant scheme.
  void validate(std::size_t num_classes) const;
  /// e.g. "oreal-max", "random".
  std::string label() const;
};

void to_json(nlohmann::json& j, const ExperimentConfig& cfg);

struct RunRecord {
  std::uint64_t seed = 0;
  std::size_t step = 0;
  std::size_t clicks = 0;  // cumulative, i.e. the clicks behind the model of this step
  double miou_val = 0.0;
  double miou_test = 0.0;
  std::int64_t min_class_count = 0;
  double balance_entropy = 0.0;
  double boundary_frac = 0.0;  // of the query selected at this step
  double seconds = 0.0;

  bool operator==(const RunRecord&) const = default;
};

struct SeedOutcome {
  std::uint64_t seed = 0;
  std::vector<RunRecord> records;
  std::optional<double> aualc;  // empty when the seed was aborted
  std::string error;
  /// Every superpixel annotated by the end, in annotation order.
  std::vector<LabeledItem> labeled;
  /// The cold-start query followed by Q_1..Q_steps. The last one is selected
  /// but never annotated.
  std::vector<QuerySet> queries;
};

/// Model trained on the dominant labels of every training superpixel.
struct ReferenceModel {
  ClassifierWeights weights;
  double miou_val = 0.0;
  double miou_test = 0.0;
};

struct ExperimentResult {
  ExperimentConfig config;
  ReferenceModel reference;
  std::vector<SeedOutcome> seeds;
};

/// Features, validation masks and test masks shared by every run on a dataset.
class ExperimentContext {
 public:
  explicit ExperimentContext(const Dataset& dataset);

  const Dataset& dataset() const { return *dataset_; }
  std::span<const PixelFeatures> train_features() const;
  std::span<const PixelFeatures> val_features() const;
  std::span<const PixelFeatures> test_features() const;
  std::span<const LabelMap> val_masks() const { return val_masks_; }
  std::span<const SuperpixelPartition> train_partitions() const;
  std::span<const GroundTruthMask> train_masks() const;
  std::span<const GroundTruthMask> test_masks() const;

  /// Test mIoU of a model over the whole test split.
  double test_miou(const ClassifierWeights& weights) const;

 private:
  const Dataset* dataset_;
  std::vector<PixelFeatures> features_;
  std::vector<LabelMap> val_masks_;
};

ReferenceModel train_reference(const ExperimentContext& context, const TrainConfig& training);

/// Closed active-learning loop, one independent run per seed:
/// cold-start with a random query of `budget`; then for t = 1..steps train on
/// A_t (warm-started from t-1), select Q_t with the configured strategy,
/// record metrics, and fold the annotated Q_t into A_{t+1} (except after the
/// final step, so |A_steps| = steps * budget).
ExperimentResult run_experiment(const ExperimentConfig& cfg, const ExperimentContext& context,
                                const ReferenceModel* reference = nullptr);

/// Convenience overload that builds the context and reference itself.
ExperimentResult run_experiment(const ExperimentConfig& cfg, const Dataset& dataset);

/// Seed-specific stream derived from the root seed.
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t seed_index, std::uint64_t stream);

inline constexpr int kResultsFormatVersion = 1;
inline constexpr const char* kRunsCsvHeader =
    "seed,step,clicks,miou_val,miou_test,min_class_count,balance_entropy,boundary_frac,seconds";

std::string format_runs_csv(std::span<const RunRecord> records);
std::vector<RunRecord> parse_runs_csv(const std::string& text);

/// Writes runs.csv, summary.json and curves.svg into `dir`.
void emit_results(const ExperimentResult& result, const std::filesystem::path& dir);

}  // namespace oreal
