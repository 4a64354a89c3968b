#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "oreal/harness.hpp"

namespace oreal {

struct CurveStat {
  std::size_t step = 0;
  double clicks = 0.0;
  double miou_mean = 0.0;
  double miou_std = 0.0;
};

/// Aggregate view of one strategy's runs across seeds.
struct StrategySummary {
  std::string label;
  nlohmann::json config;
  double reference_miou = 0.0;
  std::vector<RunRecord> records;
  std::vector<double> aualc_per_seed;  // seeds with at least two steps, in seed order
  double aualc_mean = 0.0;
  double aualc_std = 0.0;  // sample standard deviation, 0 for a single seed
  std::vector<CurveStat> curve;
};

StrategySummary summarize(std::string label, nlohmann::json config, double reference_miou,
                          std::vector<RunRecord> records);

StrategySummary summarize(const ExperimentResult& result);

/// summary.json document; dumped with nlohmann's sorted keys and indent 2,
/// which makes parse -> dump a fixed point.
nlohmann::json summary_document(std::span<const StrategySummary> strategies);
std::string dump_summary(const nlohmann::json& document);

/// mIoU-vs-clicks chart: one <path> per strategy over a mean +/- std band.
std::string render_curves_svg(std::span<const StrategySummary> strategies);

/// Merges run directories (each holding runs.csv + summary.json for one
/// strategy) into `out`: runs_merged.csv (strategy column first),
/// summary.json and curves.svg. Returns the merged summaries.
std::vector<StrategySummary> write_report(std::span<const std::filesystem::path> inputs,
                                          const std::filesystem::path& out);

}  // namespace oreal
