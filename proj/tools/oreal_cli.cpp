// Command-line front end: dataset generation, active-learning runs, report
// merging and the class-debt brute-force check.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "oreal/bruteforce.hpp"
#include "oreal/harness.hpp"
#include "oreal/io.hpp"
#include "oreal/report.hpp"
#include "oreal/synthgen.hpp"

namespace {

int fail(std::string_view kind, const std::string& message, int code = 1) {
  const nlohmann::json err{{"error", {{"kind", kind}, {"message", message}}}};
  std::cerr << err.dump() << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Patch-based active learning for semantic segmentation"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "Synthesize a dataset with superpixels");
  std::string gen_config;
  std::string gen_out;
  std::optional<std::uint64_t> gen_seed;
  gen->add_option("--config", gen_config, "Dataset config (JSON)")->required();
  gen->add_option("--out", gen_out, "Output directory")->required();
  gen->add_option("--seed", gen_seed, "Override the scene seed");

  // run
  auto* run = app.add_subcommand("run", "Run the active-learning loop for one strategy");
  std::string run_data;
  std::string run_out;
  std::string run_strategy = "oreal";
  std::string run_agg = "max";
  std::string run_scheme = "dominant";
  oreal::ExperimentConfig run_cfg;
  run->add_option("--data", run_data, "Dataset directory written by gen")->required();
  run->add_option("--strategy", run_strategy,
                  "random|entropy|bvsb|revisiting_sp|pixelbal|cbal|oreal");
  run->add_option("--agg", run_agg, "Superpixel aggregation: mean|max");
  run->add_option("--budget", run_cfg.budget, "Superpixels annotated per step");
  run->add_option("--steps", run_cfg.steps, "Active-learning steps");
  run->add_option("--seeds", run_cfg.seeds, "Independent repetitions");
  run->add_option("--seed", run_cfg.root_seed, "Root seed for all randomness");
  run->add_option("--scheme", run_scheme, "Labeling scheme (only dominant trains)");
  run->add_option("--lr", run_cfg.training.learning_rate, "Initial learning rate");
  run->add_option("--max-epochs", run_cfg.training.max_epochs, "Epoch cap per step");
  run->add_option("--threads", run_cfg.threads, "Worker threads (0 = all cores)");
  run->add_flag("--timing", run_cfg.record_timing, "Record wall-clock seconds per step");
  run->add_option("--out", run_out, "Output directory")->required();

  // report
  auto* report = app.add_subcommand("report", "Merge run directories into one report");
  std::vector<std::string> report_in;
  std::string report_out;
  report->add_option("--in", report_in, "Run directories")->required();
  report->add_option("--out", report_out, "Output directory")->required();

  // bruteforce-delta
  auto* brute = app.add_subcommand("bruteforce-delta",
                                   "Check class-debt allocation against exhaustive search");
  std::size_t brute_classes = 3;
  std::int64_t brute_max_count = 6;
  std::int64_t brute_budget = 6;
  brute->add_option("--classes", brute_classes, "Number of classes")->required();
  brute->add_option("--max-count", brute_max_count, "Largest per-class count")->required();
  brute->add_option("--budget", brute_budget, "Largest budget")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("Usage", e.what(), 2);
  }

  try {
    if (gen->parsed()) {
      oreal::DatasetConfig cfg;
      try {
        cfg = nlohmann::json::parse(oreal::io::read_text(gen_config)).get<oreal::DatasetConfig>();
      } catch (const nlohmann::json::exception& e) {
        return fail("Format", gen_config + ": " + e.what());
      }
      if (gen_seed) cfg.scene.seed = *gen_seed;
      const auto dataset = oreal::generate_dataset(cfg);
      oreal::save_dataset(dataset, gen_out);
      std::cout << "wrote " << dataset.images.size() << " scenes to " << gen_out << "\n";
      return 0;
    }

    if (run->parsed()) {
      run_cfg.strategy = oreal::parse_strategy(run_strategy);
      run_cfg.mode = oreal::parse_aggregation(run_agg);
      if (run_scheme == "weak") {
        run_cfg.scheme = oreal::LabelScheme::Weak;
      } else if (run_scheme != "dominant") {
        return fail("InvalidArgument", "unknown scheme '" + run_scheme + "'");
      }
      const auto dataset = oreal::load_dataset(run_data);
      run_cfg.validate(dataset.num_classes());
      const auto result = oreal::run_experiment(run_cfg, dataset);
      oreal::emit_results(result, run_out);
      const auto summary = oreal::summarize(result);
      std::cout << summary.label << ": AuALC " << summary.aualc_mean << " +/- "
                << summary.aualc_std << " over " << summary.aualc_per_seed.size()
                << " seed(s); reference mIoU " << result.reference.miou_test << "\n";
      return 0;
    }

    if (report->parsed()) {
      const std::vector<std::filesystem::path> inputs(report_in.begin(), report_in.end());
      const auto merged = oreal::write_report(inputs, report_out);
      for (const auto& s : merged) {
        std::cout << s.label << ": AuALC " << s.aualc_mean << " +/- " << s.aualc_std << "\n";
      }
      return 0;
    }

    if (brute->parsed()) {
      const auto sweep =
          oreal::oracle::sweep_items_per_class(brute_classes, brute_max_count, brute_budget);
      const nlohmann::json out{{"cases", sweep.cases},
                               {"mismatches", sweep.mismatches},
                               {"failures", sweep.failures}};
      std::cout << out.dump(2) << "\n";
      return sweep.mismatches == 0 ? 0 : 1;
    }
  } catch (const oreal::Error& e) {
    return fail(oreal::to_string(e.kind()), e.what());
  } catch (const std::exception& e) {
    return fail("Internal", e.what());
  }
  return 0;
}
