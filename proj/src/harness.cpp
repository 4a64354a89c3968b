#include "oreal/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <sstream>
#include <thread>

#include "oreal/io.hpp"
#include "oreal/metrics.hpp"
#include "oreal/report.hpp"

namespace oreal {

namespace {

std::uint64_t mix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::vector<LabeledItem> to_labeled(const AnnotationBatch& batch) {
  std::vector<LabeledItem> items;
  items.reserve(batch.items.size());
  for (const auto& a : batch.items) items.push_back(LabeledItem{a.ref, a.labels.front()});
  return items;
}

class SeedRun {
 public:
  SeedRun(const ExperimentConfig& cfg, const ExperimentContext& context, const ReferenceModel& ref,
          std::uint64_t seed)
      : cfg_(cfg), ctx_(context), reference_(ref), seed_(seed) {}

  SeedOutcome operator()() {
    SeedOutcome outcome;
    outcome.seed = seed_;
    try {
      run(outcome);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NoLabels) throw;
      outcome.error = e.what();
      outcome.aualc.reset();
    }
    return outcome;
  }

 private:
  void run(SeedOutcome& outcome) {
    const auto partitions = ctx_.train_partitions();
    const auto masks = ctx_.train_masks();
    const std::size_t classes = ctx_.dataset().num_classes();

    ALState state = ALState::initial(partitions);
    std::vector<PartialLabelMap> partial;
    partial.reserve(partitions.size());
    for (const auto& p : partitions) partial.push_back(make_unlabeled_map(p.height(), p.width()));

    std::size_t clicks = 0;
    auto fold = [&](const QuerySet& query) {
      const auto batch = annotate(query, partitions, masks, cfg_.scheme);
      clicks += batch.clicks;
      const auto items = to_labeled(batch);
      state.absorb(items);
      for (const auto& item : items) {
        expand_to_pixels(partitions[item.ref.image], item.ref.superpixel, item.label,
                         partial[item.ref.image]);
      }
    };

    const std::size_t cold = std::min(cfg_.budget, state.unlabeled.size());
    outcome.queries.push_back(select_random(state, cold, derive_seed(cfg_.root_seed, seed_, 0)));
    fold(outcome.queries.back());

    std::optional<ClassifierWeights> previous;
    std::vector<ProbabilityMap> probabilities(partitions.size());
    ALCurve curve;
    curve.reference = reference_.miou_test;

    for (std::size_t t = 1; t <= cfg_.steps; ++t) {
      state.step = t;
      const auto start = std::chrono::steady_clock::now();

      const TrainingData data{ctx_.train_features(), partial};
      const ValidationData validation{ctx_.val_features(), ctx_.val_masks()};
      const auto trained = train(data, validation, classes, previous ? &*previous : nullptr,
                                 cfg_.training);
      previous = trained.model;

      RunRecord record;
      record.seed = seed_;
      record.step = t;
      record.clicks = clicks;
      record.miou_val = trained.best_validation_miou;
      record.miou_test = ctx_.test_miou(trained.model);
      const auto balance = balance_report(state.labels(), classes);
      record.min_class_count = balance.min_class_count;
      record.balance_entropy = balance.normalized_entropy;

      QuerySet query;
      const std::size_t budget = std::min(cfg_.budget, state.unlabeled.size());
      if (budget > 0) {
        if (cfg_.strategy != StrategyKind::Random) {
          const auto features = ctx_.train_features();
          for (std::size_t i = 0; i < features.size(); ++i) {
            probabilities[i] = predict_proba(trained.model, features[i]);
          }
        }
        const PoolView pool{probabilities, partitions};
        query = select(cfg_.strategy, state, pool, budget, cfg_.mode,
                       derive_seed(cfg_.root_seed, seed_, t));
        record.boundary_frac = boundary_fraction(query, partitions, masks, cfg_.boundary_radius);
      }
      if (t < cfg_.steps && !query.empty()) fold(query);
      outcome.queries.push_back(std::move(query));

      if (cfg_.record_timing) {
        record.seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      }
      curve.points.push_back(
          CurvePoint{static_cast<double>(record.clicks), record.miou_test});
      outcome.records.push_back(record);
    }

    if (curve.points.size() >= 2 && curve.reference > 0.0) outcome.aualc = aualc(curve);
    outcome.labeled = state.labeled;
  }

  const ExperimentConfig& cfg_;
  const ExperimentContext& ctx_;
  const ReferenceModel& reference_;
  std::uint64_t seed_;
};

}  // namespace

void ExperimentConfig::validate(std::size_t num_classes) const {
  if (budget < num_classes) {
    throw Error(ErrorKind::InvalidArgument, "per-step budget must be at least the class count");
  }
  if (steps < 1) throw Error(ErrorKind::InvalidArgument, "at least one AL step is required");
  if (seeds < 1) throw Error(ErrorKind::InvalidArgument, "at least one seed is required");
  if (scheme != LabelScheme::Dominant) {
    throw Error(ErrorKind::InvalidArgument,
                "the weak labeling scheme cannot drive training; use --scheme dominant");
  }
}

std::string ExperimentConfig::label() const {
  std::string out(to_string(strategy));
  if (strategy != StrategyKind::Random) {
    out += "-";
    out += to_string(mode);
  }
  return out;
}

void to_json(nlohmann::json& j, const ExperimentConfig& cfg) {
  j = nlohmann::json{{"strategy", to_string(cfg.strategy)},
                     {"aggregation", to_string(cfg.mode)},
                     {"budget", cfg.budget},
                     {"steps", cfg.steps},
                     {"seeds", cfg.seeds},
                     {"root_seed", cfg.root_seed},
                     {"scheme", cfg.scheme == LabelScheme::Dominant ? "dominant" : "weak"},
                     {"learning_rate", cfg.training.learning_rate},
                     {"max_epochs", cfg.training.max_epochs},
                     {"patience", cfg.training.patience},
                     {"warmup_epochs", cfg.training.warmup_epochs},
                     {"polyak", cfg.training.polyak},
                     {"boundary_radius", cfg.boundary_radius}};
}

std::uint64_t derive_seed(std::uint64_t root, std::uint64_t seed_index, std::uint64_t stream) {
  return mix(mix(root) ^ mix(seed_index * 0x100000001B3ull + 1) ^ mix(stream + 0x5bd1e995));
}

ExperimentContext::ExperimentContext(const Dataset& dataset) : dataset_(&dataset) {
  features_.reserve(dataset.images.size());
  for (const auto& image : dataset.images) features_.push_back(extract_features(image));
  for (std::size_t i = dataset.val.begin; i < dataset.val.end; ++i) {
    val_masks_.push_back(dominant_label_map(dataset.partitions[i], dataset.masks[i]));
  }
}

std::span<const PixelFeatures> ExperimentContext::train_features() const {
  return Dataset::slice(features_, dataset_->train);
}
std::span<const PixelFeatures> ExperimentContext::val_features() const {
  return Dataset::slice(features_, dataset_->val);
}
std::span<const PixelFeatures> ExperimentContext::test_features() const {
  return Dataset::slice(features_, dataset_->test);
}
std::span<const SuperpixelPartition> ExperimentContext::train_partitions() const {
  return Dataset::slice(dataset_->partitions, dataset_->train);
}
std::span<const GroundTruthMask> ExperimentContext::train_masks() const {
  return Dataset::slice(dataset_->masks, dataset_->train);
}
std::span<const GroundTruthMask> ExperimentContext::test_masks() const {
  return Dataset::slice(dataset_->masks, dataset_->test);
}

double ExperimentContext::test_miou(const ClassifierWeights& weights) const {
  ConfusionMatrix cm(dataset_->num_classes());
  const auto features = test_features();
  const auto masks = test_masks();
  for (std::size_t i = 0; i < features.size(); ++i) {
    cm.add(predicted_label_map(predict_proba(weights, features[i])), masks[i]);
  }
  return cm.miou();
}

ReferenceModel train_reference(const ExperimentContext& context, const TrainConfig& training) {
  const auto partitions = context.train_partitions();
  const auto masks = context.train_masks();
  std::vector<PartialLabelMap> labels;
  labels.reserve(partitions.size());
  for (std::size_t i = 0; i < partitions.size(); ++i) {
    labels.push_back(dominant_label_map(partitions[i], masks[i]));
  }
  const TrainingData data{context.train_features(), labels};
  const ValidationData validation{context.val_features(), context.val_masks()};
  const auto trained = train(data, validation, context.dataset().num_classes(), nullptr, training);
  ReferenceModel ref;
  ref.weights = trained.model;
  ref.miou_val = trained.best_validation_miou;
  ref.miou_test = context.test_miou(trained.model);
  return ref;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, const ExperimentContext& context,
                                const ReferenceModel* reference) {
  const std::size_t classes = context.dataset().num_classes();
  cfg.validate(classes);

  ExperimentResult result;
  result.config = cfg;
  result.reference = reference ? *reference : train_reference(context, cfg.training);
  result.seeds.resize(cfg.seeds);

  std::size_t workers = cfg.threads ? cfg.threads : std::thread::hardware_concurrency();
  workers = std::clamp<std::size_t>(workers, 1, cfg.seeds);
  if (workers == 1) {
    for (std::size_t s = 0; s < cfg.seeds; ++s) {
      result.seeds[s] = SeedRun(cfg, context, result.reference, s)();
    }
    return result;
  }

  // Seeds are independent; each worker writes only its own slots.
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> failures(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t s = w; s < cfg.seeds; s += workers) {
          result.seeds[s] = SeedRun(cfg, context, result.reference, s)();
        }
      } catch (...) {
        failures[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }
  return result;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, const Dataset& dataset) {
  const ExperimentContext context(dataset);
  return run_experiment(cfg, context, nullptr);
}

std::string format_runs_csv(std::span<const RunRecord> records) {
  std::string out = kRunsCsvHeader;
  out += "\n";
  char line[256];
  for (const auto& r : records) {
    std::snprintf(line, sizeof line, "%llu,%zu,%zu,%.6f,%.6f,%lld,%.6f,%.6f,%.3f\n",
                  static_cast<unsigned long long>(r.seed), r.step, r.clicks, r.miou_val,
                  r.miou_test, static_cast<long long>(r.min_class_count), r.balance_entropy,
                  r.boundary_frac, r.seconds);
    out += line;
  }
  return out;
}

std::vector<RunRecord> parse_runs_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kRunsCsvHeader) {
    throw Error(ErrorKind::Format, "runs.csv header does not match the expected columns");
  }
  std::vector<RunRecord> records;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    RunRecord r;
    unsigned long long seed = 0;
    long long min_count = 0;
    const int fields = std::sscanf(line.c_str(), "%llu,%zu,%zu,%lf,%lf,%lld,%lf,%lf,%lf", &seed,
                                   &r.step, &r.clicks, &r.miou_val, &r.miou_test, &min_count,
                                   &r.balance_entropy, &r.boundary_frac, &r.seconds);
    if (fields != 9) throw Error(ErrorKind::Format, "malformed runs.csv row: " + line);
    r.seed = seed;
    r.min_class_count = min_count;
    records.push_back(r);
  }
  return records;
}

void emit_results(const ExperimentResult& result, const std::filesystem::path& dir) {
  std::vector<RunRecord> records;
  for (const auto& seed : result.seeds) {
    records.insert(records.end(), seed.records.begin(), seed.records.end());
  }
  if (records.empty()) throw Error(ErrorKind::InvalidArgument, "no run records to emit");

  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create " + dir.string() + ": " + ec.message());

  const StrategySummary summary = summarize(result);
  io::write_text(dir / "runs.csv", format_runs_csv(records));
  io::write_text(dir / "summary.json", dump_summary(summary_document({&summary, 1})));
  io::write_text(dir / "curves.svg", render_curves_svg({&summary, 1}));
}

}  // namespace oreal
