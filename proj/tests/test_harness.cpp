#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <set>
#include <sstream>

#include "oreal/harness.hpp"
#include "oreal/io.hpp"
#include "oreal/report.hpp"

using namespace oreal;

namespace {

const Dataset& toy_dataset() {
  static const Dataset ds = [] {
    DatasetConfig cfg;
    cfg.scene.height = 32;
    cfg.scene.width = 32;
    cfg.scene.num_classes = 3;
    cfg.scene.class_weights = {2.0, 1.0};
    cfg.superpixels_per_image = 16;
    cfg.n_train = 6;
    cfg.n_val = 2;
    cfg.n_test = 2;
    return generate_dataset(cfg);
  }();
  return ds;
}

ExperimentConfig toy_config(StrategyKind kind) {
  ExperimentConfig cfg;
  cfg.strategy = kind;
  cfg.budget = 5;
  cfg.steps = 2;
  cfg.seeds = 1;
  cfg.root_seed = 3;
  cfg.threads = 1;
  cfg.training.max_epochs = 150;
  return cfg;
}

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("oreal_test_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

std::size_t count_of(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

RunRecord sample_record(std::uint64_t seed, std::size_t step) {
  RunRecord r;
  r.seed = seed;
  r.step = step;
  r.clicks = 10 * step;
  r.miou_val = 0.5 + 0.1 * step;
  r.miou_test = 0.4 + 0.1 * step + 0.01 * seed;
  r.min_class_count = 2;
  r.balance_entropy = 0.75;
  r.boundary_frac = 0.5;
  return r;
}

}  // namespace

TEST_CASE("random strategy accounting over two steps") {
  const ExperimentContext ctx(toy_dataset());
  const auto cfg = toy_config(StrategyKind::Random);
  const auto result = run_experiment(cfg, ctx);
  REQUIRE(result.seeds.size() == 1);
  const auto& seed = result.seeds[0];
  CHECK(seed.error.empty());
  REQUIRE(seed.records.size() == 2);
  CHECK(seed.records[0].clicks == 5);
  CHECK(seed.records[1].clicks == 10);
  CHECK(seed.labeled.size() == cfg.steps * cfg.budget);
  REQUIRE(seed.aualc.has_value());

  // one click per dominant label
  std::vector<SuperpixelRef> refs;
  for (const auto& item : seed.labeled) refs.push_back(item.ref);
  const auto batch = annotate(refs, ctx.train_partitions(), ctx.train_masks(), LabelScheme::Dominant);
  CHECK(batch.clicks == seed.records.back().clicks);
  for (std::size_t i = 0; i < refs.size(); ++i) CHECK(batch.items[i].labels[0] == seed.labeled[i].label);
}

TEST_CASE("every strategy keeps the protocol invariants") {
  const ExperimentContext ctx(toy_dataset());
  const auto reference = train_reference(ctx, toy_config(StrategyKind::Random).training);
  for (const auto kind : kAllStrategies) {
    auto cfg = toy_config(kind);
    cfg.steps = 3;
    const auto result = run_experiment(cfg, ctx, &reference);
    const auto& seed = result.seeds[0];
    CHECK(seed.labeled.size() == 15);
    std::set<SuperpixelRef> distinct;
    for (const auto& item : seed.labeled) distinct.insert(item.ref);
    CHECK(distinct.size() == seed.labeled.size());
    for (std::size_t t = 1; t < seed.records.size(); ++t) {
      CHECK(seed.records[t].clicks == seed.records[t - 1].clicks + cfg.budget);
    }
  }
}

TEST_CASE("reruns produce identical CSV bytes") {
  const ExperimentContext ctx(toy_dataset());
  auto cfg = toy_config(StrategyKind::OREAL);
  cfg.seeds = 2;
  cfg.threads = 2;
  const auto a = run_experiment(cfg, ctx);
  cfg.threads = 1;
  const auto b = run_experiment(cfg, ctx);
  const auto da = scratch("rerun_a"), db = scratch("rerun_b");
  emit_results(a, da);
  emit_results(b, db);
  CHECK(io::read_text(da / "runs.csv") == io::read_text(db / "runs.csv"));
  CHECK(io::read_text(da / "summary.json") == io::read_text(db / "summary.json"));
  std::filesystem::remove_all(da);
  std::filesystem::remove_all(db);
}

TEST_CASE("experiment configs are validated") {
  ExperimentConfig cfg;
  CHECK_NOTHROW(cfg.validate(5));
  cfg.budget = 4;
  CHECK_THROWS_AS(cfg.validate(5), Error);
  cfg = ExperimentConfig{};
  cfg.steps = 0;
  CHECK_THROWS_AS(cfg.validate(5), Error);
  cfg = ExperimentConfig{};
  cfg.seeds = 0;
  CHECK_THROWS_AS(cfg.validate(5), Error);
  cfg = ExperimentConfig{};
  cfg.scheme = LabelScheme::Weak;
  CHECK_THROWS_AS(cfg.validate(5), Error);
}

TEST_CASE("labels and derived seeds") {
  ExperimentConfig cfg;
  CHECK(cfg.label() == "oreal-max");
  cfg.strategy = StrategyKind::Random;
  CHECK(cfg.label() == "random");
  cfg.strategy = StrategyKind::BvSB;
  cfg.mode = AggregationMode::Mean;
  CHECK(cfg.label() == "bvsb-mean");
  CHECK(derive_seed(0, 0, 0) == derive_seed(0, 0, 0));
  CHECK(derive_seed(0, 0, 0) != derive_seed(0, 1, 0));
  CHECK(derive_seed(0, 0, 0) != derive_seed(0, 0, 1));
  CHECK(derive_seed(0, 0, 0) != derive_seed(1, 0, 0));
}

TEST_CASE("runs.csv formatting") {
  const std::vector<RunRecord> one{sample_record(0, 1)};
  const auto csv = format_runs_csv(one);
  CHECK(count_of(csv, "\n") == 2);
  CHECK(csv.rfind(std::string(kRunsCsvHeader) + "\n", 0) == 0);
  const auto back = parse_runs_csv(csv);
  REQUIRE(back.size() == 1);
  CHECK(format_runs_csv(back) == csv);
  CHECK_THROWS_AS(parse_runs_csv("seed,step\n1,2\n"), Error);
  CHECK_THROWS_AS(parse_runs_csv(std::string(kRunsCsvHeader) + "\n1,2,3\n"), Error);
}

TEST_CASE("summary.json is a serialization fixed point") {
  std::vector<RunRecord> records;
  for (std::uint64_t s = 0; s < 3; ++s) {
    for (std::size_t t = 1; t <= 3; ++t) records.push_back(sample_record(s, t));
  }
  const auto summary = summarize("oreal-max", nlohmann::json{{"strategy", "oreal"}}, 0.9, records);
  CHECK(summary.aualc_per_seed.size() == 3);
  CHECK(summary.curve.size() == 3);
  const StrategySummary list[] = {summary};
  const auto text = dump_summary(summary_document(list));
  CHECK(dump_summary(nlohmann::json::parse(text)) == text);
  const auto doc = nlohmann::json::parse(text);
  CHECK(doc.at("format_version") == kResultsFormatVersion);
  CHECK(doc.at("curve_start") == "after_step_1");
}

TEST_CASE("a single seed has zero spread") {
  const std::vector<RunRecord> records{sample_record(0, 1), sample_record(0, 2)};
  const auto s = summarize("random", nlohmann::json::object(), 0.9, records);
  REQUIRE(s.aualc_per_seed.size() == 1);
  CHECK(s.aualc_std == 0.0);
}

TEST_CASE("report merges run directories into one chart") {
  const ExperimentContext ctx(toy_dataset());
  const auto reference = train_reference(ctx, toy_config(StrategyKind::Random).training);
  std::vector<std::filesystem::path> dirs;
  for (const auto kind : {StrategyKind::Random, StrategyKind::OREAL}) {
    const auto dir = scratch(std::string("report_") + std::string(to_string(kind)));
    emit_results(run_experiment(toy_config(kind), ctx, &reference), dir);
    CHECK(count_of(io::read_text(dir / "curves.svg"), "<path") == 1);
    dirs.push_back(dir);
  }
  const auto out = scratch("report_out");
  const auto merged = write_report(dirs, out);
  CHECK(merged.size() == 2);
  const auto svg = io::read_text(out / "curves.svg");
  CHECK(count_of(svg, "<path") == 2);
  const auto csv = io::read_text(out / "runs_merged.csv");
  CHECK(csv.rfind("strategy,seed,step", 0) == 0);
  CHECK(count_of(csv, "\nrandom,") == 2);
  CHECK(count_of(csv, "\noreal-max,") == 2);
  const auto summary = io::read_text(out / "summary.json");
  CHECK(dump_summary(nlohmann::json::parse(summary)) == summary);

  CHECK_THROWS_AS(write_report({}, out), Error);
  const std::vector<std::filesystem::path> merged_dir{out};
  CHECK_THROWS_AS(write_report(merged_dir, scratch("report_twice")), Error);
  for (const auto& d : dirs) std::filesystem::remove_all(d);
  std::filesystem::remove_all(out);
}

TEST_CASE("binary containers round-trip") {
  const ProbabilityMap pm(2, 3, 2, {0.1f, 0.9f, 0.5f, 0.5f, 1.0f, 0.0f, 0.3f, 0.7f, 0.2f, 0.8f, 0.6f, 0.4f});
  CHECK(io::decode_probability_map(io::encode(pm)) == pm);

  LabelMap lm(2, 2, 1);
  lm.labels[3] = kUnlabeled;
  CHECK(io::decode_label_map(io::encode(lm, 3)) == lm);

  Image img(2, 2, 0.25f);
  img.at(3, 2) = 0.75f;
  CHECK(io::decode_image(io::encode(img)) == img);

  const auto part = grid_partition(6, 6, 4);
  CHECK(io::decode_partition(io::encode(part)) == part);

  auto w = ClassifierWeights::zeros(3);
  for (std::size_t i = 0; i < w.weights.size(); ++i) {
    w.weights[i] = 0.5 * static_cast<double>(i) - 3.0;
    w.shadow[i] = -w.weights[i];
  }
  CHECK(io::decode_weights(io::encode(w)) == w);

  const auto bytes = io::encode(pm);
  CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "ORPM");
  CHECK(std::string(io::encode(lm, 3).data(), 4) == "ORLM");
  CHECK(std::string(io::encode(img).data(), 4) == "ORIM");
  CHECK(std::string(io::encode(part).data(), 4) == "ORSP");
  CHECK(std::string(io::encode(w).data(), 4) == "ORWT");
}

TEST_CASE("corrupt containers are rejected") {
  const ProbabilityMap pm(1, 1, 2, {0.5f, 0.5f});
  auto bytes = io::encode(pm);
  auto truncated = bytes;
  truncated.pop_back();
  auto kind_of = [](auto fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::InvalidArgument;
  };
  CHECK(kind_of([&] { io::decode_probability_map(truncated); }) == ErrorKind::Format);
  CHECK(kind_of([&] { io::decode_image(bytes); }) == ErrorKind::Format);
  CHECK(kind_of([&] { io::decode_label_map({}); }) == ErrorKind::Format);
  CHECK(kind_of([] { io::read_file("/nonexistent/oreal/file.bin"); }) == ErrorKind::Io);
}
