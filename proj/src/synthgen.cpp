#include "oreal/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <random>
#include <sstream>

#include "oreal/io.hpp"

namespace oreal {

namespace {

// Corners of the RGB cube pulled in from the faces; each is an extreme point,
// so colors alone are linearly separable when noise is off.
constexpr std::array<std::array<float, 3>, 8> kPalette = {{
    {0.25f, 0.25f, 0.25f},
    {0.75f, 0.25f, 0.25f},
    {0.25f, 0.75f, 0.25f},
    {0.25f, 0.25f, 0.75f},
    {0.75f, 0.75f, 0.25f},
    {0.75f, 0.25f, 0.75f},
    {0.25f, 0.75f, 0.75f},
    {0.75f, 0.75f, 0.75f},
}};

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

enum class Shape { Disc, Rectangle, Triangle };

struct Point {
  double x, y;
};

double cross(Point a, Point b, Point p) { return (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x); }

std::string scene_name(std::size_t index) {
  std::ostringstream name;
  name << "scene_" << std::setw(5) << std::setfill('0') << index;
  return name.str();
}

}  // namespace

void SceneConfig::validate() const {
  if (height == 0 || width == 0) throw Error(ErrorKind::InvalidArgument, "scene must be non-empty");
  if (num_classes < 2) throw Error(ErrorKind::InvalidArgument, "scenes need at least two classes");
  if (class_weights.size() != num_classes - 1) {
    throw Error(ErrorKind::InvalidArgument, "class_weights needs one entry per foreground class");
  }
  if (std::any_of(class_weights.begin(), class_weights.end(), [](double w) { return !(w >= 0.0); }) ||
      std::all_of(class_weights.begin(), class_weights.end(), [](double w) { return w == 0.0; })) {
    throw Error(ErrorKind::InvalidArgument, "class_weights must be non-negative and not all zero");
  }
  if (!class_colors.empty() && class_colors.size() != num_classes) {
    throw Error(ErrorKind::InvalidArgument, "class_colors needs one color per class");
  }
  if (class_colors.empty() && num_classes > kPalette.size()) {
    throw Error(ErrorKind::InvalidArgument, "built-in palette covers at most 8 classes");
  }
  if (!(noise_sigma >= 0.0)) throw Error(ErrorKind::InvalidArgument, "noise sigma must be >= 0");
  if (min_shapes > max_shapes) throw Error(ErrorKind::InvalidArgument, "min_shapes > max_shapes");
  if (!(min_radius > 0.0) || min_radius > max_radius) {
    throw Error(ErrorKind::InvalidArgument, "radius range must satisfy 0 < min <= max");
  }
}

std::array<float, 3> SceneConfig::color_of(std::size_t class_id) const {
  return class_colors.empty() ? kPalette[class_id] : class_colors[class_id];
}

Scene generate_scene(const SceneConfig& cfg, std::size_t index) {
  cfg.validate();
  std::mt19937_64 rng(splitmix64(cfg.seed ^ splitmix64(index + 1)));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> shape_count(cfg.min_shapes, cfg.max_shapes);
  std::uniform_int_distribution<int> shape_kind(0, 2);
  std::discrete_distribution<std::size_t> pick_class(cfg.class_weights.begin(), cfg.class_weights.end());

  const std::size_t h = cfg.height;
  const std::size_t w = cfg.width;
  const double scale = static_cast<double>(std::min(h, w));
  auto radius = [&] { return scale * (cfg.min_radius + (cfg.max_radius - cfg.min_radius) * unit(rng)); };

  Scene scene{Image(h, w), GroundTruthMask(h, w, 0)};
  const std::size_t shapes = shape_count(rng);
  for (std::size_t s = 0; s < shapes; ++s) {
    const auto kind = static_cast<Shape>(shape_kind(rng));
    const auto cls = static_cast<ClassId>(pick_class(rng) + 1);
    const Point center{unit(rng) * static_cast<double>(w), unit(rng) * static_cast<double>(h)};

    double rx = radius();
    double ry = rx;
    std::array<Point, 3> tri{};
    if (kind == Shape::Rectangle) {
      ry = radius();
    } else if (kind == Shape::Triangle) {
      const double base = unit(rng) * 2.0 * std::numbers::pi;
      for (int k = 0; k < 3; ++k) {
        const double angle = base + 2.0 * std::numbers::pi * k / 3.0 + 0.4 * (unit(rng) - 0.5);
        tri[k] = Point{center.x + rx * std::cos(angle), center.y + rx * std::sin(angle)};
      }
    }

    for (std::size_t y = 0; y < h; ++y) {
      for (std::size_t x = 0; x < w; ++x) {
        const Point p{static_cast<double>(x) + 0.5, static_cast<double>(y) + 0.5};
        bool inside = false;
        switch (kind) {
          case Shape::Disc: {
            const double dx = p.x - center.x;
            const double dy = p.y - center.y;
            inside = dx * dx + dy * dy <= rx * rx;
            break;
          }
          case Shape::Rectangle:
            inside = std::abs(p.x - center.x) <= rx && std::abs(p.y - center.y) <= ry;
            break;
          case Shape::Triangle: {
            const double d0 = cross(tri[0], tri[1], p);
            const double d1 = cross(tri[1], tri[2], p);
            const double d2 = cross(tri[2], tri[0], p);
            inside = (d0 >= 0 && d1 >= 0 && d2 >= 0) || (d0 <= 0 && d1 <= 0 && d2 <= 0);
            break;
          }
        }
        if (inside) scene.mask.labels[y * w + x] = cls;
      }
    }
  }

  std::normal_distribution<double> noise(0.0, cfg.noise_sigma > 0.0 ? cfg.noise_sigma : 1.0);
  for (std::size_t p = 0; p < h * w; ++p) {
    const auto color = cfg.color_of(static_cast<std::size_t>(scene.mask.labels[p]));
    for (int ch = 0; ch < 3; ++ch) {
      double v = color[ch];
      if (cfg.noise_sigma > 0.0) v += noise(rng);
      scene.image.at(p, ch) = static_cast<float>(std::clamp(v, 0.0, 1.0));
    }
  }
  return scene;
}

Dataset generate_dataset(const DatasetConfig& cfg) {
  cfg.scene.validate();
  if (cfg.n_train == 0 || cfg.n_val == 0 || cfg.n_test == 0) {
    throw Error(ErrorKind::InvalidArgument, "every split needs at least one scene");
  }
  Dataset dataset;
  dataset.config = cfg;
  const std::size_t total = cfg.n_train + cfg.n_val + cfg.n_test;
  dataset.train = {0, cfg.n_train};
  dataset.val = {cfg.n_train, cfg.n_train + cfg.n_val};
  dataset.test = {cfg.n_train + cfg.n_val, total};
  dataset.images.reserve(total);
  dataset.masks.reserve(total);
  dataset.partitions.reserve(total);
  for (std::size_t i = 0; i < total; ++i) {
    auto scene = generate_scene(cfg.scene, i);
    dataset.partitions.push_back(slic_partition(scene.image, cfg.superpixels_per_image, cfg.slic));
    dataset.images.push_back(std::move(scene.image));
    dataset.masks.push_back(std::move(scene.mask));
  }
  return dataset;
}

std::vector<double> class_pixel_frequencies(const Dataset& dataset, SplitRange range) {
  std::vector<double> freq(dataset.num_classes(), 0.0);
  double total = 0.0;
  for (std::size_t i = range.begin; i < range.end; ++i) {
    for (const ClassId label : dataset.masks[i].labels) freq[label] += 1.0;
    total += static_cast<double>(dataset.masks[i].labels.size());
  }
  if (total > 0.0) {
    for (auto& f : freq) f /= total;
  }
  return freq;
}

void to_json(nlohmann::json& j, const SceneConfig& cfg) {
  j = nlohmann::json{{"height", cfg.height},
                     {"width", cfg.width},
                     {"num_classes", cfg.num_classes},
                     {"min_shapes", cfg.min_shapes},
                     {"max_shapes", cfg.max_shapes},
                     {"class_weights", cfg.class_weights},
                     {"class_colors", cfg.class_colors},
                     {"noise_sigma", cfg.noise_sigma},
                     {"min_radius", cfg.min_radius},
                     {"max_radius", cfg.max_radius},
                     {"seed", cfg.seed}};
}

void from_json(const nlohmann::json& j, SceneConfig& cfg) {
  SceneConfig defaults;
  cfg.height = j.value("height", defaults.height);
  cfg.width = j.value("width", defaults.width);
  cfg.num_classes = j.value("num_classes", defaults.num_classes);
  cfg.min_shapes = j.value("min_shapes", defaults.min_shapes);
  cfg.max_shapes = j.value("max_shapes", defaults.max_shapes);
  cfg.class_weights = j.value("class_weights", defaults.class_weights);
  cfg.class_colors = j.value("class_colors", defaults.class_colors);
  cfg.noise_sigma = j.value("noise_sigma", defaults.noise_sigma);
  cfg.min_radius = j.value("min_radius", defaults.min_radius);
  cfg.max_radius = j.value("max_radius", defaults.max_radius);
  cfg.seed = j.value("seed", defaults.seed);
}

void to_json(nlohmann::json& j, const DatasetConfig& cfg) {
  j = nlohmann::json{{"scene", cfg.scene},
                     {"n_train", cfg.n_train},
                     {"n_val", cfg.n_val},
                     {"n_test", cfg.n_test},
                     {"superpixels_per_image", cfg.superpixels_per_image},
                     {"slic_compactness", cfg.slic.compactness},
                     {"slic_iterations", cfg.slic.iterations}};
}

void from_json(const nlohmann::json& j, DatasetConfig& cfg) {
  DatasetConfig defaults;
  cfg.scene = j.contains("scene") ? j.at("scene").get<SceneConfig>() : defaults.scene;
  cfg.n_train = j.value("n_train", defaults.n_train);
  cfg.n_val = j.value("n_val", defaults.n_val);
  cfg.n_test = j.value("n_test", defaults.n_test);
  cfg.superpixels_per_image = j.value("superpixels_per_image", defaults.superpixels_per_image);
  cfg.slic.compactness = j.value("slic_compactness", defaults.slic.compactness);
  cfg.slic.iterations = j.value("slic_iterations", defaults.slic.iterations);
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  for (const char* sub : {"images", "masks", "partitions"}) {
    fs::create_directories(dir / sub, ec);
    if (ec) throw Error(ErrorKind::Io, "cannot create " + (dir / sub).string() + ": " + ec.message());
  }
  const std::size_t classes = dataset.num_classes();
  nlohmann::json scenes = nlohmann::json::array();
  for (std::size_t i = 0; i < dataset.images.size(); ++i) {
    const std::string name = scene_name(i);
    io::write_file(dir / "images" / (name + ".orim"), io::encode(dataset.images[i]));
    io::write_file(dir / "masks" / (name + ".orlm"), io::encode(dataset.masks[i], classes));
    io::write_file(dir / "partitions" / (name + ".orsp"), io::encode(dataset.partitions[i]));
    scenes.push_back(name);
  }
  nlohmann::json manifest{
      {"format_version", kDatasetFormatVersion},
      {"config", dataset.config},
      {"scenes", scenes},
      {"splits",
       {{"train", {dataset.train.begin, dataset.train.end}},
        {"val", {dataset.val.begin, dataset.val.end}},
        {"test", {dataset.test.begin, dataset.test.end}}}},
      {"class_pixel_frequencies",
       {{"train", class_pixel_frequencies(dataset, dataset.train)},
        {"val", class_pixel_frequencies(dataset, dataset.val)},
        {"test", class_pixel_frequencies(dataset, dataset.test)}}},
  };
  io::write_text(dir / "manifest.json", manifest.dump(2) + "\n");
}

Dataset load_dataset(const std::filesystem::path& dir) {
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(io::read_text(dir / "manifest.json"));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Format, (dir / "manifest.json").string() + ": " + e.what());
  }
  if (manifest.value("format_version", 0) != kDatasetFormatVersion) {
    throw Error(ErrorKind::Format, "unsupported dataset format version");
  }
  Dataset dataset;
  try {
    dataset.config = manifest.at("config").get<DatasetConfig>();
    auto range = [&](const char* key) {
      const auto& r = manifest.at("splits").at(key);
      return SplitRange{r.at(0).get<std::size_t>(), r.at(1).get<std::size_t>()};
    };
    dataset.train = range("train");
    dataset.val = range("val");
    dataset.test = range("test");
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Format, "malformed manifest: " + std::string(e.what()));
  }
  for (const auto& entry : manifest.at("scenes")) {
    const std::string name = entry.get<std::string>();
    dataset.images.push_back(io::decode_image(io::read_file(dir / "images" / (name + ".orim"))));
    dataset.masks.push_back(io::decode_label_map(io::read_file(dir / "masks" / (name + ".orlm"))));
    dataset.partitions.push_back(
        io::decode_partition(io::read_file(dir / "partitions" / (name + ".orsp"))));
  }
  if (dataset.test.end != dataset.images.size()) {
    throw Error(ErrorKind::Format, "manifest splits do not cover the stored scenes");
  }
  for (const auto& mask : dataset.masks) require_ground_truth(mask, dataset.num_classes());
  return dataset;
}

}  // namespace oreal
