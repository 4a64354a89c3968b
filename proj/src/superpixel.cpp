#include "oreal/superpixel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <set>
#include <sstream>

namespace oreal {

namespace {

void require_same_shape(const SuperpixelPartition& partition, const LabelMap& map) {
  if (partition.height() != map.height || partition.width() != map.width ||
      map.labels.size() != map.pixel_count()) {
    throw Error(ErrorKind::ShapeMismatch, "label map shape does not match partition");
  }
}

void require_superpixel(const SuperpixelPartition& partition, std::size_t sp) {
  if (sp >= partition.count()) {
    std::ostringstream msg;
    msg << "superpixel " << sp << " out of range (K=" << partition.count() << ")";
    throw Error(ErrorKind::InvalidArgument, msg.str());
  }
}

std::vector<std::size_t> class_histogram(const SuperpixelPartition& partition, std::size_t sp,
                                         const GroundTruthMask& gt) {
  std::vector<std::size_t> hist;
  for (const auto pixel : partition.members(sp)) {
    const ClassId label = gt.labels[pixel];
    if (label < 0) {
      throw Error(ErrorKind::InvalidArgument, "ground-truth mask contains unlabeled pixels");
    }
    if (static_cast<std::size_t>(label) >= hist.size()) hist.resize(label + 1, 0);
    ++hist[label];
  }
  return hist;
}

// Splits [0, extent) into `parts` contiguous runs; earlier runs take the remainder.
std::vector<std::size_t> run_starts(std::size_t extent, std::size_t parts) {
  std::vector<std::size_t> starts(parts + 1, 0);
  const std::size_t base = extent / parts;
  const std::size_t extra = extent % parts;
  for (std::size_t i = 0; i < parts; ++i) {
    starts[i + 1] = starts[i] + base + (i < extra ? 1 : 0);
  }
  return starts;
}

SuperpixelPartition tile_partition(std::size_t height, std::size_t width, std::size_t rows,
                                   std::size_t cols) {
  const auto row_starts = run_starts(height, rows);
  const auto col_starts = run_starts(width, cols);
  std::vector<std::int32_t> assignment(height * width);
  std::size_t r = 0;
  for (std::size_t y = 0; y < height; ++y) {
    while (y >= row_starts[r + 1]) ++r;
    std::size_t c = 0;
    for (std::size_t x = 0; x < width; ++x) {
      while (x >= col_starts[c + 1]) ++c;
      assignment[y * width + x] = static_cast<std::int32_t>(r * cols + c);
    }
  }
  return SuperpixelPartition::from_assignment(height, width, std::move(assignment));
}

// Labels 4-connected components of equal assignment; returns component count.
std::size_t connected_components(std::size_t height, std::size_t width,
                                 std::span<const std::int32_t> labels,
                                 std::vector<std::int32_t>& component) {
  const std::size_t n = height * width;
  component.assign(n, -1);
  std::int32_t next = 0;
  std::vector<std::size_t> stack;
  for (std::size_t seed = 0; seed < n; ++seed) {
    if (component[seed] >= 0) continue;
    component[seed] = next;
    stack.push_back(seed);
    while (!stack.empty()) {
      const std::size_t p = stack.back();
      stack.pop_back();
      const std::size_t y = p / width;
      const std::size_t x = p % width;
      auto visit = [&](std::size_t q) {
        if (component[q] < 0 && labels[q] == labels[p]) {
          component[q] = next;
          stack.push_back(q);
        }
      };
      if (x > 0) visit(p - 1);
      if (x + 1 < width) visit(p + 1);
      if (y > 0) visit(p - width);
      if (y + 1 < height) visit(p + width);
    }
    ++next;
  }
  return static_cast<std::size_t>(next);
}

// Re-indexes ids densely in order of first occurrence (row-major).
std::vector<std::int32_t> densify(std::span<const std::int32_t> ids) {
  std::vector<std::int32_t> remap;
  std::vector<std::int32_t> out(ids.size());
  std::int32_t next = 0;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto id = static_cast<std::size_t>(ids[i]);
    if (id >= remap.size()) remap.resize(id + 1, -1);
    if (remap[id] < 0) remap[id] = next++;
    out[i] = remap[id];
  }
  return out;
}

struct Region {
  std::size_t size = 0;
  double color[3] = {0.0, 0.0, 0.0};
  std::set<std::int32_t> neighbors;
  bool alive = true;
};

// Merges the smallest fragment into its most similar neighbor until at most
// `max_regions` remain and no fragment is smaller than `min_size`.
std::vector<std::int32_t> merge_fragments(const Image& image,
                                          std::span<const std::int32_t> component,
                                          std::size_t regions_count, std::size_t max_regions,
                                          std::size_t min_size) {
  const std::size_t width = image.width;
  const std::size_t height = image.height;
  std::vector<Region> regions(regions_count);
  for (std::size_t p = 0; p < component.size(); ++p) {
    Region& r = regions[component[p]];
    ++r.size;
    for (int ch = 0; ch < 3; ++ch) r.color[ch] += image.at(p, ch);
    const std::size_t x = p % width;
    const std::size_t y = p / width;
    if (x + 1 < width && component[p + 1] != component[p]) {
      r.neighbors.insert(component[p + 1]);
      regions[component[p + 1]].neighbors.insert(component[p]);
    }
    if (y + 1 < height && component[p + width] != component[p]) {
      r.neighbors.insert(component[p + width]);
      regions[component[p + width]].neighbors.insert(component[p]);
    }
  }

  std::vector<std::int32_t> parent(regions_count);
  std::iota(parent.begin(), parent.end(), 0);
  std::size_t alive = regions_count;

  auto mean = [&](const Region& r, int ch) { return r.color[ch] / static_cast<double>(r.size); };

  while (alive > 1) {
    std::int32_t smallest = -1;
    for (std::size_t i = 0; i < regions.size(); ++i) {
      if (!regions[i].alive) continue;
      if (smallest < 0 || regions[i].size < regions[smallest].size) {
        smallest = static_cast<std::int32_t>(i);
      }
    }
    if (alive <= max_regions && regions[smallest].size >= min_size) break;
    Region& src = regions[smallest];
    if (src.neighbors.empty()) break;

    std::int32_t target = -1;
    double best = std::numeric_limits<double>::infinity();
    for (const auto nb : src.neighbors) {
      double d = 0.0;
      for (int ch = 0; ch < 3; ++ch) {
        const double diff = mean(src, ch) - mean(regions[nb], ch);
        d += diff * diff;
      }
      if (d < best) {
        best = d;
        target = nb;
      }
    }

    Region& dst = regions[target];
    dst.size += src.size;
    for (int ch = 0; ch < 3; ++ch) dst.color[ch] += src.color[ch];
    for (const auto nb : src.neighbors) {
      if (nb == target) continue;
      regions[nb].neighbors.erase(smallest);
      regions[nb].neighbors.insert(target);
      dst.neighbors.insert(nb);
    }
    dst.neighbors.erase(smallest);
    src.alive = false;
    src.neighbors.clear();
    parent[smallest] = target;
    --alive;
  }

  auto find = [&](std::int32_t id) {
    while (parent[id] != id) id = parent[id];
    return id;
  };
  std::vector<std::int32_t> merged(component.size());
  for (std::size_t p = 0; p < component.size(); ++p) merged[p] = find(component[p]);
  return merged;
}

}  // namespace

SuperpixelPartition SuperpixelPartition::from_assignment(std::size_t height, std::size_t width,
                                                         std::vector<std::int32_t> assignment) {
  if (assignment.size() != height * width) {
    throw Error(ErrorKind::ShapeMismatch, "assignment size does not match height*width");
  }
  SuperpixelPartition out;
  out.height_ = height;
  out.width_ = width;
  std::int32_t max_id = -1;
  for (const auto id : assignment) {
    if (id < 0) throw Error(ErrorKind::InvalidArgument, "negative superpixel id");
    max_id = std::max(max_id, id);
  }
  out.members_.resize(static_cast<std::size_t>(max_id + 1));
  for (std::size_t p = 0; p < assignment.size(); ++p) {
    out.members_[assignment[p]].push_back(static_cast<std::uint32_t>(p));
  }
  for (std::size_t sp = 0; sp < out.members_.size(); ++sp) {
    if (out.members_[sp].empty()) {
      std::ostringstream msg;
      msg << "superpixel id " << sp << " has no pixels (ids must be dense)";
      throw Error(ErrorKind::InvalidArgument, msg.str());
    }
  }
  out.assignment_ = std::move(assignment);
  return out;
}

bool is_valid_partition(const SuperpixelPartition& partition) {
  const std::size_t n = partition.pixel_count();
  const auto assignment = partition.assignment();
  if (assignment.size() != n) return false;

  std::vector<int> seen(n, 0);
  std::size_t covered = 0;
  for (std::size_t sp = 0; sp < partition.count(); ++sp) {
    for (const auto p : partition.members(sp)) {
      if (p >= n || seen[p]++ != 0) return false;
      if (assignment[p] != static_cast<std::int32_t>(sp)) return false;
      ++covered;
    }
  }
  if (covered != n) return false;

  std::vector<std::int32_t> component;
  const std::size_t components =
      connected_components(partition.height(), partition.width(), assignment, component);
  return components == partition.count();
}

SuperpixelPartition grid_partition(std::size_t height, std::size_t width, std::size_t count) {
  if (height == 0 || width == 0 || count == 0) {
    throw Error(ErrorKind::InfeasibleGrid, "grid partition needs a non-empty image and count > 0");
  }
  const double image_aspect = std::log(static_cast<double>(height) / static_cast<double>(width));
  std::size_t best_rows = 0;
  double best_gap = std::numeric_limits<double>::infinity();
  for (std::size_t rows = 1; rows <= std::min(count, height); ++rows) {
    if (count % rows != 0) continue;
    const std::size_t cols = count / rows;
    if (cols > width) continue;
    const double gap = std::abs(
        std::log(static_cast<double>(rows) / static_cast<double>(cols)) - image_aspect);
    if (gap < best_gap - 1e-12) {
      best_gap = gap;
      best_rows = rows;
    }
  }
  if (best_rows == 0) {
    std::ostringstream msg;
    msg << "no r x c factorization of " << count << " fits a " << height << "x" << width
        << " image";
    throw Error(ErrorKind::InfeasibleGrid, msg.str());
  }
  return tile_partition(height, width, best_rows, count / best_rows);
}

SuperpixelPartition slic_partition(const Image& image, std::size_t count,
                                   const SlicParams& params) {
  const std::size_t height = image.height;
  const std::size_t width = image.width;
  const std::size_t n = height * width;
  if (n == 0 || count == 0) {
    throw Error(ErrorKind::InvalidArgument, "slic needs a non-empty image and count > 0");
  }
  if (count > n) {
    throw Error(ErrorKind::InvalidArgument, "more superpixels requested than pixels");
  }
  if (params.iterations < 1) {
    throw Error(ErrorKind::InvalidArgument, "slic needs at least one iteration");
  }

  // Seed grid with rows*cols <= count, shaped like the image.
  const double ideal_rows =
      std::sqrt(static_cast<double>(count) * static_cast<double>(height) / static_cast<double>(width));
  const std::size_t rows =
      std::clamp<std::size_t>(static_cast<std::size_t>(std::lround(ideal_rows)), 1,
                              std::min(height, count));
  const std::size_t cols = std::clamp<std::size_t>(count / rows, 1, width);
  const std::size_t seeds = rows * cols;
  const double step = std::sqrt(static_cast<double>(n) / static_cast<double>(seeds));

  constexpr double kColorScale = 100.0;
  struct Center {
    double color[3];
    double y, x;
  };
  auto color_at = [&](std::size_t p, int ch) { return kColorScale * image.at(p, ch); };

  std::vector<Center> centers(seeds);
  const auto row_starts = run_starts(height, rows);
  const auto col_starts = run_starts(width, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      std::size_t cy = (row_starts[r] + row_starts[r + 1]) / 2;
      std::size_t cx = (col_starts[c] + col_starts[c + 1]) / 2;
      if (step >= 4.0) {
        // Nudge the seed off edges: lowest color gradient in its 3x3 window.
        double best = std::numeric_limits<double>::infinity();
        std::size_t by = cy, bx = cx;
        for (std::size_t y = (cy > 0 ? cy - 1 : 0); y <= std::min(cy + 1, height - 1); ++y) {
          for (std::size_t x = (cx > 0 ? cx - 1 : 0); x <= std::min(cx + 1, width - 1); ++x) {
            const std::size_t left = y * width + (x > 0 ? x - 1 : x);
            const std::size_t right = y * width + std::min(x + 1, width - 1);
            const std::size_t up = (y > 0 ? y - 1 : y) * width + x;
            const std::size_t down = std::min(y + 1, height - 1) * width + x;
            double g = 0.0;
            for (int ch = 0; ch < 3; ++ch) {
              const double dx = color_at(right, ch) - color_at(left, ch);
              const double dy = color_at(down, ch) - color_at(up, ch);
              g += dx * dx + dy * dy;
            }
            if (g < best) {
              best = g;
              by = y;
              bx = x;
            }
          }
        }
        cy = by;
        cx = bx;
      }
      Center& center = centers[r * cols + c];
      const std::size_t p = cy * width + cx;
      for (int ch = 0; ch < 3; ++ch) center.color[ch] = color_at(p, ch);
      center.y = static_cast<double>(cy);
      center.x = static_cast<double>(cx);
    }
  }

  const auto tiles = tile_partition(height, width, rows, cols);
  std::vector<std::int32_t> labels(tiles.assignment().begin(), tiles.assignment().end());
  std::vector<double> distance(n);
  const double spatial_weight = (params.compactness / step) * (params.compactness / step);
  const auto window = static_cast<long>(std::ceil(2.0 * step));

  for (int iter = 0; iter < params.iterations; ++iter) {
    std::fill(distance.begin(), distance.end(), std::numeric_limits<double>::infinity());
    for (std::size_t k = 0; k < seeds; ++k) {
      const Center& center = centers[k];
      const long cy = std::lround(center.y);
      const long cx = std::lround(center.x);
      const long y0 = std::max(0L, cy - window);
      const long y1 = std::min(static_cast<long>(height) - 1, cy + window);
      const long x0 = std::max(0L, cx - window);
      const long x1 = std::min(static_cast<long>(width) - 1, cx + window);
      for (long y = y0; y <= y1; ++y) {
        for (long x = x0; x <= x1; ++x) {
          const std::size_t p = static_cast<std::size_t>(y) * width + static_cast<std::size_t>(x);
          double dc = 0.0;
          for (int ch = 0; ch < 3; ++ch) {
            const double diff = color_at(p, ch) - center.color[ch];
            dc += diff * diff;
          }
          const double dy = static_cast<double>(y) - center.y;
          const double dx = static_cast<double>(x) - center.x;
          const double d = dc + spatial_weight * (dy * dy + dx * dx);
          if (d < distance[p]) {
            distance[p] = d;
            labels[p] = static_cast<std::int32_t>(k);
          }
        }
      }
    }

    std::vector<Center> sums(seeds, Center{{0.0, 0.0, 0.0}, 0.0, 0.0});
    std::vector<std::size_t> sizes(seeds, 0);
    for (std::size_t p = 0; p < n; ++p) {
      Center& s = sums[labels[p]];
      for (int ch = 0; ch < 3; ++ch) s.color[ch] += color_at(p, ch);
      s.y += static_cast<double>(p / width);
      s.x += static_cast<double>(p % width);
      ++sizes[labels[p]];
    }
    for (std::size_t k = 0; k < seeds; ++k) {
      if (sizes[k] == 0) continue;
      const double inv = 1.0 / static_cast<double>(sizes[k]);
      for (int ch = 0; ch < 3; ++ch) centers[k].color[ch] = sums[k].color[ch] * inv;
      centers[k].y = sums[k].y * inv;
      centers[k].x = sums[k].x * inv;
    }
  }

  std::vector<std::int32_t> component;
  const std::size_t components = connected_components(height, width, labels, component);
  const std::size_t min_size = std::max<std::size_t>(1, n / (4 * seeds));
  const auto merged = merge_fragments(image, component, components, count, min_size);
  return SuperpixelPartition::from_assignment(height, width, densify(merged));
}

ClassId dominant_label(const SuperpixelPartition& partition, std::size_t sp,
                       const GroundTruthMask& gt) {
  require_same_shape(partition, gt);
  require_superpixel(partition, sp);
  const auto hist = class_histogram(partition, sp, gt);
  // max_element returns the first maximum, i.e. the lowest class index.
  return static_cast<ClassId>(std::max_element(hist.begin(), hist.end()) - hist.begin());
}

std::vector<ClassId> weak_labels(const SuperpixelPartition& partition, std::size_t sp,
                                 const GroundTruthMask& gt) {
  require_same_shape(partition, gt);
  require_superpixel(partition, sp);
  const auto hist = class_histogram(partition, sp, gt);
  std::vector<ClassId> present;
  for (std::size_t c = 0; c < hist.size(); ++c) {
    if (hist[c] > 0) present.push_back(static_cast<ClassId>(c));
  }
  return present;
}

AnnotationBatch annotate(std::span<const SuperpixelRef> queries,
                         std::span<const SuperpixelPartition> partitions,
                         std::span<const GroundTruthMask> gts, LabelScheme scheme) {
  if (partitions.size() != gts.size()) {
    throw Error(ErrorKind::ShapeMismatch, "partition and mask counts differ");
  }
  AnnotationBatch batch;
  batch.items.reserve(queries.size());
  for (const auto& ref : queries) {
    if (ref.image >= partitions.size()) {
      throw Error(ErrorKind::InvalidArgument, "superpixel ref points past the dataset");
    }
    const auto& partition = partitions[ref.image];
    const auto& gt = gts[ref.image];
    Annotation item{ref, {}};
    if (scheme == LabelScheme::Dominant) {
      item.labels.push_back(dominant_label(partition, ref.superpixel, gt));
    } else {
      item.labels = weak_labels(partition, ref.superpixel, gt);
    }
    batch.clicks += item.labels.size();
    batch.items.push_back(std::move(item));
  }
  return batch;
}

void expand_to_pixels(const SuperpixelPartition& partition, std::size_t sp, ClassId label,
                      PartialLabelMap& target) {
  require_same_shape(partition, target);
  require_superpixel(partition, sp);
  for (const auto p : partition.members(sp)) target.labels[p] = label;
}

LabelMap dominant_label_map(const SuperpixelPartition& partition, const GroundTruthMask& gt) {
  PartialLabelMap out = make_unlabeled_map(partition.height(), partition.width());
  for (std::size_t sp = 0; sp < partition.count(); ++sp) {
    expand_to_pixels(partition, sp, dominant_label(partition, sp, gt), out);
  }
  return out;
}

LabelFidelity dominant_label_fidelity(const SuperpixelPartition& partition,
                                      const GroundTruthMask& gt) {
  require_same_shape(partition, gt);
  std::size_t modal_total = 0;
  for (std::size_t sp = 0; sp < partition.count(); ++sp) {
    const auto hist = class_histogram(partition, sp, gt);
    modal_total += *std::max_element(hist.begin(), hist.end());
  }
  return LabelFidelity{partition.pixel_count() - modal_total, partition.pixel_count()};
}

}  // namespace oreal
