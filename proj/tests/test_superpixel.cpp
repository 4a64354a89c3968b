#include <doctest.h>

#include <algorithm>
#include <map>
#include <random>

#include "oreal/superpixel.hpp"

using namespace oreal;

namespace {

SuperpixelPartition single(std::size_t h, std::size_t w) {
  return SuperpixelPartition::from_assignment(h, w, std::vector<std::int32_t>(h * w, 0));
}

LabelMap mask_of(std::size_t h, std::size_t w, std::vector<ClassId> labels) {
  LabelMap m(h, w, 0);
  m.labels = std::move(labels);
  return m;
}

Image random_image(std::size_t h, std::size_t w, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  Image img(h, w);
  for (auto& v : img.rgb) v = u(rng);
  return img;
}

}  // namespace

TEST_CASE("grid_partition tiles evenly") {
  const auto p = grid_partition(4, 4, 4);
  CHECK(p.count() == 4);
  for (std::size_t sp = 0; sp < 4; ++sp) CHECK(p.members(sp).size() == 4);
  CHECK(is_valid_partition(p));
}

TEST_CASE("grid_partition with one tile per pixel is the identity") {
  const auto p = grid_partition(4, 4, 16);
  for (std::size_t i = 0; i < 16; ++i) CHECK(p.id_at(i) == static_cast<std::int32_t>(i));
}

TEST_CASE("grid_partition distributes the remainder to leading tiles") {
  const auto p = grid_partition(5, 4, 4);
  REQUIRE(p.count() == 4);
  CHECK(is_valid_partition(p));
  std::vector<std::size_t> sizes;
  for (std::size_t sp = 0; sp < 4; ++sp) sizes.push_back(p.members(sp).size());
  // heights {3, 2} x widths {2, 2}
  CHECK(sizes == std::vector<std::size_t>{6, 6, 4, 4});
  std::vector<int> covered(20, 0);
  for (std::size_t sp = 0; sp < 4; ++sp) {
    for (const auto px : p.members(sp)) ++covered[px];
  }
  for (const int c : covered) CHECK(c == 1);
}

TEST_CASE("grid_partition rejects infeasible counts") {
  try {
    grid_partition(2, 2, 5);
    FAIL("expected InfeasibleGrid");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InfeasibleGrid);
  }
  CHECK_THROWS_AS(grid_partition(3, 3, 0), Error);
}

TEST_CASE("from_assignment requires dense ids") {
  CHECK_THROWS_AS(SuperpixelPartition::from_assignment(1, 3, {0, 2, 2}), Error);
  CHECK_THROWS_AS(SuperpixelPartition::from_assignment(1, 3, {0, 1}), Error);
}

TEST_CASE("is_valid_partition detects a disconnected superpixel") {
  const auto p = SuperpixelPartition::from_assignment(1, 3, {0, 1, 0});
  CHECK_FALSE(is_valid_partition(p));
}

TEST_CASE("slic on a uniform image gives near-equal areas") {
  Image img(16, 16, 0.5f);
  const auto p = slic_partition(img, 4);
  CHECK(is_valid_partition(p));
  CHECK(p.count() <= 4);
  std::size_t lo = img.pixel_count(), hi = 0;
  for (std::size_t sp = 0; sp < p.count(); ++sp) {
    lo = std::min(lo, p.members(sp).size());
    hi = std::max(hi, p.members(sp).size());
  }
  CHECK(static_cast<double>(hi) / static_cast<double>(lo) <= 2.0);
}

TEST_CASE("slic follows a strong color edge") {
  Image img(16, 16, 0.0f);
  for (std::size_t y = 0; y < 16; ++y) {
    for (std::size_t x = 8; x < 16; ++x) {
      for (int ch = 0; ch < 3; ++ch) img.at(y * 16 + x, ch) = 1.0f;
    }
  }
  const auto p = slic_partition(img, 2);
  REQUIRE(is_valid_partition(p));
  // pixels on either side of a superpixel boundary
  std::size_t boundary = 0, on_edge = 0;
  for (std::size_t y = 0; y < 16; ++y) {
    for (std::size_t x = 0; x + 1 < 16; ++x) {
      if (p.id_at(y * 16 + x) != p.id_at(y * 16 + x + 1)) {
        ++boundary;
        if (x == 7) ++on_edge;
      }
    }
  }
  for (std::size_t y = 0; y + 1 < 16; ++y) {
    for (std::size_t x = 0; x < 16; ++x) {
      if (p.id_at(y * 16 + x) != p.id_at((y + 1) * 16 + x)) ++boundary;
    }
  }
  REQUIRE(boundary > 0);
  CHECK(static_cast<double>(on_edge) / static_cast<double>(boundary) >= 0.9);
}

TEST_CASE("slic with one superpixel per pixel is the identity") {
  const auto img = random_image(5, 6, 3);
  const auto p = slic_partition(img, 30);
  REQUIRE(p.count() == 30);
  for (std::size_t i = 0; i < 30; ++i) CHECK(p.members(p.id_at(i)).size() == 1);
}

TEST_CASE("slic partitions are valid and deterministic on random images") {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const auto img = random_image(20 + seed, 24, seed);
    const auto a = slic_partition(img, 9 + seed);
    const auto b = slic_partition(img, 9 + seed);
    CHECK(is_valid_partition(a));
    CHECK(a.count() <= 9 + seed);
    CHECK(a == b);
  }
}

TEST_CASE("dominant_label and weak_labels") {
  const auto p = single(1, 3);
  CHECK(dominant_label(p, 0, mask_of(1, 3, {1, 1, 2})) == 1);
  CHECK(weak_labels(p, 0, mask_of(1, 3, {1, 1, 2})) == std::vector<ClassId>{1, 2});
  CHECK(dominant_label(single(1, 2), 0, mask_of(1, 2, {2, 1})) == 1);
  CHECK(dominant_label(single(2, 2), 0, mask_of(2, 2, {0, 0, 0, 0})) == 0);
  CHECK(weak_labels(single(1, 1), 0, mask_of(1, 1, {0})) == std::vector<ClassId>{0});
  CHECK(weak_labels(single(1, 4), 0, mask_of(1, 4, {2, 0, 1, 2})) ==
        std::vector<ClassId>{0, 1, 2});
}

TEST_CASE("dominant label is always one of the weak labels") {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> cls(0, 3);
  const auto p = grid_partition(12, 12, 9);
  for (int trial = 0; trial < 50; ++trial) {
    LabelMap gt(12, 12, 0);
    for (auto& l : gt.labels) l = cls(rng);
    for (std::size_t sp = 0; sp < p.count(); ++sp) {
      const auto weak = weak_labels(p, sp, gt);
      CHECK(std::binary_search(weak.begin(), weak.end(), dominant_label(p, sp, gt)));
    }
  }
}

TEST_CASE("annotate charges one click per label") {
  const std::vector<SuperpixelPartition> parts{single(1, 3)};
  const std::vector<GroundTruthMask> gts{mask_of(1, 3, {1, 1, 2})};
  const std::vector<SuperpixelRef> q{{0, 0}};

  const auto dom = annotate(q, parts, gts, LabelScheme::Dominant);
  REQUIRE(dom.items.size() == 1);
  CHECK(dom.items[0].labels == std::vector<ClassId>{1});
  CHECK(dom.clicks == 1);

  const auto weak = annotate(q, parts, gts, LabelScheme::Weak);
  REQUIRE(weak.items.size() == 1);
  CHECK(weak.items[0].labels == std::vector<ClassId>{1, 2});
  CHECK(weak.clicks == 2);

  const auto none = annotate({}, parts, gts, LabelScheme::Dominant);
  CHECK(none.items.empty());
  CHECK(none.clicks == 0);
}

TEST_CASE("annotate with the dominant scheme returns one label per query") {
  const auto p = grid_partition(8, 8, 16);
  LabelMap gt(8, 8, 0);
  for (std::size_t i = 0; i < gt.labels.size(); ++i) gt.labels[i] = static_cast<ClassId>(i % 3);
  const std::vector<SuperpixelPartition> parts{p};
  const std::vector<GroundTruthMask> gts{gt};
  std::vector<SuperpixelRef> q;
  for (std::uint32_t sp = 0; sp < 16; ++sp) q.push_back({0, sp});
  const auto batch = annotate(q, parts, gts, LabelScheme::Dominant);
  CHECK(batch.clicks == 16);
  for (const auto& a : batch.items) CHECK(a.labels.size() == 1);
}

TEST_CASE("expand_to_pixels writes exactly the superpixel") {
  const auto p = grid_partition(4, 4, 4);
  auto target = make_unlabeled_map(4, 4);
  expand_to_pixels(p, 1, 2, target);
  CHECK(std::count(target.labels.begin(), target.labels.end(), 2) == 4);
  CHECK(std::count(target.labels.begin(), target.labels.end(), kUnlabeled) == 12);

  auto twice = target;
  expand_to_pixels(p, 1, 2, twice);
  CHECK(twice == target);

  expand_to_pixels(p, 1, 0, target);
  CHECK(std::count(target.labels.begin(), target.labels.end(), 0) == 4);

  auto whole = make_unlabeled_map(4, 4);
  expand_to_pixels(single(4, 4), 0, 1, whole);
  CHECK(std::count(whole.labels.begin(), whole.labels.end(), kUnlabeled) == 0);
}

TEST_CASE("dominant label fidelity equals the modal-count formula") {
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<int> cls(0, 2);
  for (int trial = 0; trial < 20; ++trial) {
    LabelMap gt(10, 10, 0);
    for (auto& l : gt.labels) l = cls(rng);
    const auto p = grid_partition(10, 10, 4 + trial % 6);
    const auto expanded = dominant_label_map(p, gt);
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < gt.labels.size(); ++i) wrong += expanded.labels[i] != gt.labels[i];

    std::size_t modal_sum = 0;
    for (std::size_t sp = 0; sp < p.count(); ++sp) {
      std::map<ClassId, std::size_t> hist;
      for (const auto px : p.members(sp)) ++hist[gt.labels[px]];
      std::size_t best = 0;
      for (const auto& [c, n] : hist) best = std::max(best, n);
      modal_sum += best;
    }
    const auto fidelity = dominant_label_fidelity(p, gt);
    CHECK(fidelity.wrong_pixels == wrong);
    CHECK(fidelity.wrong_pixels == gt.labels.size() - modal_sum);
    CHECK(fidelity.error_fraction() ==
          doctest::Approx(1.0 - static_cast<double>(modal_sum) / 100.0));
  }
}
