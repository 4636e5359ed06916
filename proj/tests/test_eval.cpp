#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "error.hpp"
#include "eval.hpp"
#include "image.hpp"
#include "rng.hpp"

using namespace mshr;

namespace {

SegmentationMask fill_rect(std::int32_t w, std::int32_t h, Rect r) {
  SegmentationMask m(w, h);
  for (std::int32_t row = r.row0; row < r.row_end(); ++row)
    for (std::int32_t col = r.col0; col < r.col_end(); ++col)
      m.set(row, col);
  return m;
}

SegmentationMask fill_disk(std::int32_t size, double cr, double cc, double radius) {
  SegmentationMask m(size, size);
  for (std::int32_t r = 0; r < size; ++r)
    for (std::int32_t c = 0; c < size; ++c) {
      const double dr = r - cr, dc = c - cc;
      if (dr * dr + dc * dc <= radius * radius) m.set(r, c);
    }
  return m;
}

SegmentationMask random_blob(Rng& rng, std::int32_t size) {
  SegmentationMask m(size, size);
  const std::int32_t seeds = 2 + static_cast<std::int32_t>(rng.below(3));
  for (std::int32_t s = 0; s < seeds; ++s) {
    const std::int32_t h = 2 + static_cast<std::int32_t>(rng.below(size / 2));
    const std::int32_t w = 2 + static_cast<std::int32_t>(rng.below(size / 2));
    const std::int32_t r0 = static_cast<std::int32_t>(rng.below(size - h + 1));
    const std::int32_t c0 = static_cast<std::int32_t>(rng.below(size - w + 1));
    for (std::int32_t r = r0; r < r0 + h; ++r)
      for (std::int32_t c = c0; c < c0 + w; ++c) m.set(r, c);
  }
  return m;
}

std::int64_t slow_intersection(const SegmentationMask& a, const SegmentationMask& b) {
  std::int64_t n = 0;
  for (std::size_t i = 0; i < a.bits.size(); ++i)
    if (a.bits[i] && b.bits[i]) ++n;
  return n;
}

}  // namespace

TEST_CASE("iou matches hand counts") {
  const SegmentationMask block = fill_rect(8, 8, Rect{2, 2, 4, 4});
  CHECK(iou(block, block) == 1.0);

  const SegmentationMask other = fill_rect(8, 8, Rect{0, 0, 2, 2});
  CHECK(iou(block, other) == 0.0);

  // 8-pixel subset of the 16-pixel block: 8 / 16.
  const SegmentationMask half = fill_rect(8, 8, Rect{2, 2, 2, 4});
  CHECK(iou(block, half) == 0.5);

  const SegmentationMask empty_a(8, 8), empty_b(8, 8);
  CHECK(iou(empty_a, empty_b) == 0.0);
  CHECK(iou(block, empty_a) == 0.0);
}

TEST_CASE("iou is symmetric and monotone under dilation toward a superset") {
  Rng rng(404);
  for (int trial = 0; trial < 20; ++trial) {
    SegmentationMask a(12, 12), b(12, 12);
    for (std::size_t i = 0; i < a.bits.size(); ++i) {
      a.bits[i] = rng.below(2) ? 1 : 0;
      b.bits[i] = rng.below(2) ? 1 : 0;
    }
    CHECK(iou(a, b) == iou(b, a));
    const std::int64_t inter = slow_intersection(a, b);
    const std::int64_t uni = a.area() + b.area() - inter;
    if (uni > 0)
      CHECK(iou(a, b) == static_cast<double>(inter) / static_cast<double>(uni));
  }

  // Growing a subset toward the full block never lowers the score.
  const SegmentationMask target = fill_rect(10, 10, Rect{1, 1, 6, 8});
  double prev = 0.0;
  SegmentationMask grown(10, 10);
  for (std::int32_t cols = 1; cols <= 8; ++cols) {
    grown = fill_rect(10, 10, Rect{1, 1, 6, cols});
    const double phi = iou(grown, target);
    CHECK(phi >= prev);
    prev = phi;
  }
  CHECK(prev == 1.0);
}

TEST_CASE("iou rejects mismatched dimensions") {
  const SegmentationMask a(4, 4), b(4, 5), c(5, 4);
  CHECK_THROWS_AS(iou(a, b), Error);
  CHECK_THROWS_AS(iou(a, c), Error);
  try {
    iou(a, b);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DimensionMismatch);
  }
}

TEST_CASE("best_box recovers a rectangular mask exactly in both modes") {
  const Rect r{5, 9, 13, 21};
  const SegmentationMask m = fill_rect(48, 40, r);
  for (const bool exhaustive : {true, false}) {
    const BestBoxResult res = best_box(m, exhaustive);
    CHECK(res.phi == 1.0);
    CHECK(res.box.row0 == r.row0);
    CHECK(res.box.col0 == r.col0);
    CHECK(res.box.height == r.height);
    CHECK(res.box.width == r.width);
    CHECK(res.exact == exhaustive);
  }
}

TEST_CASE("best_box handles a single pixel and rejects an empty mask") {
  SegmentationMask one(7, 7);
  one.set(3, 4);
  const BestBoxResult res = best_box(one, true);
  CHECK(res.phi == 1.0);
  CHECK(res.box.row0 == 3);
  CHECK(res.box.col0 == 4);
  CHECK(res.box.height == 1);
  CHECK(res.box.width == 1);

  const SegmentationMask empty(7, 7);
  CHECK_THROWS_AS(best_box(empty, true), Error);
  CHECK_THROWS_AS(best_box(empty, false), Error);
}

TEST_CASE("heuristic best_box stays within 5% of the exhaustive optimum") {
  std::vector<SegmentationMask> shapes;
  shapes.push_back(fill_disk(48, 23.5, 23.5, 20.0));
  // Plus sign: two crossing rectangles.
  {
    SegmentationMask plus = fill_rect(48, 48, Rect{8, 20, 32, 8});
    const SegmentationMask bar = fill_rect(48, 48, Rect{20, 8, 8, 32});
    for (std::size_t i = 0; i < plus.bits.size(); ++i)
      plus.bits[i] |= bar.bits[i];
    shapes.push_back(plus);
  }
  Rng rng(607);
  for (int i = 0; i < 6; ++i) shapes.push_back(random_blob(rng, 40));

  for (const SegmentationMask& m : shapes) {
    const BestBoxResult oracle = best_box(m, true);
    const BestBoxResult fast = best_box(m, false);
    CHECK(oracle.phi >= fast.phi - 1e-12);
    CHECK(fast.phi >= 0.95 * oracle.phi);
    // Reported phi is consistent with scoring the reported box directly.
    for (const BestBoxResult& res : {oracle, fast}) {
      const SegmentationMask box_mask =
          fill_rect(m.width, m.height, res.box);
      CHECK(iou(m, box_mask) == doctest::Approx(res.phi).epsilon(1e-12));
    }
  }
}

TEST_CASE("exhaustive best_box beats or matches the tight bounding box") {
  Rng rng(608);
  for (int trial = 0; trial < 8; ++trial) {
    const SegmentationMask m = random_blob(rng, 32);
    std::int32_t r0 = m.height, c0 = m.width, r1 = -1, c1 = -1;
    for (std::int32_t r = 0; r < m.height; ++r)
      for (std::int32_t c = 0; c < m.width; ++c)
        if (m.get(r, c)) {
          r0 = std::min(r0, r);
          c0 = std::min(c0, c);
          r1 = std::max(r1, r);
          c1 = std::max(c1, c);
        }
    const SegmentationMask tight =
        fill_rect(m.width, m.height, Rect{r0, c0, r1 - r0 + 1, c1 - c0 + 1});
    const BestBoxResult res = best_box(m, true);
    CHECK(res.phi >= iou(m, tight) - 1e-12);
    CHECK(res.phi <= 1.0);
    CHECK(res.phi > 0.0);
  }
}

TEST_CASE("overlap_curve summarises per-frame scores") {
  std::vector<SegmentationMask> gt, pred;
  for (int f = 0; f < 4; ++f) {
    gt.push_back(fill_rect(16, 16, Rect{4, 4, 8, 8}));
    pred.push_back(gt.back());
  }
  const OverlapSummary perfect = overlap_curve(pred, gt);
  CHECK(perfect.per_frame.size() == 4);
  for (const double phi : perfect.per_frame) CHECK(phi == 1.0);
  CHECK(perfect.mean == 1.0);
  CHECK(perfect.median == 1.0);

  std::vector<SegmentationMask> blank(4, SegmentationMask(16, 16));
  const OverlapSummary zero = overlap_curve(blank, gt);
  for (const double phi : zero.per_frame) CHECK(phi == 0.0);
  CHECK(zero.mean == 0.0);
}

TEST_CASE("overlap_curve mean and median agree with direct computation") {
  Rng rng(811);
  std::vector<SegmentationMask> gt, pred;
  for (int f = 0; f < 6; ++f) {
    gt.push_back(random_blob(rng, 20));
    pred.push_back(random_blob(rng, 20));
  }
  const OverlapSummary s = overlap_curve(pred, gt);

  double total = 0.0;
  for (std::size_t f = 0; f < gt.size(); ++f) {
    const double phi = iou(pred[f], gt[f]);
    CHECK(s.per_frame[f] == phi);
    total += phi;
  }
  CHECK(s.mean == doctest::Approx(total / 6.0).epsilon(1e-15));

  std::vector<double> sorted = s.per_frame;
  std::sort(sorted.begin(), sorted.end());
  CHECK(s.median == doctest::Approx(0.5 * (sorted[2] + sorted[3])).epsilon(1e-15));

  // Odd frame count picks the middle element.
  gt.pop_back();
  pred.pop_back();
  const OverlapSummary odd = overlap_curve(pred, gt);
  sorted = odd.per_frame;
  std::sort(sorted.begin(), sorted.end());
  CHECK(odd.median == sorted[2]);
}

TEST_CASE("overlap_curve validates its inputs") {
  std::vector<SegmentationMask> three(3, SegmentationMask(8, 8));
  std::vector<SegmentationMask> two(2, SegmentationMask(8, 8));
  CHECK_THROWS_AS(overlap_curve(three, two), Error);
  CHECK_THROWS_AS(overlap_curve({}, {}), Error);

  std::vector<SegmentationMask> other(3, SegmentationMask(8, 9));
  CHECK_THROWS_AS(overlap_curve(three, other), Error);
}
