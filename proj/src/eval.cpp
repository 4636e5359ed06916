#include "eval.hpp"

#include <algorithm>
#include <cmath>

#include "error.hpp"
#include "rng.hpp"

namespace mshr {

double iou(const SegmentationMask& a, const SegmentationMask& b) {
  if (a.width != b.width || a.height != b.height)
    fail(ErrorCode::DimensionMismatch, "iou: mask dimensions differ");
  std::int64_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < a.bits.size(); ++i) {
    inter += a.bits[i] & b.bits[i];
    uni += a.bits[i] | b.bits[i];
  }
  if (uni == 0) return 0.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

namespace {

struct IntegralMask {
  std::int32_t width, height;
  std::vector<std::int64_t> sums;  // (height+1) x (width+1)

  explicit IntegralMask(const SegmentationMask& m)
      : width(m.width), height(m.height),
        sums(static_cast<std::size_t>(m.width + 1) * (m.height + 1), 0) {
    for (std::int32_t r = 0; r < height; ++r)
      for (std::int32_t c = 0; c < width; ++c)
        at(r + 1, c + 1) = m.bits[static_cast<std::size_t>(r) * width + c] +
                           at(r, c + 1) + at(r + 1, c) - at(r, c);
  }

  std::int64_t& at(std::int32_t r, std::int32_t c) {
    return sums[static_cast<std::size_t>(r) * (width + 1) + c];
  }
  std::int64_t at(std::int32_t r, std::int32_t c) const {
    return sums[static_cast<std::size_t>(r) * (width + 1) + c];
  }
  // inclusive corners
  std::int64_t box(std::int32_t r0, std::int32_t c0, std::int32_t r1,
                   std::int32_t c1) const {
    return at(r1 + 1, c1 + 1) - at(r0, c1 + 1) - at(r1 + 1, c0) + at(r0, c0);
  }
};

Rect tight_bbox(const SegmentationMask& m) {
  std::int32_t r0 = m.height, c0 = m.width, r1 = -1, c1 = -1;
  for (std::int32_t r = 0; r < m.height; ++r)
    for (std::int32_t c = 0; c < m.width; ++c)
      if (m.bits[static_cast<std::size_t>(r) * m.width + c]) {
        r0 = std::min(r0, r);
        c0 = std::min(c0, c);
        r1 = std::max(r1, r);
        c1 = std::max(c1, c);
      }
  if (r1 < 0) fail(ErrorCode::EmptyRegion, "best_box: empty mask");
  return Rect{r0, c0, r1 - r0 + 1, c1 - c0 + 1};
}

double box_phi(const IntegralMask& integral, std::int64_t mask_area,
               std::int32_t top, std::int32_t left, std::int32_t bottom,
               std::int32_t right) {
  const std::int64_t inter = integral.box(top, left, bottom, right);
  const std::int64_t box_area =
      static_cast<std::int64_t>(bottom - top + 1) * (right - left + 1);
  return static_cast<double>(inter) /
         static_cast<double>(mask_area + box_area - inter);
}

BestBoxResult best_box_exhaustive(const SegmentationMask& gt) {
  const Rect bb = tight_bbox(gt);
  const IntegralMask integral(gt);
  const std::int64_t mask_area = gt.area();

  BestBoxResult best;
  best.phi = -1.0;
  for (std::int32_t top = bb.row0; top < bb.row_end(); ++top) {
    for (std::int32_t bottom = top; bottom < bb.row_end(); ++bottom) {
      for (std::int32_t left = bb.col0; left < bb.col_end(); ++left) {
        for (std::int32_t right = left; right < bb.col_end(); ++right) {
          const double phi = box_phi(integral, mask_area, top, left, bottom, right);
          if (phi > best.phi) {
            best.phi = phi;
            best.box = Rect{top, left, bottom - top + 1, right - left + 1};
          }
        }
      }
    }
  }
  best.exact = true;
  return best;
}

struct Box {
  std::int32_t top, left, bottom, right;  // inclusive
};

BestBoxResult ascend(const SegmentationMask& gt, const IntegralMask& integral,
                     std::int64_t mask_area, Box box) {
  static constexpr std::int32_t kSteps[] = {1, -1, 2, -2, 4, -4, 8, -8, 16, -16};
  double phi = box_phi(integral, mask_area, box.top, box.left, box.bottom, box.right);
  for (;;) {
    Box best_move = box;
    double best_phi = phi;
    for (std::int32_t edge = 0; edge < 4; ++edge) {
      for (const std::int32_t step : kSteps) {
        Box cand = box;
        switch (edge) {
          case 0: cand.top += step; break;
          case 1: cand.left += step; break;
          case 2: cand.bottom += step; break;
          case 3: cand.right += step; break;
        }
        cand.top = std::clamp(cand.top, 0, gt.height - 1);
        cand.bottom = std::clamp(cand.bottom, 0, gt.height - 1);
        cand.left = std::clamp(cand.left, 0, gt.width - 1);
        cand.right = std::clamp(cand.right, 0, gt.width - 1);
        if (cand.top > cand.bottom || cand.left > cand.right) continue;
        const double p = box_phi(integral, mask_area, cand.top, cand.left,
                                 cand.bottom, cand.right);
        if (p > best_phi) {
          best_phi = p;
          best_move = cand;
        }
      }
    }
    if (best_phi <= phi) break;
    phi = best_phi;
    box = best_move;
  }
  return {Rect{box.top, box.left, box.bottom - box.top + 1,
               box.right - box.left + 1},
          phi, false};
}

// Bounding boxes of the largest 4-connected foreground components. Each is a
// candidate basin of its own, which matters when the mask has disjoint lobes
// and the optimum covers only one of them.
std::vector<Box> component_boxes(const SegmentationMask& m, std::size_t max_k) {
  struct Comp {
    Box box;
    std::int64_t area;
  };
  std::vector<Comp> comps;
  std::vector<std::uint8_t> seen(m.bits.size(), 0);
  std::vector<std::int64_t> queue;
  for (std::size_t start = 0; start < m.bits.size(); ++start) {
    if (!m.bits[start] || seen[start]) continue;
    Comp comp{{m.height, m.width, -1, -1}, 0};
    queue.clear();
    queue.push_back(static_cast<std::int64_t>(start));
    seen[start] = 1;
    while (!queue.empty()) {
      const std::int64_t p = queue.back();
      queue.pop_back();
      const auto r = static_cast<std::int32_t>(p / m.width);
      const auto c = static_cast<std::int32_t>(p % m.width);
      ++comp.area;
      comp.box.top = std::min(comp.box.top, r);
      comp.box.left = std::min(comp.box.left, c);
      comp.box.bottom = std::max(comp.box.bottom, r);
      comp.box.right = std::max(comp.box.right, c);
      const std::int64_t nbr[4] = {c > 0 ? p - 1 : -1,
                                   c + 1 < m.width ? p + 1 : -1,
                                   r > 0 ? p - m.width : -1,
                                   r + 1 < m.height ? p + m.width : -1};
      for (const std::int64_t q : nbr) {
        if (q < 0 || seen[static_cast<std::size_t>(q)] ||
            !m.bits[static_cast<std::size_t>(q)])
          continue;
        seen[static_cast<std::size_t>(q)] = 1;
        queue.push_back(q);
      }
    }
    comps.push_back(comp);
  }
  std::sort(comps.begin(), comps.end(),
            [](const Comp& a, const Comp& b) { return a.area > b.area; });
  if (comps.size() > max_k) comps.resize(max_k);
  std::vector<Box> boxes;
  for (const Comp& c : comps) boxes.push_back(c.box);
  return boxes;
}

BestBoxResult best_box_heuristic(const SegmentationMask& gt) {
  const Rect bb = tight_bbox(gt);
  const IntegralMask integral(gt);
  const std::int64_t mask_area = gt.area();

  const Box start{bb.row0, bb.col0, bb.row_end() - 1, bb.col_end() - 1};
  BestBoxResult best = ascend(gt, integral, mask_area, start);

  // Halves and quadrants of the bounding box seed ascents on one lobe of
  // multi-lobe masks, where the optimum is a sub-box the full-box basin misses.
  const std::int32_t mid_row = (start.top + start.bottom) / 2;
  const std::int32_t mid_col = (start.left + start.right) / 2;
  const Box fixed_starts[] = {
      {start.top, start.left, mid_row, start.right},
      {mid_row, start.left, start.bottom, start.right},
      {start.top, start.left, start.bottom, mid_col},
      {start.top, mid_col, start.bottom, start.right},
      {start.top, start.left, mid_row, mid_col},
      {start.top, mid_col, mid_row, start.right},
      {mid_row, start.left, start.bottom, mid_col},
      {mid_row, mid_col, start.bottom, start.right},
  };
  for (const Box& b : fixed_starts) {
    const BestBoxResult r = ascend(gt, integral, mask_area, b);
    if (r.phi > best.phi) best = r;
  }
  for (const Box& b : component_boxes(gt, 8)) {
    const BestBoxResult r = ascend(gt, integral, mask_area, b);
    if (r.phi > best.phi) best = r;
  }

  Rng rng(0x9e3779b97f4a7c15ULL);
  for (std::int32_t restart = 0; restart < 8; ++restart) {
    auto jitter = [&rng](std::int32_t extent) {
      const std::int32_t span = std::max(1, extent / 4);
      return rng.range_int(-span, span);
    };
    Box b{start.top + jitter(bb.height), start.left + jitter(bb.width),
          start.bottom + jitter(bb.height), start.right + jitter(bb.width)};
    b.top = std::clamp(b.top, 0, gt.height - 1);
    b.bottom = std::clamp(b.bottom, 0, gt.height - 1);
    b.left = std::clamp(b.left, 0, gt.width - 1);
    b.right = std::clamp(b.right, 0, gt.width - 1);
    if (b.top > b.bottom) std::swap(b.top, b.bottom);
    if (b.left > b.right) std::swap(b.left, b.right);
    const BestBoxResult r = ascend(gt, integral, mask_area, b);
    if (r.phi > best.phi) best = r;
  }
  return best;
}

}  // namespace

BestBoxResult best_box(const SegmentationMask& gt, bool exhaustive) {
  return exhaustive ? best_box_exhaustive(gt) : best_box_heuristic(gt);
}

OverlapSummary overlap_curve(const std::vector<SegmentationMask>& pred,
                             const std::vector<SegmentationMask>& gt) {
  if (pred.size() != gt.size())
    fail(ErrorCode::DimensionMismatch, "overlap_curve: frame count mismatch");
  if (pred.empty())
    fail(ErrorCode::InvalidArgument, "overlap_curve: no frames");

  OverlapSummary s;
  s.per_frame.reserve(pred.size());
  double total = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double phi = iou(pred[i], gt[i]);
    s.per_frame.push_back(phi);
    total += phi;
  }
  s.mean = total / static_cast<double>(s.per_frame.size());

  std::vector<double> sorted = s.per_frame;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  s.median = (n % 2 == 1) ? sorted[n / 2]
                          : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  return s;
}

}  // namespace mshr
