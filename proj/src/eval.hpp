#pragma once

#include <cstdint>
#include <vector>

#include "image.hpp"

namespace mshr {

/// |a intersect b| / |a union b|; 0 when both masks are empty.
double iou(const SegmentationMask& a, const SegmentationMask& b);

struct BestBoxResult {
  Rect box;
  double phi = 0.0;  // IoU the box achieves against the mask
  bool exact = false;
};

/// Highest-IoU axis-aligned box for a ground-truth mask. Exhaustive mode
/// enumerates every integer box inside the mask's tight bounding box (any
/// optimum can be clipped to it without losing intersection, so the global
/// maximum is attained there) with O(1) scoring via an integral image.
/// Heuristic mode runs best-improvement coordinate ascent over the four box
/// edges from the tight bounding box, with deterministic perturbed restarts.
BestBoxResult best_box(const SegmentationMask& gt, bool exhaustive);

struct OverlapSummary {
  std::vector<double> per_frame;
  double mean = 0.0;
  double median = 0.0;
};

OverlapSummary overlap_curve(const std::vector<SegmentationMask>& pred,
                             const std::vector<SegmentationMask>& gt);

}  // namespace mshr
