#pragma once

#include <cstdint>
#include <vector>

#include "component_tree.hpp"

namespace mshr {

struct StabilityParams {
  std::int32_t delta = 5;
  std::int64_t min_area = 30;
  double max_area_fraction = 0.5;
  bool normalized = false;  // divide by |R_i| instead of subtracting it
};

struct MshrDetection {
  std::int32_t node = -1;
  std::int32_t level = 0;
  double stability = 0.0;
};

/// s(i) over the branch through `node`, level i = level(node):
/// R_{i+delta} is the highest ancestor with level <= i+delta (the root when
/// the walk runs out), R_{i-delta} follows the maximum-area child chain while
/// the level exceeds max(i-delta, 0), clamping at the flat zone. Returns
/// |R_{i+d}| - |R_{i-d}| - |R_i|, or (|R_{i+d}| - |R_{i-d}|) / |R_i| when
/// normalized.
double stability(const ComponentTree& tree, std::int32_t node,
                 std::int32_t delta, bool normalized = false);

std::vector<double> stability_all(const ComponentTree& tree,
                                  std::int32_t delta, bool normalized);

/// Local minima of s along branches (s <= parent's s and <= max-area child's
/// s, vacuously true where either is missing), filtered by
/// [min_area, max_area_fraction * image area], sorted by ascending s with
/// (descending area, ascending node id) tie-breaks.
std::vector<MshrDetection> extract_mshr(const ComponentTree& tree,
                                        const StabilityParams& params);

}  // namespace mshr
