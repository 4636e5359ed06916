#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "image.hpp"

namespace mshr {

enum class EdgeNorm { L1, L2, Linf };

struct TreeParams {
  EdgeNorm norm = EdgeNorm::L2;
  std::int32_t quantization_bins = 256;
};

/// Magnitude of the edge between two pixels: norm of the channel difference.
double edge_magnitude(std::span<const std::int32_t> a,
                      std::span<const std::int32_t> b, EdgeNorm norm);
double edge_magnitude(const std::int32_t* a, const std::int32_t* b,
                      std::int32_t channels, EdgeNorm norm);

/// Largest magnitude any edge can reach for the given format; the upper end
/// of the quantization range.
double max_edge_magnitude(std::int32_t channels, std::int32_t max_value,
                          EdgeNorm norm);

/// Linear scaling of [0, max_magnitude] onto bins [0, bins-1].
std::int32_t quantize_magnitude(double magnitude, double max_magnitude,
                                std::int32_t bins);

/// Merge hierarchy over quantized 4-neighbor edge magnitudes. Nodes are the
/// quasi-flat zones: level-0 nodes are the exact flat zones of the quantized
/// edge graph, and an internal node at level L is the component formed when
/// its children connect through an edge of magnitude L. Levels are strictly
/// increasing toward the root, so the component of a pixel at threshold t is
/// its highest ancestor with level <= t.
///
/// Stored as parallel arrays indexed by node id. Ids are topological: every
/// parent id is larger than all of its children's ids.
struct ComponentTree {
  std::int32_t width = 0;
  std::int32_t height = 0;
  std::int32_t channels = 0;
  std::int32_t bins = 0;
  std::int32_t root = -1;

  std::vector<std::int32_t> parent;   // -1 at the root
  std::vector<std::int32_t> level;
  std::vector<std::int64_t> area;     // m00
  std::vector<std::int64_t> m10, m01, m20, m02, m11;  // sums of r^p c^q
  std::vector<std::int64_t> channel_sum;    // node * channels + ch
  std::vector<std::int64_t> channel_sumsq;
  std::vector<std::int32_t> bbox_row0, bbox_col0;  // inclusive bounds
  std::vector<std::int32_t> bbox_row1, bbox_col1;
  std::vector<std::int64_t> min_pixel;      // smallest linear pixel index
  std::vector<std::int32_t> max_child;      // largest-area child, -1 at leaves

  std::vector<std::int32_t> child_start;    // CSR over children, node_count+1
  std::vector<std::int32_t> child_list;
  std::vector<std::int64_t> pixel_start;    // subtree range into pixel_order
  std::vector<std::int64_t> pixel_order;    // permutation of pixel indices
  std::vector<std::int32_t> pixel_node;     // pixel -> its flat-zone node

  std::int32_t node_count() const {
    return static_cast<std::int32_t>(parent.size());
  }
  std::int32_t child_count(std::int32_t node) const {
    return child_start[node + 1] - child_start[node];
  }
  Rect node_bbox(std::int32_t node) const {
    return Rect{bbox_row0[node], bbox_col0[node],
                bbox_row1[node] - bbox_row0[node] + 1,
                bbox_col1[node] - bbox_col0[node] + 1};
  }

  /// Highest ancestor-or-self of the pixel's zone with level <= t.
  std::int32_t component_at(std::int64_t pixel, std::int32_t t) const;

  /// All pixels of the node's region; |span| = area[node].
  std::span<const std::int64_t> region_pixels(std::int32_t node) const;

  /// Full-frame mask of the node's region.
  SegmentationMask node_mask(std::int32_t node) const;

  /// Debug dump: id, parent, level, area, bbox per node.
  std::string dump_json() const;

  void check_node(std::int32_t node) const;
};

ComponentTree build_component_tree(const MultichannelImage& image,
                                   const TreeParams& params);

/// Same build, but reusing the storage of a tree that is being discarded.
/// Inside a frame loop this keeps the per-frame cost free of large
/// allocations once the buffers have grown to frame size.
ComponentTree build_component_tree(const MultichannelImage& image,
                                   const TreeParams& params,
                                   ComponentTree&& recycle);

/// Gray-level threshold hierarchy of one channel, the extremal-region
/// counterpart used by the tracker baseline. The edge level is
/// max(key(a), key(b)) with key = max_value - v for bright regions or key = v
/// for dark ones, so the node containing p at threshold t is the connected
/// component of {key <= t} around p.
ComponentTree build_levelset_tree(const MultichannelImage& image,
                                  std::int32_t channel, bool bright);
ComponentTree build_levelset_tree(const MultichannelImage& image,
                                  std::int32_t channel, bool bright,
                                  ComponentTree&& recycle);

}  // namespace mshr
