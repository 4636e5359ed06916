#pragma once

#include <cstdint>
#include <vector>

#include "component_tree.hpp"
#include "features.hpp"
#include "image.hpp"
#include "stability.hpp"

namespace mshr {

struct TrackerConfig {
  TreeParams tree;
  StabilityParams stability;
  FeatureWeights weights;
  double lambda = 0.5;
  double search_factor = 2.0;
  std::int32_t max_targets = 1;
  double accept_threshold = 1.0;
  bool extremal_baseline = false;  // per-channel level-set trees instead of
                                   // the edge-based component-tree
};

void validate_config(const TrackerConfig& config);

struct TargetState {
  FeatureVector model;
  Rect last_bbox;              // last accepted bbox, full-frame
  SegmentationMask last_mask;  // full-frame
  double last_distance = 0.0;
  std::int32_t miss_count = 0;
};

struct TargetResult {
  SegmentationMask mask;  // full-frame; empty when the match was rejected
  Rect bbox;              // matched node bbox, full-frame
  double distance = 0.0;  // best candidate distance; negative if none existed
  bool accepted = false;
  std::int32_t node = -1;
};

struct TrackResult {
  std::vector<TargetResult> targets;
  double millis = 0.0;
};

/// Same center, dimensions scaled by the factor, then shifted into the frame
/// and trimmed only if larger than the frame.
Rect search_region(const Rect& last_bbox, std::int32_t frame_width,
                   std::int32_t frame_height, double factor);

class Tracker {
 public:
  explicit Tracker(const TrackerConfig& config);

  /// Extracts MSHR inside the init box and keeps the max_targets most stable
  /// ones as models. Throws NoRegion when nothing qualifies.
  void init(const MultichannelImage& image, const Rect& init_box);

  /// One frame: per target, crop the search region, build the hierarchy,
  /// match the model against every candidate node, and either accept (emit
  /// mask, blend model) or miss (freeze model and anchor).
  TrackResult step(const MultichannelImage& image);

  bool initialized() const { return !targets_.empty(); }
  std::int32_t target_count() const { return static_cast<std::int32_t>(targets_.size()); }
  const TargetState& target(std::int32_t i) const { return targets_.at(i); }
  std::int32_t frame_index() const { return frame_; }
  const TrackerConfig& config() const { return config_; }

 private:
  TrackerConfig config_;
  std::vector<TargetState> targets_;
  std::vector<ComponentTree> tree_pool_;  // retired trees, reused next frame
  std::int32_t frame_ = 0;
};

struct SequenceResult {
  std::vector<TrackResult> results;  // frames after the init frame
  double init_millis = 0.0;
  SegmentationMask init_mask;  // union of the init targets
  Rect init_bbox;
};

SequenceResult track_sequence(const std::vector<MultichannelImage>& frames,
                              const Rect& init, const TrackerConfig& config);

struct SlicesResult {
  std::vector<SegmentationMask> masks;  // one per slice; empty on rejection
  std::vector<std::uint8_t> accepted;
  std::vector<double> millis;
};

/// Init on the chosen slice, then track outward with two independent copies
/// of the initialized state: forward over later slices, backward over
/// earlier ones.
SlicesResult track_slices_3d(const std::vector<MultichannelImage>& slices,
                             std::int32_t init_slice, const Rect& init,
                             const TrackerConfig& config);

}  // namespace mshr
