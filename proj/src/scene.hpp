#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "image.hpp"

namespace mshr {

struct SceneFrame {
  MultichannelImage image;
  SegmentationMask gt;
};

struct Scene {
  std::vector<SceneFrame> frames;
  Rect init;                    // suggested init box (on frame 0 / init slice)
  std::int32_t init_slice = 0;  // sphere: the equator slice
  std::vector<double> analytic_area;  // sphere: exact circle areas per slice
};

// Deterministic synthetic sequences with exact ground truth.
//
//   fig1-block   gray block (130) drifting and rotating over a split
//                background that is darker on one side and lighter on the
//                other, so the block is homogeneous but never extremal
//   color-block  same geometry, three channels
//   sphere       slice stack of a voxelized sphere, equator in the middle
struct SceneParams {
  std::string kind = "fig1-block";
  std::int32_t frames = 50;
  std::int32_t width = 0;   // 0: kind default
  std::int32_t height = 0;
  std::uint64_t seed = 1;
  double max_shift = 8.0;     // max |translation| per frame, pixels
  double max_rot_deg = 5.0;   // max |rotation| per frame, degrees
  std::int32_t occlude_frame = -1;  // render background only on this frame
};

Scene generate_scene(const SceneParams& params);

}  // namespace mshr
