#include "tracker.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "error.hpp"

namespace mshr {

void validate_config(const TrackerConfig& c) {
  if (c.tree.quantization_bins < 2)
    fail(ErrorCode::InvalidArgument, "config: quantization_bins must be >= 2");
  if (c.stability.delta < 1)
    fail(ErrorCode::InvalidArgument, "config: delta must be >= 1");
  if (c.stability.min_area < 1)
    fail(ErrorCode::InvalidArgument, "config: min_area must be >= 1");
  if (c.stability.max_area_fraction <= 0.0 || c.stability.max_area_fraction > 1.0)
    fail(ErrorCode::InvalidArgument, "config: max_area_fraction must be in (0, 1]");
  if (c.weights.w_area < 0.0 || c.weights.w_axes < 0.0 ||
      c.weights.w_channel_mean < 0.0 || c.weights.w_channel_dev < 0.0)
    fail(ErrorCode::InvalidArgument, "config: weights must be >= 0");
  if (c.weights.w_area + c.weights.w_axes + c.weights.w_channel_mean +
          c.weights.w_channel_dev <= 0.0)
    fail(ErrorCode::InvalidArgument, "config: at least one weight must be > 0");
  if (c.weights.centroid_gate_radius < 0.0)
    fail(ErrorCode::InvalidArgument, "config: centroid_gate_radius must be >= 0");
  if (c.lambda < 0.0 || c.lambda > 1.0)
    fail(ErrorCode::InvalidArgument, "config: lambda must be in [0, 1]");
  if (c.search_factor < 1.0)
    fail(ErrorCode::InvalidArgument, "config: search_factor must be >= 1");
  if (c.max_targets < 1)
    fail(ErrorCode::InvalidArgument, "config: max_targets must be >= 1");
  if (c.accept_threshold < 0.0)
    fail(ErrorCode::InvalidArgument, "config: accept_threshold must be >= 0");
}

Rect search_region(const Rect& last_bbox, std::int32_t frame_width,
                   std::int32_t frame_height, double factor) {
  if (factor < 1.0)
    fail(ErrorCode::InvalidArgument, "search_region: factor must be >= 1");
  if (last_bbox.height < 1 || last_bbox.width < 1)
    fail(ErrorCode::InvalidArgument, "search_region: degenerate bbox");

  const double cr = last_bbox.row0 + last_bbox.height / 2.0;
  const double cc = last_bbox.col0 + last_bbox.width / 2.0;
  auto nh = static_cast<std::int32_t>(std::llround(last_bbox.height * factor));
  auto nw = static_cast<std::int32_t>(std::llround(last_bbox.width * factor));
  nh = std::max(nh, 1);
  nw = std::max(nw, 1);

  auto r0 = static_cast<std::int32_t>(std::floor(cr - nh / 2.0));
  auto c0 = static_cast<std::int32_t>(std::floor(cc - nw / 2.0));
  if (nh >= frame_height) {
    r0 = 0;
    nh = frame_height;
  } else {
    r0 = std::clamp(r0, 0, frame_height - nh);
  }
  if (nw >= frame_width) {
    c0 = 0;
    nw = frame_width;
  } else {
    c0 = std::clamp(c0, 0, frame_width - nw);
  }
  return Rect{r0, c0, nh, nw};
}

namespace {

double now_ms() {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

std::vector<ComponentTree> build_hierarchies(const MultichannelImage& img,
                                             const TrackerConfig& config,
                                             std::vector<ComponentTree>& pool) {
  auto donor = [&pool]() -> ComponentTree {
    if (pool.empty()) return {};
    ComponentTree t = std::move(pool.back());
    pool.pop_back();
    return t;
  };
  std::vector<ComponentTree> trees;
  if (!config.extremal_baseline) {
    trees.push_back(build_component_tree(img, config.tree, donor()));
  } else {
    for (std::int32_t ch = 0; ch < img.channels; ++ch) {
      trees.push_back(build_levelset_tree(img, ch, true, donor()));
      trees.push_back(build_levelset_tree(img, ch, false, donor()));
    }
  }
  return trees;
}

SegmentationMask full_frame_mask(const ComponentTree& tree, std::int32_t node,
                                 std::int32_t frame_width, std::int32_t frame_height,
                                 std::int32_t origin_row, std::int32_t origin_col) {
  SegmentationMask mask(frame_width, frame_height);
  for (const std::int64_t p : tree.region_pixels(node)) {
    const std::int64_t r = origin_row + p / tree.width;
    const std::int64_t c = origin_col + p % tree.width;
    mask.bits[static_cast<std::size_t>(r) * frame_width + c] = 1;
  }
  return mask;
}

Rect offset_rect(const Rect& r, std::int32_t dr, std::int32_t dc) {
  return Rect{r.row0 + dr, r.col0 + dc, r.height, r.width};
}

struct Candidate {
  double distance = std::numeric_limits<double>::infinity();
  std::int64_t area = 0;
  std::int32_t tree_index = -1;
  std::int32_t node = -1;
};

/// Scans all nodes of all hierarchies, keeping the minimum-distance node with
/// (smaller area, smaller tree index, smaller node id) tie-breaks. The
/// area term bounds the total distance from below, so candidates whose area
/// mismatch alone exceeds the current best are skipped before the ellipse
/// work.
Candidate match_model(const std::vector<ComponentTree>& trees,
                      const FeatureVector& model, const TrackerConfig& config,
                      std::int32_t origin_row, std::int32_t origin_col) {
  const FeatureWeights& w = config.weights;
  const double gate_sq =
      w.centroid_gate_radius > 0.0
          ? w.centroid_gate_radius * w.centroid_gate_radius
          : std::numeric_limits<double>::infinity();

  Candidate best;
  for (std::size_t ti = 0; ti < trees.size(); ++ti) {
    const ComponentTree& t = trees[ti];
    const double max_area = config.stability.max_area_fraction *
                            static_cast<double>(t.width) * t.height;
    const std::int32_t nch = t.channels;

    for (std::int32_t n = 0; n < t.node_count(); ++n) {
      const std::int64_t area = t.area[n];
      if (area < config.stability.min_area ||
          static_cast<double>(area) > max_area)
        continue;

      const double m00 = static_cast<double>(area);
      const double delta_area =
          std::abs(m00 - model.area) / std::max({m00, std::abs(model.area), 1e-6});
      double d = w.w_area * delta_area;
      if (d > best.distance) continue;

      const double cr = static_cast<double>(t.m10[n]) / m00 + origin_row;
      const double cc = static_cast<double>(t.m01[n]) / m00 + origin_col;
      const double gr = cr - model.centroid_row;
      const double gc = cc - model.centroid_col;
      if (gr * gr + gc * gc > gate_sq) continue;

      using i128 = __int128;
      const i128 M20 = static_cast<i128>(area) * t.m20[n] -
                       static_cast<i128>(t.m10[n]) * t.m10[n];
      const i128 M02 = static_cast<i128>(area) * t.m02[n] -
                       static_cast<i128>(t.m01[n]) * t.m01[n];
      const i128 M11 = static_cast<i128>(area) * t.m11[n] -
                       static_cast<i128>(t.m10[n]) * t.m01[n];
      const i128 diff = M20 - M02;
      const i128 disc = diff * diff + 4 * M11 * M11;
      const double n2 = m00 * m00;
      const double root = std::sqrt(static_cast<double>(disc));
      const double lam1 = (static_cast<double>(M20 + M02) + root) / (2.0 * n2);
      const double lam2 = (static_cast<double>(M20 + M02) - root) / (2.0 * n2);
      const double r1 = 2.0 * std::sqrt(std::max(lam1, 0.0));
      const double r2 = 2.0 * std::sqrt(std::max(lam2, 0.0));
      d += w.w_axes *
           (std::abs(r1 - model.r1) / std::max({r1, std::abs(model.r1), 1e-6}) +
            std::abs(r2 - model.r2) / std::max({r2, std::abs(model.r2), 1e-6}));
      if (d > best.distance) continue;

      for (std::int32_t ch = 0; ch < nch; ++ch) {
        double mean, dev;
        channel_stats(t.channel_sum[static_cast<std::size_t>(n) * nch + ch],
                      t.channel_sumsq[static_cast<std::size_t>(n) * nch + ch],
                      area, &mean, &dev);
        d += w.w_channel_mean * std::abs(mean - model.channel_mean[ch]) /
             std::max({std::abs(mean), std::abs(model.channel_mean[ch]), 1e-6});
        d += w.w_channel_dev * std::abs(dev - model.channel_dev[ch]) /
             std::max({std::abs(dev), std::abs(model.channel_dev[ch]), 1e-6});
      }

      const bool better =
          d < best.distance ||
          (d == best.distance &&
           (area < best.area ||
            (area == best.area &&
             (static_cast<std::int32_t>(ti) < best.tree_index ||
              (static_cast<std::int32_t>(ti) == best.tree_index && n < best.node)))));
      if (better)
        best = Candidate{d, area, static_cast<std::int32_t>(ti), n};
    }
  }
  return best;
}

}  // namespace

Tracker::Tracker(const TrackerConfig& config) : config_(config) {
  validate_config(config_);
}

void Tracker::init(const MultichannelImage& image, const Rect& init_box) {
  const MultichannelImage crop_img = crop(image, init_box);
  std::vector<ComponentTree> trees =
      build_hierarchies(crop_img, config_, tree_pool_);

  struct Pick {
    std::int32_t tree_index;
    MshrDetection det;
    std::int64_t area;
  };
  std::vector<Pick> picks;
  std::int64_t total_nodes = 0;
  for (std::size_t ti = 0; ti < trees.size(); ++ti) {
    total_nodes += trees[ti].node_count();
    for (const MshrDetection& det : extract_mshr(trees[ti], config_.stability))
      picks.push_back({static_cast<std::int32_t>(ti), det, trees[ti].area[det.node]});
  }
  if (picks.empty())
    fail(ErrorCode::NoRegion,
         "no MSHR in init region (" + std::to_string(total_nodes) +
             " tree nodes examined)");

  std::sort(picks.begin(), picks.end(), [](const Pick& a, const Pick& b) {
    if (a.det.stability != b.det.stability)
      return a.det.stability < b.det.stability;
    if (a.area != b.area) return a.area > b.area;
    if (a.tree_index != b.tree_index) return a.tree_index < b.tree_index;
    return a.det.node < b.det.node;
  });
  if (static_cast<std::int64_t>(picks.size()) > config_.max_targets)
    picks.resize(static_cast<std::size_t>(config_.max_targets));

  targets_.clear();
  frame_ = 0;
  for (const Pick& pick : picks) {
    const ComponentTree& t = trees[pick.tree_index];
    TargetState state;
    state.model = node_features(t, pick.det.node, crop_img.origin_row,
                                crop_img.origin_col);
    state.last_bbox = offset_rect(t.node_bbox(pick.det.node),
                                  crop_img.origin_row, crop_img.origin_col);
    state.last_mask = full_frame_mask(t, pick.det.node, image.width, image.height,
                                      crop_img.origin_row, crop_img.origin_col);
    state.last_distance = 0.0;
    targets_.push_back(std::move(state));
  }
  tree_pool_ = std::move(trees);
}

TrackResult Tracker::step(const MultichannelImage& image) {
  if (targets_.empty())
    fail(ErrorCode::InvalidArgument, "track_step: tracker is not initialized");
  const double t0 = now_ms();

  TrackResult result;
  for (TargetState& target : targets_) {
    const Rect region = search_region(target.last_bbox, image.width,
                                      image.height, config_.search_factor);
    const MultichannelImage crop_img = crop(image, region);
    std::vector<ComponentTree> trees =
        build_hierarchies(crop_img, config_, tree_pool_);
    const Candidate best =
        match_model(trees, target.model, config_, crop_img.origin_row,
                    crop_img.origin_col);

    TargetResult out;
    if (best.node != -1 && best.distance <= config_.accept_threshold) {
      const ComponentTree& t = trees[best.tree_index];
      const FeatureVector observed =
          node_features(t, best.node, crop_img.origin_row, crop_img.origin_col);
      target.model = update_features(target.model, observed, config_.lambda);
      target.last_bbox = offset_rect(t.node_bbox(best.node), crop_img.origin_row,
                                     crop_img.origin_col);
      target.last_mask = full_frame_mask(t, best.node, image.width, image.height,
                                         crop_img.origin_row, crop_img.origin_col);
      target.last_distance = best.distance;
      target.miss_count = 0;

      out.mask = target.last_mask;
      out.bbox = target.last_bbox;
      out.distance = best.distance;
      out.accepted = true;
      out.node = best.node;
    } else {
      ++target.miss_count;
      out.mask = SegmentationMask(image.width, image.height);
      out.bbox = target.last_bbox;
      out.distance = best.node != -1 ? best.distance : -1.0;
      out.accepted = false;
    }
    result.targets.push_back(std::move(out));
    tree_pool_ = std::move(trees);
  }

  ++frame_;
  result.millis = now_ms() - t0;
  return result;
}

SequenceResult track_sequence(const std::vector<MultichannelImage>& frames,
                              const Rect& init, const TrackerConfig& config) {
  if (frames.empty())
    fail(ErrorCode::InvalidArgument, "track_sequence: no frames");

  SequenceResult seq;
  Tracker tracker(config);
  const double t0 = now_ms();
  tracker.init(frames.front(), init);
  seq.init_millis = now_ms() - t0;

  seq.init_mask = SegmentationMask(frames.front().width, frames.front().height);
  for (std::int32_t i = 0; i < tracker.target_count(); ++i) {
    const SegmentationMask& m = tracker.target(i).last_mask;
    for (std::size_t b = 0; b < m.bits.size(); ++b)
      seq.init_mask.bits[b] |= m.bits[b];
  }
  seq.init_bbox = tracker.target(0).last_bbox;

  for (std::size_t f = 1; f < frames.size(); ++f)
    seq.results.push_back(tracker.step(frames[f]));
  return seq;
}

SlicesResult track_slices_3d(const std::vector<MultichannelImage>& slices,
                             std::int32_t init_slice, const Rect& init,
                             const TrackerConfig& config) {
  if (slices.empty())
    fail(ErrorCode::InvalidArgument, "track_slices_3d: no slices");
  if (init_slice < 0 || init_slice >= static_cast<std::int32_t>(slices.size()))
    fail(ErrorCode::OutOfRange, "track_slices_3d: init slice out of range");

  const std::int32_t n = static_cast<std::int32_t>(slices.size());
  SlicesResult out;
  out.masks.assign(n, SegmentationMask(slices[0].width, slices[0].height));
  out.accepted.assign(n, 0);
  out.millis.assign(n, 0.0);

  Tracker seed(config);
  const double t0 = now_ms();
  seed.init(slices[static_cast<std::size_t>(init_slice)], init);
  out.millis[init_slice] = now_ms() - t0;
  for (std::int32_t i = 0; i < seed.target_count(); ++i) {
    const SegmentationMask& m = seed.target(i).last_mask;
    for (std::size_t b = 0; b < m.bits.size(); ++b)
      out.masks[init_slice].bits[b] |= m.bits[b];
  }
  out.accepted[init_slice] = 1;

  auto run = [&](std::int32_t from, std::int32_t to, std::int32_t step) {
    Tracker tracker = seed;  // independent copy of the initialized state
    for (std::int32_t k = from; k != to; k += step) {
      const TrackResult r = tracker.step(slices[static_cast<std::size_t>(k)]);
      out.millis[k] = r.millis;
      for (const TargetResult& tr : r.targets) {
        if (!tr.accepted) continue;
        out.accepted[k] = 1;
        for (std::size_t b = 0; b < tr.mask.bits.size(); ++b)
          out.masks[k].bits[b] |= tr.mask.bits[b];
      }
    }
  };
  run(init_slice + 1, n, 1);
  run(init_slice - 1, -1, -1);
  return out;
}

}  // namespace mshr
