#include <cmath>
#include <vector>

#include "doctest.h"
#include "error.hpp"
#include "eval.hpp"
#include "scene.hpp"
#include "stability.hpp"
#include "tracker.hpp"

using namespace mshr;

namespace {

TrackerConfig test_config() {
  TrackerConfig c;
  c.tree.quantization_bins = 256;
  c.stability.delta = 5;
  c.stability.min_area = 30;
  c.stability.max_area_fraction = 0.5;
  c.stability.normalized = true;
  c.lambda = 0.5;
  c.search_factor = 2.0;
  c.accept_threshold = 0.6;
  return c;
}

MultichannelImage flat_frame(std::int32_t w, std::int32_t h, std::int32_t value) {
  MultichannelImage img(w, h, 1);
  for (auto& s : img.samples) s = value;
  return img;
}

void paint_rect(MultichannelImage& img, Rect r, std::int32_t value) {
  for (std::int32_t row = r.row0; row < r.row_end(); ++row)
    for (std::int32_t col = r.col0; col < r.col_end(); ++col)
      img.at(row, col, 0) = value;
}

Rect mask_bbox(const SegmentationMask& m, std::int32_t margin) {
  std::int32_t r0 = m.height, c0 = m.width, r1 = -1, c1 = -1;
  for (std::int32_t r = 0; r < m.height; ++r)
    for (std::int32_t c = 0; c < m.width; ++c)
      if (m.get(r, c)) {
        r0 = std::min(r0, r);
        c0 = std::min(c0, c);
        r1 = std::max(r1, r);
        c1 = std::max(c1, c);
      }
  r0 = std::max(0, r0 - margin);
  c0 = std::max(0, c0 - margin);
  r1 = std::min(m.height - 1, r1 + margin);
  c1 = std::min(m.width - 1, c1 + margin);
  return Rect{r0, c0, r1 - r0 + 1, c1 - c0 + 1};
}

}  // namespace

TEST_CASE("search_region scales about the center and clamps to the frame") {
  // Doubling (10,10,20,30) centers (20,25): rows fit, columns clamp at 0.
  const Rect doubled = search_region(Rect{10, 10, 20, 30}, 200, 100, 2.0);
  CHECK(doubled == Rect{0, 0, 40, 60});

  CHECK(search_region(Rect{10, 10, 20, 30}, 200, 100, 1.0) ==
        Rect{10, 10, 20, 30});

  // Corner box: the center shifts as the region is pushed inside.
  CHECK(search_region(Rect{0, 0, 20, 20}, 100, 100, 2.0) ==
        Rect{0, 0, 40, 40});

  // Near the far edge the region slides back instead of shrinking.
  CHECK(search_region(Rect{40, 40, 10, 10}, 50, 50, 2.0) ==
        Rect{30, 30, 20, 20});

  // Larger than the frame: take the whole axis.
  CHECK(search_region(Rect{5, 5, 10, 10}, 30, 20, 10.0) ==
        Rect{0, 0, 20, 30});
}

TEST_CASE("config validation rejects out-of-range parameters") {
  CHECK_NOTHROW(validate_config(test_config()));

  auto broken = [](auto mutate) {
    TrackerConfig c = test_config();
    mutate(c);
    CHECK_THROWS_AS(validate_config(c), Error);
  };
  broken([](TrackerConfig& c) { c.tree.quantization_bins = 1; });
  broken([](TrackerConfig& c) { c.stability.delta = 0; });
  broken([](TrackerConfig& c) { c.stability.min_area = 0; });
  broken([](TrackerConfig& c) { c.stability.max_area_fraction = 0.0; });
  broken([](TrackerConfig& c) { c.stability.max_area_fraction = 1.5; });
  broken([](TrackerConfig& c) { c.weights.w_area = -1.0; });
  broken([](TrackerConfig& c) {
    c.weights = FeatureWeights{0.0, 0.0, 0.0, 0.0, 0.0};
  });
  broken([](TrackerConfig& c) { c.weights.centroid_gate_radius = -2.0; });
  broken([](TrackerConfig& c) { c.lambda = -0.1; });
  broken([](TrackerConfig& c) { c.lambda = 1.1; });
  broken([](TrackerConfig& c) { c.search_factor = 0.5; });
  broken([](TrackerConfig& c) { c.max_targets = 0; });
  broken([](TrackerConfig& c) { c.accept_threshold = -1.0; });
}

TEST_CASE("init locks onto the homogeneous block of a split-background frame") {
  SceneParams p;
  p.kind = "fig1-block";
  p.frames = 1;
  p.seed = 3;
  const Scene scene = generate_scene(p);
  const SceneFrame& f0 = scene.frames.front();

  Tracker tracker(test_config());
  tracker.init(f0.image, scene.init);
  CHECK(tracker.target_count() == 1);
  const TargetState& t = tracker.target(0);
  CHECK(t.last_mask == f0.gt);
  CHECK(t.model.area == static_cast<double>(f0.gt.area()));
  CHECK(t.last_bbox == mask_bbox(f0.gt, 0));
  CHECK(t.miss_count == 0);
}

TEST_CASE("init reports no region on a uniform frame") {
  const MultichannelImage img = flat_frame(64, 64, 90);
  Tracker tracker(test_config());
  try {
    tracker.init(img, Rect{8, 8, 40, 40});
    FAIL("init should have thrown");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoRegion);
    CHECK(std::string(e.what()).find("no MSHR in init region") !=
          std::string::npos);
  }
  CHECK_FALSE(tracker.initialized());
}

TEST_CASE("init outside the frame is rejected") {
  const MultichannelImage img = flat_frame(32, 32, 10);
  Tracker tracker(test_config());
  CHECK_THROWS_AS(tracker.init(img, Rect{100, 100, 8, 8}), Error);
}

TEST_CASE("init keeps nested stable squares ordered by stability") {
  // Checkered background and ring leave only the uniform inner square and
  // the combined outer square as stability minima.
  MultichannelImage img(40, 40, 1);
  for (std::int32_t r = 0; r < 40; ++r)
    for (std::int32_t c = 0; c < 40; ++c) img.at(r, c, 0) = (r + c) % 2;
  for (std::int32_t r = 5; r < 35; ++r)
    for (std::int32_t c = 5; c < 35; ++c) img.at(r, c, 0) = 180 + (r + c) % 2;
  paint_rect(img, Rect{15, 15, 10, 10}, 250);

  TrackerConfig cfg = test_config();
  cfg.stability.min_area = 20;
  cfg.stability.max_area_fraction = 0.8;
  cfg.max_targets = 2;

  Tracker tracker(cfg);
  tracker.init(img, Rect{1, 1, 38, 38});
  REQUIRE(tracker.target_count() == 2);
  CHECK(tracker.target(0).model.area == 100.0);  // inner square, s = 0
  CHECK(tracker.target(1).model.area == 900.0);  // outer square
  CHECK(tracker.target(0).last_bbox == Rect{15, 15, 10, 10});
  CHECK(tracker.target(1).last_bbox == Rect{5, 5, 30, 30});

  // Same picks as running the detector on the crop directly.
  const MultichannelImage cropped = crop(img, Rect{1, 1, 38, 38});
  const ComponentTree tree = build_component_tree(cropped, cfg.tree);
  const std::vector<MshrDetection> dets = extract_mshr(tree, cfg.stability);
  REQUIRE(dets.size() == 2);
  CHECK(tree.area[dets[0].node] == 100);
  CHECK(tree.area[dets[1].node] == 900);
  CHECK(dets[0].stability <= dets[1].stability);
}

TEST_CASE("a static sequence is a fixpoint") {
  SceneParams p;
  p.kind = "fig1-block";
  p.frames = 1;
  p.seed = 5;
  const Scene scene = generate_scene(p);
  const SceneFrame& f0 = scene.frames.front();

  TrackerConfig cfg = test_config();
  cfg.accept_threshold = 1.0;
  Tracker tracker(cfg);
  tracker.init(f0.image, scene.init);
  const FeatureVector model0 = tracker.target(0).model;

  for (int rep = 0; rep < 3; ++rep) {
    const TrackResult res = tracker.step(f0.image);
    REQUIRE(res.targets.size() == 1);
    CHECK(res.targets[0].accepted);
    CHECK(res.targets[0].distance == 0.0);
    CHECK(res.targets[0].mask == f0.gt);
    CHECK(res.millis >= 0.0);

    // Blending a model with itself at lambda 0.5 moves nothing.
    const FeatureVector& m = tracker.target(0).model;
    CHECK(m.area == model0.area);
    CHECK(m.centroid_row == model0.centroid_row);
    CHECK(m.centroid_col == model0.centroid_col);
    CHECK(m.r1 == model0.r1);
    CHECK(m.r2 == model0.r2);
    CHECK(m.theta == doctest::Approx(model0.theta).epsilon(1e-12));
    CHECK(m.channel_mean == model0.channel_mean);
    CHECK(m.channel_dev == model0.channel_dev);
  }
}

TEST_CASE("a square translating 8 px per frame stays segmented exactly") {
  const std::int32_t side = 28;
  std::vector<MultichannelImage> frames;
  std::vector<SegmentationMask> gt;
  for (int t = 0; t < 6; ++t) {
    MultichannelImage img = flat_frame(160, 60, 30);
    const Rect sq{16, 10 + 8 * t, side, side};
    paint_rect(img, sq, 220);
    frames.push_back(img);
    SegmentationMask m(160, 60);
    for (std::int32_t r = sq.row0; r < sq.row_end(); ++r)
      for (std::int32_t c = sq.col0; c < sq.col_end(); ++c) m.set(r, c);
    gt.push_back(m);
  }

  Tracker tracker(test_config());
  tracker.init(frames[0], Rect{2, 0, 56, 56});
  CHECK(tracker.target(0).last_mask == gt[0]);

  for (int t = 1; t < 6; ++t) {
    const TrackResult res = tracker.step(frames[t]);
    REQUIRE(res.targets.size() == 1);
    CHECK(res.targets[0].accepted);
    CHECK(iou(res.targets[0].mask, gt[t]) >= 0.95);
    CHECK(res.targets[0].bbox.col0 == 10 + 8 * t);
  }
}

TEST_CASE("a fully occluded frame is rejected without touching the model") {
  SceneParams p;
  p.kind = "fig1-block";
  p.frames = 6;
  p.seed = 11;
  p.max_shift = 2.0;
  p.max_rot_deg = 3.0;
  p.occlude_frame = 3;
  const Scene scene = generate_scene(p);
  CHECK(scene.frames[3].gt.empty());

  TrackerConfig cfg = test_config();
  cfg.accept_threshold = 0.4;
  Tracker tracker(cfg);
  tracker.init(scene.frames[0].image, scene.init);

  for (int t = 1; t < 6; ++t) {
    const FeatureVector before = tracker.target(0).model;
    const Rect anchor_before = tracker.target(0).last_bbox;
    const TrackResult res = tracker.step(scene.frames[t].image);
    REQUIRE(res.targets.size() == 1);
    if (t == 3) {
      CHECK_FALSE(res.targets[0].accepted);
      CHECK(res.targets[0].mask.empty());
      CHECK(res.targets[0].distance > cfg.accept_threshold);
      CHECK(tracker.target(0).model == before);
      CHECK(tracker.target(0).last_bbox == anchor_before);
      CHECK(tracker.target(0).miss_count == 1);
    } else {
      CHECK(res.targets[0].accepted);
      CHECK(iou(res.targets[0].mask, scene.frames[t].gt) >= 0.9);
      CHECK(tracker.target(0).miss_count == 0);
    }
  }
}

TEST_CASE("matching scans every tree node, not only stability minima") {
  // Frame 1: uniform 28x28 square. Frame 2: the same square split into two
  // faint halves, so the full square is a tree node but no longer a
  // stability minimum. The model must still pick it.
  MultichannelImage frame1 = flat_frame(160, 60, 30);
  const Rect sq{16, 10, 28, 28};
  paint_rect(frame1, sq, 220);

  MultichannelImage frame2 = flat_frame(160, 60, 30);
  paint_rect(frame2, Rect{16, 10, 28, 14}, 219);
  paint_rect(frame2, Rect{16, 24, 28, 14}, 221);

  SegmentationMask square_mask(160, 60);
  for (std::int32_t r = sq.row0; r < sq.row_end(); ++r)
    for (std::int32_t c = sq.col0; c < sq.col_end(); ++c)
      square_mask.set(r, c);

  TrackerConfig cfg = test_config();
  cfg.weights.w_channel_dev = 0.2;
  cfg.accept_threshold = 0.4;

  Tracker tracker(cfg);
  tracker.init(frame1, Rect{2, 0, 56, 56});
  REQUIRE(tracker.target_count() == 1);
  CHECK(tracker.target(0).model.area == 784.0);

  // The detector finds nothing stable in the frame-2 search region.
  const Rect region = search_region(tracker.target(0).last_bbox, frame2.width,
                                    frame2.height, cfg.search_factor);
  const ComponentTree tree =
      build_component_tree(crop(frame2, region), cfg.tree);
  CHECK(extract_mshr(tree, cfg.stability).empty());

  const TrackResult res = tracker.step(frame2);
  REQUIRE(res.targets.size() == 1);
  CHECK(res.targets[0].accepted);
  CHECK(res.targets[0].mask == square_mask);
  CHECK(res.targets[0].distance == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("track_sequence on one frame returns init only") {
  SceneParams p;
  p.kind = "fig1-block";
  p.frames = 1;
  p.seed = 21;
  const Scene scene = generate_scene(p);

  const SequenceResult seq =
      track_sequence({scene.frames[0].image}, scene.init, test_config());
  CHECK(seq.results.empty());
  CHECK(seq.init_mask == scene.frames[0].gt);
  CHECK(seq.init_millis >= 0.0);
}

TEST_CASE("a drifting rotating block is tracked with high overlap") {
  SceneParams p;
  p.kind = "fig1-block";
  p.frames = 10;
  p.seed = 7;
  p.max_shift = 4.0;
  p.max_rot_deg = 5.0;
  const Scene scene = generate_scene(p);

  std::vector<MultichannelImage> frames;
  std::vector<SegmentationMask> gt;
  for (const SceneFrame& f : scene.frames) {
    frames.push_back(f.image);
    gt.push_back(f.gt);
  }

  const SequenceResult seq = track_sequence(frames, scene.init, test_config());
  REQUIRE(seq.results.size() == 9);

  std::vector<SegmentationMask> pred;
  std::vector<SegmentationMask> gt_tail(gt.begin() + 1, gt.end());
  for (const TrackResult& r : seq.results) {
    REQUIRE(r.targets.size() == 1);
    CHECK(r.targets[0].accepted);
    pred.push_back(r.targets[0].mask);
  }
  const OverlapSummary summary = overlap_curve(pred, gt_tail);
  CHECK(summary.mean >= 0.8);
}

TEST_CASE("tracking is deterministic across runs") {
  SceneParams p;
  p.kind = "color-block";
  p.frames = 6;
  p.seed = 13;
  p.max_shift = 4.0;
  const Scene scene = generate_scene(p);

  std::vector<MultichannelImage> frames;
  for (const SceneFrame& f : scene.frames) frames.push_back(f.image);

  const SequenceResult a = track_sequence(frames, scene.init, test_config());
  const SequenceResult b = track_sequence(frames, scene.init, test_config());
  REQUIRE(a.results.size() == b.results.size());
  CHECK(a.init_mask == b.init_mask);
  for (std::size_t i = 0; i < a.results.size(); ++i) {
    REQUIRE(a.results[i].targets.size() == b.results[i].targets.size());
    for (std::size_t t = 0; t < a.results[i].targets.size(); ++t) {
      const TargetResult& x = a.results[i].targets[t];
      const TargetResult& y = b.results[i].targets[t];
      CHECK(x.mask == y.mask);
      CHECK(x.bbox == y.bbox);
      CHECK(x.distance == y.distance);
      CHECK(x.accepted == y.accepted);
    }
  }
}

TEST_CASE("the extremal baseline cannot initialize on the split background") {
  SceneParams p;
  p.kind = "fig1-block";
  p.frames = 1;
  p.seed = 3;
  const Scene scene = generate_scene(p);

  TrackerConfig cfg = test_config();
  cfg.extremal_baseline = true;
  Tracker tracker(cfg);
  try {
    tracker.init(scene.frames[0].image, scene.init);
    FAIL("baseline init should have thrown");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoRegion);
  }

  // The edge-based tracker initializes on the identical input.
  Tracker edge_tracker(test_config());
  edge_tracker.init(scene.frames[0].image, scene.init);
  CHECK(edge_tracker.initialized());
}

TEST_CASE("slices3d reconstructs a sphere from the equator outward") {
  SceneParams p;
  p.kind = "sphere";
  p.frames = 9;
  p.seed = 2;
  const Scene scene = generate_scene(p);
  REQUIRE(scene.init_slice == 4);

  std::vector<MultichannelImage> slices;
  for (const SceneFrame& f : scene.frames) slices.push_back(f.image);

  TrackerConfig cfg = test_config();
  cfg.accept_threshold = 1.5;
  const SlicesResult res =
      track_slices_3d(slices, scene.init_slice, scene.init, cfg);
  REQUIRE(res.masks.size() == 9);
  REQUIRE(res.accepted.size() == 9);
  CHECK(res.accepted[4] == 1);

  int off_profile = 0;
  for (std::size_t k = 0; k < res.masks.size(); ++k) {
    const double analytic = scene.analytic_area[k];
    const double got = static_cast<double>(res.masks[k].area());
    if (std::abs(got - analytic) > 0.10 * analytic) ++off_profile;
  }
  CHECK(off_profile <= 2);
}

TEST_CASE("slices3d from slice zero runs forward only") {
  SceneParams p;
  p.kind = "sphere";
  p.frames = 9;
  p.seed = 2;
  const Scene scene = generate_scene(p);

  std::vector<MultichannelImage> slices;
  for (const SceneFrame& f : scene.frames) slices.push_back(f.image);

  TrackerConfig cfg = test_config();
  cfg.accept_threshold = 1.5;
  const Rect init0 = mask_bbox(scene.frames[0].gt, 6);
  const SlicesResult res = track_slices_3d(slices, 0, init0, cfg);
  REQUIRE(res.masks.size() == 9);
  for (std::size_t k = 0; k < res.masks.size(); ++k) {
    CHECK(res.accepted[k] == 1);
    CHECK_FALSE(res.masks[k].empty());
  }
}

TEST_CASE("slices3d skips a corrupted slice and continues past it") {
  SceneParams p;
  p.kind = "sphere";
  p.frames = 9;
  p.seed = 2;
  const Scene scene = generate_scene(p);

  std::vector<MultichannelImage> slices;
  for (const SceneFrame& f : scene.frames) slices.push_back(f.image);
  slices[6] = flat_frame(slices[6].width, slices[6].height, 60);

  TrackerConfig cfg = test_config();
  cfg.accept_threshold = 1.5;
  const SlicesResult res =
      track_slices_3d(slices, scene.init_slice, scene.init, cfg);
  CHECK(res.accepted[6] == 0);
  CHECK(res.masks[6].empty());
  CHECK(res.accepted[7] == 1);
  CHECK(res.accepted[8] == 1);
  CHECK(iou(res.masks[7], scene.frames[7].gt) >= 0.9);

  const std::int32_t out_of_range = 99;
  CHECK_THROWS_AS(track_slices_3d(slices, out_of_range, scene.init, cfg), Error);
}

TEST_CASE("scene generator is deterministic and its ground truth is exact") {
  SceneParams p;
  p.kind = "fig1-block";
  p.frames = 4;
  p.seed = 17;
  const Scene a = generate_scene(p);
  const Scene b = generate_scene(p);
  REQUIRE(a.frames.size() == 4);
  for (std::size_t i = 0; i < a.frames.size(); ++i) {
    CHECK(a.frames[i].image.samples == b.frames[i].image.samples);
    CHECK(a.frames[i].gt == b.frames[i].gt);
  }
  CHECK(a.init == b.init);

  // Frame 0 block is axis-aligned: exactly 49x49 pixels at the default size.
  CHECK(a.frames[0].gt.area() == 2401);
  CHECK(a.frames[0].image.channels == 1);

  SceneParams pc = p;
  pc.kind = "color-block";
  const Scene c = generate_scene(pc);
  CHECK(c.frames[0].image.channels == 3);
  CHECK(c.frames[0].gt.area() == 2401);

  // Ground truth stays inside the suggested init box on the init frame.
  const Rect bb = mask_bbox(a.frames[0].gt, 0);
  CHECK(a.init.row0 <= bb.row0);
  CHECK(a.init.col0 <= bb.col0);
  CHECK(a.init.row_end() >= bb.row_end());
  CHECK(a.init.col_end() >= bb.col_end());

  CHECK_THROWS_AS(generate_scene(SceneParams{"no-such-kind"}), Error);
}

TEST_CASE("sphere scene slices follow the analytic profile") {
  SceneParams p;
  p.kind = "sphere";
  p.frames = 9;
  p.seed = 4;
  const Scene scene = generate_scene(p);
  REQUIRE(scene.analytic_area.size() == 9);
  CHECK(scene.init_slice == 4);

  // Rasterized circle areas track pi*r^2 closely away from the poles.
  for (std::size_t k = 1; k + 1 < scene.frames.size(); ++k) {
    const double analytic = scene.analytic_area[k];
    const double got = static_cast<double>(scene.frames[k].gt.area());
    CHECK(std::abs(got - analytic) <= 0.05 * analytic);
  }
  // Equator is the largest slice.
  for (std::size_t k = 0; k < scene.frames.size(); ++k)
    CHECK(scene.frames[4].gt.area() >= scene.frames[k].gt.area());
}
