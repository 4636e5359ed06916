#include "scene.hpp"

#include <algorithm>
#include <cmath>

#include "error.hpp"
#include "rng.hpp"

namespace mshr {

namespace {

constexpr double kPi = 3.14159265358979323846;

double reflect_into(double v, double lo, double hi) {
  if (v < lo) v = lo + (lo - v);
  if (v > hi) v = hi - (v - hi);
  return std::clamp(v, lo, hi);
}

Rect dilated_bbox(const SegmentationMask& gt, std::int32_t margin) {
  std::int32_t r0 = gt.height, c0 = gt.width, r1 = -1, c1 = -1;
  for (std::int32_t r = 0; r < gt.height; ++r)
    for (std::int32_t c = 0; c < gt.width; ++c)
      if (gt.get(r, c)) {
        r0 = std::min(r0, r);
        c0 = std::min(c0, c);
        r1 = std::max(r1, r);
        c1 = std::max(c1, c);
      }
  if (r1 < 0) fail(ErrorCode::Internal, "scene: empty ground truth on init frame");
  const Rect grown{r0 - margin, c0 - margin, r1 - r0 + 1 + 2 * margin,
                   c1 - c0 + 1 + 2 * margin};
  return clamp_rect(grown, gt.width, gt.height);
}

// Split background: dark gradient on the left, light gradient on the right.
// The per-channel offsets keep the three planes distinct without moving any
// value near the block's colors.
void fill_split_background(MultichannelImage& img) {
  const std::int32_t half = img.width / 2;
  static constexpr std::int32_t kDark[3] = {40, 50, 45};
  static constexpr std::int32_t kLight[3] = {195, 205, 190};
  for (std::int32_t r = 0; r < img.height; ++r) {
    for (std::int32_t c = 0; c < img.width; ++c) {
      const bool left = c < half;
      const std::int32_t ramp = left ? c * 20 / std::max(half, 1)
                                     : (c - half) * 20 / std::max(img.width - half, 1);
      for (std::int32_t ch = 0; ch < img.channels; ++ch)
        img.at(r, c, ch) = (left ? kDark[ch] : kLight[ch]) + ramp;
    }
  }
}

void draw_rotated_square(MultichannelImage& img, SegmentationMask& gt,
                         double cr, double cc, double half_side, double angle,
                         const std::int32_t* color) {
  const double cosA = std::cos(angle), sinA = std::sin(angle);
  const double reach = half_side * (std::abs(cosA) + std::abs(sinA)) + 1.0;
  const auto r_lo = static_cast<std::int32_t>(std::floor(cr - reach));
  const auto r_hi = static_cast<std::int32_t>(std::ceil(cr + reach));
  const auto c_lo = static_cast<std::int32_t>(std::floor(cc - reach));
  const auto c_hi = static_cast<std::int32_t>(std::ceil(cc + reach));
  for (std::int32_t r = std::max(r_lo, 0); r <= std::min(r_hi, img.height - 1); ++r) {
    for (std::int32_t c = std::max(c_lo, 0); c <= std::min(c_hi, img.width - 1); ++c) {
      const double dy = r - cr, dx = c - cc;
      const double u = dx * cosA + dy * sinA;
      const double v = -dx * sinA + dy * cosA;
      if (std::abs(u) <= half_side && std::abs(v) <= half_side) {
        for (std::int32_t ch = 0; ch < img.channels; ++ch)
          img.at(r, c, ch) = color[ch];
        gt.set(r, c);
      }
    }
  }
}

Scene generate_block_scene(const SceneParams& p, std::int32_t channels) {
  const std::int32_t w = p.width > 0 ? p.width : 320;
  const std::int32_t h = p.height > 0 ? p.height : 240;
  if (w < 48 || h < 48)
    fail(ErrorCode::InvalidArgument, "scene: block scenes need at least 48x48");
  static constexpr std::int32_t kBlock[3] = {130, 128, 132};

  const double side = std::max(24, std::min(w, h) / 5);
  const double half_side = side / 2.0;
  const double margin = half_side * std::sqrt(2.0) + 4.0;

  Rng rng(p.seed);
  double cr = h / 2.0, cc = w / 2.0, angle = 0.0;

  Scene scene;
  for (std::int32_t f = 0; f < p.frames; ++f) {
    if (f > 0) {
      cr = reflect_into(cr + rng.uniform(-p.max_shift, p.max_shift), margin, h - margin);
      cc = reflect_into(cc + rng.uniform(-p.max_shift, p.max_shift), margin, w - margin);
      angle += rng.uniform(-p.max_rot_deg, p.max_rot_deg) * kPi / 180.0;
    }
    SceneFrame frame{MultichannelImage(w, h, channels), SegmentationMask(w, h)};
    fill_split_background(frame.image);
    if (f != p.occlude_frame)
      draw_rotated_square(frame.image, frame.gt, cr, cc, half_side, angle, kBlock);
    scene.frames.push_back(std::move(frame));
  }
  // Wide enough that the block stays under half the init-crop area.
  scene.init = dilated_bbox(scene.frames.front().gt,
                            static_cast<std::int32_t>(half_side));
  return scene;
}

Scene generate_sphere_scene(const SceneParams& p) {
  const std::int32_t w = p.width > 0 ? p.width : 96;
  const std::int32_t h = p.height > 0 ? p.height : 96;
  const std::int32_t n = p.frames;
  if (w < 64 || h < 64)
    fail(ErrorCode::InvalidArgument, "scene: sphere slices need at least 64x64");
  if (n < 3) fail(ErrorCode::InvalidArgument, "scene: sphere needs >= 3 slices");

  const double radius = 20.0;
  const double spacing = 38.0 / n;  // poles just outside the outermost slices
  const std::int32_t mid = (n - 1) / 2;

  Rng rng(p.seed);
  double cr = h / 2.0, cc = w / 2.0;

  Scene scene;
  scene.init_slice = mid;
  for (std::int32_t k = 0; k < n; ++k) {
    if (k > 0) {
      cr = reflect_into(cr + rng.uniform(-1.5, 1.5), radius + 4.0, h - radius - 4.0);
      cc = reflect_into(cc + rng.uniform(-1.5, 1.5), radius + 4.0, w - radius - 4.0);
    }
    const double z = (k - mid) * spacing;
    const double rsq = radius * radius - z * z;
    scene.analytic_area.push_back(rsq > 0.0 ? kPi * rsq : 0.0);

    SceneFrame frame{MultichannelImage(w, h, 1), SegmentationMask(w, h)};
    for (std::int32_t r = 0; r < h; ++r)
      for (std::int32_t c = 0; c < w; ++c)
        frame.image.at(r, c, 0) = 60 + c * 20 / w;
    if (rsq > 0.0 && k != p.occlude_frame) {
      for (std::int32_t r = 0; r < h; ++r)
        for (std::int32_t c = 0; c < w; ++c) {
          const double dr = r - cr, dc = c - cc;
          if (dr * dr + dc * dc <= rsq) {
            frame.image.at(r, c, 0) = 200;
            frame.gt.set(r, c);
          }
        }
    }
    scene.frames.push_back(std::move(frame));
  }
  scene.init = dilated_bbox(scene.frames[mid].gt,
                            static_cast<std::int32_t>(radius / 2.0));
  return scene;
}

}  // namespace

Scene generate_scene(const SceneParams& p) {
  if (p.frames < 1) fail(ErrorCode::InvalidArgument, "scene: frames must be >= 1");
  if (p.occlude_frame >= p.frames)
    fail(ErrorCode::InvalidArgument, "scene: occlude_frame out of range");
  if (p.max_shift < 0.0 || p.max_rot_deg < 0.0)
    fail(ErrorCode::InvalidArgument, "scene: motion bounds must be >= 0");

  if (p.kind == "fig1-block") return generate_block_scene(p, 1);
  if (p.kind == "color-block") return generate_block_scene(p, 3);
  if (p.kind == "sphere") return generate_sphere_scene(p);
  fail(ErrorCode::InvalidArgument, "scene: unknown kind '" + p.kind + "'");
}

}  // namespace mshr
