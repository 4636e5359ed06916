#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace mshr {

/// Axis-aligned pixel rectangle, top-left inclusive.
struct Rect {
  std::int32_t row0 = 0;
  std::int32_t col0 = 0;
  std::int32_t height = 0;
  std::int32_t width = 0;

  std::int32_t row_end() const { return row0 + height; }
  std::int32_t col_end() const { return col0 + width; }
  std::int64_t area() const {
    return static_cast<std::int64_t>(height) * width;
  }
  bool operator==(const Rect&) const = default;
};

/// Row-major interleaved pixel grid with C channels. Samples are widened to
/// 32-bit so moment and gray-value accumulation cannot overflow 8/16-bit
/// sources. `origin_*` records where a crop came from in its source frame.
struct MultichannelImage {
  std::int32_t width = 0;
  std::int32_t height = 0;
  std::int32_t channels = 0;
  std::int32_t max_value = 255;
  std::int32_t origin_row = 0;
  std::int32_t origin_col = 0;
  std::vector<std::int32_t> samples;  // height * width * channels

  MultichannelImage() = default;
  MultichannelImage(std::int32_t w, std::int32_t h, std::int32_t c,
                    std::int32_t maxval = 255);

  std::int64_t pixel_count() const {
    return static_cast<std::int64_t>(width) * height;
  }

  std::int32_t& at(std::int32_t r, std::int32_t c, std::int32_t ch) {
    return samples[(static_cast<std::size_t>(r) * width + c) * channels + ch];
  }
  std::int32_t at(std::int32_t r, std::int32_t c, std::int32_t ch) const {
    return samples[(static_cast<std::size_t>(r) * width + c) * channels + ch];
  }
  const std::int32_t* pixel(std::int64_t index) const {
    return samples.data() + static_cast<std::size_t>(index) * channels;
  }

  Rect full_rect() const { return Rect{0, 0, height, width}; }
};

/// One bit per pixel, stored as bytes (0 = background, 1 = foreground).
struct SegmentationMask {
  std::int32_t width = 0;
  std::int32_t height = 0;
  std::vector<std::uint8_t> bits;

  SegmentationMask() = default;
  SegmentationMask(std::int32_t w, std::int32_t h)
      : width(w), height(h),
        bits(static_cast<std::size_t>(w) * h, 0) {}

  bool get(std::int32_t r, std::int32_t c) const {
    return bits[static_cast<std::size_t>(r) * width + c] != 0;
  }
  void set(std::int32_t r, std::int32_t c, bool v = true) {
    bits[static_cast<std::size_t>(r) * width + c] = v ? 1 : 0;
  }
  std::int64_t area() const;
  bool empty() const { return area() == 0; }
  bool operator==(const SegmentationMask&) const = default;
};

// ---------------------------------------------------------------------------
// Portable I/O: binary PGM (P5), binary PPM (P6), and a JSON manifest
// {"channels": ["c0.pgm", ...]} of equally sized planes for N-channel data.
// ---------------------------------------------------------------------------

MultichannelImage load_image(const std::string& path);
void save_image(const MultichannelImage& image, const std::string& path);

SegmentationMask load_mask(const std::string& path, bool* nonbinary_warning = nullptr);
void save_mask(const SegmentationMask& mask, const std::string& path);

/// Clamps `r` to the image bounds and returns the sub-image; the result's
/// origin records the clamped top-left so masks can be mapped back to
/// full-frame coordinates. Throws when the intersection is empty.
MultichannelImage crop(const MultichannelImage& image, const Rect& r);

/// Intersection of `r` with a W x H frame (may be empty: height/width 0).
Rect clamp_rect(const Rect& r, std::int32_t width, std::int32_t height);

}  // namespace mshr
