#include "image.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "error.hpp"
#include "json.hpp"

namespace mshr {

namespace fs = std::filesystem;
using nlohmann::json;

MultichannelImage::MultichannelImage(std::int32_t w, std::int32_t h,
                                     std::int32_t c, std::int32_t maxval)
    : width(w), height(h), channels(c), max_value(maxval),
      samples(static_cast<std::size_t>(w) * h * c, 0) {
  if (w < 1 || h < 1 || c < 1)
    fail(ErrorCode::InvalidArgument, "image dimensions must be >= 1");
  if (maxval < 1)
    fail(ErrorCode::InvalidArgument, "image max_value must be >= 1");
}

std::int64_t SegmentationMask::area() const {
  return std::accumulate(bits.begin(), bits.end(), std::int64_t{0});
}

// ---------------------------------------------------------------------------
// PNM
// ---------------------------------------------------------------------------

namespace {

// Reads the next header token, skipping whitespace and '#' comments.
std::string pnm_token(std::istream& in) {
  std::string tok;
  int ch;
  while ((ch = in.get()) != EOF) {
    if (ch == '#') {
      while ((ch = in.get()) != EOF && ch != '\n') {
      }
      continue;
    }
    if (!std::isspace(ch)) {
      tok.push_back(static_cast<char>(ch));
      while ((ch = in.peek()) != EOF && !std::isspace(ch)) {
        tok.push_back(static_cast<char>(in.get()));
      }
      return tok;
    }
  }
  return tok;
}

std::int64_t pnm_number(std::istream& in, const std::string& path) {
  const std::string tok = pnm_token(in);
  if (tok.empty() || tok.find_first_not_of("0123456789") != std::string::npos)
    fail(ErrorCode::Parse, path + ": malformed PNM header");
  return std::stoll(tok);
}

struct PnmHeader {
  bool color = false;  // P6
  std::int32_t width = 0, height = 0, maxval = 0;
};

PnmHeader read_pnm_header(std::istream& in, const std::string& path) {
  PnmHeader h;
  const std::string magic = pnm_token(in);
  if (magic == "P5")
    h.color = false;
  else if (magic == "P6")
    h.color = true;
  else
    fail(ErrorCode::Parse, path + ": not a binary PGM/PPM (magic '" + magic + "')");
  h.width = static_cast<std::int32_t>(pnm_number(in, path));
  h.height = static_cast<std::int32_t>(pnm_number(in, path));
  h.maxval = static_cast<std::int32_t>(pnm_number(in, path));
  if (h.width < 1 || h.height < 1 || h.maxval < 1 || h.maxval > 65535)
    fail(ErrorCode::Parse, path + ": invalid PNM dimensions or maxval");
  in.get();  // single whitespace byte before raster
  return h;
}

void read_pnm_raster(std::istream& in, const std::string& path,
                     const PnmHeader& h, MultichannelImage& out) {
  const std::int64_t values =
      static_cast<std::int64_t>(h.width) * h.height * (h.color ? 3 : 1);
  const int bytes_per = h.maxval > 255 ? 2 : 1;
  std::vector<unsigned char> raw(static_cast<std::size_t>(values) * bytes_per);
  in.read(reinterpret_cast<char*>(raw.data()),
          static_cast<std::streamsize>(raw.size()));
  if (in.gcount() != static_cast<std::streamsize>(raw.size()))
    fail(ErrorCode::Parse, path + ": truncated PNM raster");
  for (std::int64_t i = 0; i < values; ++i) {
    std::int32_t v;
    if (bytes_per == 2)
      v = (raw[2 * i] << 8) | raw[2 * i + 1];  // big-endian per PNM spec
    else
      v = raw[i];
    out.samples[static_cast<std::size_t>(i)] = v;
  }
}

MultichannelImage load_pnm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open " + path);
  const PnmHeader h = read_pnm_header(in, path);
  MultichannelImage img(h.width, h.height, h.color ? 3 : 1, h.maxval);
  read_pnm_raster(in, path, h, img);
  return img;
}

void save_pnm(const MultichannelImage& image, const std::string& path) {
  if (image.channels != 1 && image.channels != 3)
    fail(ErrorCode::InvalidArgument,
         "PNM supports 1 or 3 channels, got " + std::to_string(image.channels));
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot write " + path);
  out << (image.channels == 3 ? "P6\n" : "P5\n")
      << image.width << ' ' << image.height << '\n'
      << image.max_value << '\n';
  const int bytes_per = image.max_value > 255 ? 2 : 1;
  std::vector<unsigned char> raw;
  raw.reserve(image.samples.size() * bytes_per);
  for (std::int32_t v : image.samples) {
    const auto u = static_cast<std::uint32_t>(std::clamp(v, 0, image.max_value));
    if (bytes_per == 2) raw.push_back(static_cast<unsigned char>(u >> 8));
    raw.push_back(static_cast<unsigned char>(u & 0xff));
  }
  out.write(reinterpret_cast<const char*>(raw.data()),
            static_cast<std::streamsize>(raw.size()));
  if (!out) fail(ErrorCode::Io, "write failed for " + path);
}

MultichannelImage load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorCode::Parse, path + ": " + e.what());
  }
  if (!doc.is_object() || !doc.contains("channels") || !doc["channels"].is_array() ||
      doc["channels"].empty())
    fail(ErrorCode::Parse, path + ": manifest must contain a non-empty \"channels\" array");
  const fs::path base = fs::path(path).parent_path();
  std::vector<MultichannelImage> planes;
  for (const auto& entry : doc["channels"]) {
    if (!entry.is_string())
      fail(ErrorCode::Parse, path + ": channel entries must be file names");
    const fs::path p = base / entry.get<std::string>();
    MultichannelImage plane = load_pnm(p.string());
    if (plane.channels != 1)
      fail(ErrorCode::Parse, p.string() + ": manifest planes must be single-channel PGM");
    if (!planes.empty() && (plane.width != planes.front().width ||
                            plane.height != planes.front().height))
      fail(ErrorCode::DimensionMismatch, path + ": channel dimensions differ");
    planes.push_back(std::move(plane));
  }
  const std::int32_t maxval =
      std::max_element(planes.begin(), planes.end(),
                       [](const auto& a, const auto& b) {
                         return a.max_value < b.max_value;
                       })->max_value;
  MultichannelImage img(planes.front().width, planes.front().height,
                        static_cast<std::int32_t>(planes.size()), maxval);
  for (std::int64_t p = 0; p < img.pixel_count(); ++p)
    for (std::size_t ch = 0; ch < planes.size(); ++ch)
      img.samples[static_cast<std::size_t>(p) * img.channels + ch] =
          planes[ch].samples[static_cast<std::size_t>(p)];
  return img;
}

}  // namespace

MultichannelImage load_image(const std::string& path) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) fail(ErrorCode::Io, "cannot open " + path);
  char magic[2] = {0, 0};
  probe.read(magic, 2);
  probe.close();
  if (magic[0] == 'P' && (magic[1] == '5' || magic[1] == '6'))
    return load_pnm(path);
  return load_manifest(path);
}

void save_image(const MultichannelImage& image, const std::string& path) {
  if (image.channels == 1 || image.channels == 3) {
    save_pnm(image, path);
    return;
  }
  // N-channel: planar PGMs next to a JSON manifest.
  const fs::path p(path);
  const fs::path base = p.parent_path();
  const std::string stem = p.stem().string();
  json doc;
  doc["channels"] = json::array();
  for (std::int32_t ch = 0; ch < image.channels; ++ch) {
    MultichannelImage plane(image.width, image.height, 1, image.max_value);
    for (std::int64_t px = 0; px < image.pixel_count(); ++px)
      plane.samples[static_cast<std::size_t>(px)] =
          image.samples[static_cast<std::size_t>(px) * image.channels + ch];
    char name[64];
    std::snprintf(name, sizeof(name), "%s_ch%02d.pgm", stem.c_str(), ch);
    save_pnm(plane, (base / name).string());
    doc["channels"].push_back(name);
  }
  std::ofstream out(path);
  if (!out) fail(ErrorCode::Io, "cannot write " + path);
  out << doc.dump(2) << '\n';
}

SegmentationMask load_mask(const std::string& path, bool* nonbinary_warning) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open " + path);
  const PnmHeader h = read_pnm_header(in, path);
  if (h.color) fail(ErrorCode::Parse, path + ": masks must be single-channel PGM");
  MultichannelImage img(h.width, h.height, 1, h.maxval);
  read_pnm_raster(in, path, h, img);
  SegmentationMask mask(h.width, h.height);
  bool warn = false;
  for (std::size_t i = 0; i < img.samples.size(); ++i) {
    const std::int32_t v = img.samples[i];
    if (v != 0 && v != h.maxval) warn = true;
    mask.bits[i] = v > 0 ? 1 : 0;  // tolerant of third-party ground truth
  }
  if (nonbinary_warning) *nonbinary_warning = warn;
  return mask;
}

void save_mask(const SegmentationMask& mask, const std::string& path) {
  MultichannelImage img(mask.width, mask.height, 1, 255);
  for (std::size_t i = 0; i < mask.bits.size(); ++i)
    img.samples[i] = mask.bits[i] ? 255 : 0;
  save_pnm(img, path);
}

Rect clamp_rect(const Rect& r, std::int32_t width, std::int32_t height) {
  const std::int32_t r0 = std::max(r.row0, 0);
  const std::int32_t c0 = std::max(r.col0, 0);
  const std::int32_t r1 = std::min(r.row_end(), height);
  const std::int32_t c1 = std::min(r.col_end(), width);
  return Rect{r0, c0, std::max(r1 - r0, 0), std::max(c1 - c0, 0)};
}

MultichannelImage crop(const MultichannelImage& image, const Rect& r) {
  const Rect c = clamp_rect(r, image.width, image.height);
  if (c.height == 0 || c.width == 0)
    fail(ErrorCode::EmptyRegion, "crop region lies outside the image");
  MultichannelImage out(c.width, c.height, image.channels, image.max_value);
  out.origin_row = image.origin_row + c.row0;
  out.origin_col = image.origin_col + c.col0;
  const std::size_t row_samples = static_cast<std::size_t>(c.width) * image.channels;
  for (std::int32_t row = 0; row < c.height; ++row) {
    const std::int32_t* src = image.pixel(
        static_cast<std::int64_t>(c.row0 + row) * image.width + c.col0);
    std::copy_n(src, row_samples,
                out.samples.begin() + static_cast<std::size_t>(row) * row_samples);
  }
  return out;
}

}  // namespace mshr
