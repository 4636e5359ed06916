// Command-line front end. Talks to the library exclusively through the C
// API in mshr/mshr.h.
#include <algorithm>
#include <chrono>
#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "mshr/mshr.h"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

void check(mshr_status status) {
  if (status != MSHR_OK) throw std::runtime_error(mshr_last_error());
}

struct ImageDelete {
  void operator()(mshr_image* p) const { mshr_image_free(p); }
};
struct MaskDelete {
  void operator()(mshr_mask* p) const { mshr_mask_free(p); }
};
struct ConfigDelete {
  void operator()(mshr_config* p) const { mshr_config_free(p); }
};
struct TreeDelete {
  void operator()(mshr_tree* p) const { mshr_tree_free(p); }
};
struct DetectionsDelete {
  void operator()(mshr_detections* p) const { mshr_detections_free(p); }
};
struct TrackerDelete {
  void operator()(mshr_tracker* p) const { mshr_tracker_free(p); }
};
struct ResultDelete {
  void operator()(mshr_track_result* p) const { mshr_track_result_free(p); }
};
struct SceneDelete {
  void operator()(mshr_scene* p) const { mshr_scene_free(p); }
};

using ImagePtr = std::unique_ptr<mshr_image, ImageDelete>;
using MaskPtr = std::unique_ptr<mshr_mask, MaskDelete>;
using ConfigPtr = std::unique_ptr<mshr_config, ConfigDelete>;
using TreePtr = std::unique_ptr<mshr_tree, TreeDelete>;
using DetectionsPtr = std::unique_ptr<mshr_detections, DetectionsDelete>;
using TrackerPtr = std::unique_ptr<mshr_tracker, TrackerDelete>;
using ResultPtr = std::unique_ptr<mshr_track_result, ResultDelete>;
using ScenePtr = std::unique_ptr<mshr_scene, SceneDelete>;

ImagePtr load_image(const std::string& path) {
  mshr_image* raw = nullptr;
  check(mshr_image_load(path.c_str(), &raw));
  return ImagePtr(raw);
}

MaskPtr load_mask(const std::string& path) {
  mshr_mask* raw = nullptr;
  int warn = 0;
  check(mshr_mask_load(path.c_str(), &raw, &warn));
  if (warn != 0)
    std::fprintf(stderr, "warning: %s contains non-binary values\n",
                 path.c_str());
  return MaskPtr(raw);
}

double now_ms() {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

struct CommonOptions {
  std::string config_path;
  std::vector<std::string> overrides;
  bool extremal_baseline = false;
};

void add_common(CLI::App* cmd, CommonOptions* opts) {
  cmd->add_option("--config", opts->config_path, "JSON configuration file");
  cmd->add_option("--set", opts->overrides,
                  "Override a config entry, e.g. --set stability.delta=3");
  cmd->add_flag("--extremal-baseline", opts->extremal_baseline,
                "Use per-channel extremal level sets instead of the "
                "edge-based hierarchy");
}

ConfigPtr make_config(const CommonOptions& opts) {
  mshr_config* raw = nullptr;
  if (opts.config_path.empty())
    check(mshr_config_default(&raw));
  else
    check(mshr_config_load(opts.config_path.c_str(), &raw));
  ConfigPtr config(raw);
  for (const std::string& assignment : opts.overrides)
    check(mshr_config_set(config.get(), assignment.c_str()));
  if (opts.extremal_baseline)
    check(mshr_config_set(config.get(), "extremal_baseline=true"));
  return config;
}

mshr_rect parse_rect(const std::string& text) {
  mshr_rect r{};
  char tail = 0;
  if (std::sscanf(text.c_str(), "%" SCNd32 ",%" SCNd32 ",%" SCNd32
                  ",%" SCNd32 "%c",
                  &r.row0, &r.col0, &r.height, &r.width, &tail) != 4)
    throw std::runtime_error("expected r0,c0,h,w but got: " + text);
  return r;
}

json load_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
  return j;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

/// Frame paths from a scene manifest, resolved relative to the manifest.
struct Manifest {
  std::vector<std::string> frames;
  bool has_init = false;
  mshr_rect init{};
  int32_t init_slice = -1;
};

Manifest read_manifest(const std::string& path) {
  const json j = load_json_file(path);
  if (!j.is_object() || !j.contains("frames") || !j["frames"].is_array())
    throw std::runtime_error(path + ": manifest needs a \"frames\" array");

  const fs::path base = fs::path(path).parent_path();
  Manifest m;
  for (const json& name : j["frames"]) {
    if (!name.is_string())
      throw std::runtime_error(path + ": frame entries must be strings");
    m.frames.push_back((base / name.get<std::string>()).string());
  }
  if (m.frames.empty())
    throw std::runtime_error(path + ": manifest lists no frames");

  if (j.contains("init")) {
    const json& r = j["init"];
    if (!r.is_array() || r.size() != 4)
      throw std::runtime_error(path + ": \"init\" must be [r0,c0,h,w]");
    m.init = mshr_rect{r[0].get<int32_t>(), r[1].get<int32_t>(),
                       r[2].get<int32_t>(), r[3].get<int32_t>()};
    m.has_init = true;
  }
  if (j.contains("init_slice")) m.init_slice = j["init_slice"].get<int32_t>();
  return m;
}

std::string frame_name(const char* prefix, int index, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s%05d%s", prefix, index, ext);
  return buf;
}

json rect_json(const mshr_rect& r) {
  return json::array({r.row0, r.col0, r.height, r.width});
}

std::vector<std::string> list_masks(const std::string& dir) {
  if (!fs::is_directory(dir))
    throw std::runtime_error(dir + " is not a directory");
  std::vector<std::string> paths;
  for (const fs::directory_entry& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".pgm")
      paths.push_back(entry.path().string());
  std::sort(paths.begin(), paths.end());
  if (paths.empty()) throw std::runtime_error("no .pgm files in " + dir);
  return paths;
}

/// Union of the accepted target masks of one step result; empty mask when
/// nothing was accepted.
MaskPtr union_accepted(const mshr_track_result* result, int32_t width,
                       int32_t height, bool* any_accepted) {
  mshr_mask* raw = nullptr;
  check(mshr_mask_create(width, height, &raw));
  MaskPtr merged(raw);
  uint8_t* bits = mshr_mask_data_mut(merged.get());
  const size_t n = static_cast<size_t>(width) * height;

  *any_accepted = false;
  for (int32_t i = 0; i < mshr_track_result_targets(result); ++i) {
    if (mshr_track_result_accepted(result, i) == 0) continue;
    *any_accepted = true;
    mshr_mask* target_raw = nullptr;
    check(mshr_track_result_mask(result, i, &target_raw));
    MaskPtr target(target_raw);
    const uint8_t* src = mshr_mask_data(target.get());
    for (size_t b = 0; b < n; ++b) bits[b] |= src[b];
  }
  return merged;
}

MaskPtr union_init_targets(const mshr_tracker* tracker, int32_t width,
                           int32_t height) {
  mshr_mask* raw = nullptr;
  check(mshr_mask_create(width, height, &raw));
  MaskPtr merged(raw);
  uint8_t* bits = mshr_mask_data_mut(merged.get());
  const size_t n = static_cast<size_t>(width) * height;
  for (int32_t i = 0; i < mshr_tracker_target_count(tracker); ++i) {
    mshr_mask* target_raw = nullptr;
    check(mshr_tracker_target_mask(tracker, i, &target_raw));
    MaskPtr target(target_raw);
    const uint8_t* src = mshr_mask_data(target.get());
    for (size_t b = 0; b < n; ++b) bits[b] |= src[b];
  }
  return merged;
}

// ---- gen-scene ----------------------------------------------------------

struct GenSceneOptions {
  std::string kind = "fig1-block";
  int32_t frames = 50;
  int32_t width = 0;
  int32_t height = 0;
  uint64_t seed = 1;
  double max_shift = 8.0;
  double max_rot = 5.0;
  int32_t occlude_frame = -1;
  std::string out_dir;
};

int run_gen_scene(const GenSceneOptions& opts) {
  mshr_scene* raw = nullptr;
  check(mshr_scene_generate(opts.kind.c_str(), opts.frames, opts.width,
                            opts.height, opts.seed, opts.max_shift,
                            opts.max_rot, opts.occlude_frame, &raw));
  ScenePtr scene(raw);

  const fs::path dir = opts.out_dir;
  fs::create_directories(dir / "gt");
  const int32_t n = mshr_scene_frame_count(scene.get());
  const char* ext =
      mshr_image_channels(mshr_scene_frame(scene.get(), 0)) == 3 ? ".ppm"
                                                                 : ".pgm";

  json manifest;
  manifest["kind"] = opts.kind;
  manifest["width"] = mshr_image_width(mshr_scene_frame(scene.get(), 0));
  manifest["height"] = mshr_image_height(mshr_scene_frame(scene.get(), 0));
  manifest["frames"] = json::array();
  manifest["gt"] = json::array();

  for (int32_t i = 0; i < n; ++i) {
    const std::string frame = frame_name("frame_", i, ext);
    const std::string gt = "gt/" + frame_name("gt_", i, ".pgm");
    check(mshr_image_save(mshr_scene_frame(scene.get(), i),
                          (dir / frame).string().c_str()));
    check(mshr_mask_save(mshr_scene_gt(scene.get(), i),
                         (dir / gt).string().c_str()));
    manifest["frames"].push_back(frame);
    manifest["gt"].push_back(gt);
  }

  mshr_rect init{};
  check(mshr_scene_init_rect(scene.get(), &init));
  manifest["init"] = rect_json(init);
  if (opts.kind == "sphere")
    manifest["init_slice"] = mshr_scene_init_slice(scene.get());

  write_text_file((dir / "scene.json").string(), manifest.dump(2) + "\n");
  std::printf("wrote %d frames to %s\n", n, opts.out_dir.c_str());
  return 0;
}

// ---- track --------------------------------------------------------------

struct TrackOptions {
  std::string seq;
  std::string init_text;
  std::string out_dir;
  CommonOptions common;
};

int run_track(const TrackOptions& opts) {
  const Manifest manifest = read_manifest(opts.seq);
  mshr_rect init{};
  if (!opts.init_text.empty())
    init = parse_rect(opts.init_text);
  else if (manifest.has_init)
    init = manifest.init;
  else
    throw std::runtime_error("no --init given and manifest has no \"init\"");

  const ConfigPtr config = make_config(opts.common);
  mshr_tracker* tracker_raw = nullptr;
  check(mshr_tracker_new(config.get(), &tracker_raw));
  TrackerPtr tracker(tracker_raw);

  fs::create_directories(opts.out_dir);
  const fs::path dir = opts.out_dir;

  const ImagePtr first = load_image(manifest.frames[0]);
  const int32_t width = mshr_image_width(first.get());
  const int32_t height = mshr_image_height(first.get());

  const double t0 = now_ms();
  check(mshr_tracker_init(tracker.get(), first.get(), &init));
  const double init_millis = now_ms() - t0;

  const MaskPtr init_mask = union_init_targets(tracker.get(), width, height);
  check(mshr_mask_save(init_mask.get(),
                       (dir / frame_name("mask_", 0, ".pgm")).string().c_str()));

  mshr_rect init_bbox{};
  check(mshr_tracker_target_bbox(tracker.get(), 0, &init_bbox));

  json report;
  report["init"] = {{"millis", init_millis},
                    {"bbox", rect_json(init_bbox)},
                    {"targets", mshr_tracker_target_count(tracker.get())}};
  report["frames"] = json::array();

  for (size_t f = 1; f < manifest.frames.size(); ++f) {
    const ImagePtr frame = load_image(manifest.frames[f]);
    mshr_track_result* result_raw = nullptr;
    check(mshr_tracker_step(tracker.get(), frame.get(), &result_raw));
    ResultPtr result(result_raw);

    bool any = false;
    const MaskPtr mask = union_accepted(result.get(), width, height, &any);
    check(mshr_mask_save(
        mask.get(),
        (dir / frame_name("mask_", static_cast<int>(f), ".pgm")).string().c_str()));

    json targets = json::array();
    for (int32_t i = 0; i < mshr_track_result_targets(result.get()); ++i) {
      mshr_rect bbox{};
      check(mshr_track_result_bbox(result.get(), i, &bbox));
      targets.push_back(
          {{"accepted", mshr_track_result_accepted(result.get(), i) != 0},
           {"distance", mshr_track_result_distance(result.get(), i)},
           {"bbox", rect_json(bbox)}});
    }
    report["frames"].push_back(
        {{"index", f},
         {"millis", mshr_track_result_millis(result.get())},
         {"targets", std::move(targets)}});
  }

  write_text_file((dir / "report.json").string(), report.dump(2) + "\n");
  std::printf("tracked %zu frames, report in %s\n", manifest.frames.size(),
              (dir / "report.json").string().c_str());
  return 0;
}

// ---- slices3d -----------------------------------------------------------

struct Slices3dOptions {
  std::string slices;
  std::string init_text;
  int32_t init_slice = -1;
  std::string out_dir;
  CommonOptions common;
};

int run_slices3d(const Slices3dOptions& opts) {
  const Manifest manifest = read_manifest(opts.slices);
  mshr_rect init{};
  if (!opts.init_text.empty())
    init = parse_rect(opts.init_text);
  else if (manifest.has_init)
    init = manifest.init;
  else
    throw std::runtime_error("no --init given and manifest has no \"init\"");

  int32_t init_slice = opts.init_slice >= 0 ? opts.init_slice
                                            : manifest.init_slice;
  if (init_slice < 0)
    throw std::runtime_error(
        "no --init-slice given and manifest has no \"init_slice\"");
  const int32_t n = static_cast<int32_t>(manifest.frames.size());
  if (init_slice >= n)
    throw std::runtime_error("init slice out of range");

  std::vector<ImagePtr> slices;
  slices.reserve(manifest.frames.size());
  for (const std::string& path : manifest.frames)
    slices.push_back(load_image(path));
  const int32_t width = mshr_image_width(slices[0].get());
  const int32_t height = mshr_image_height(slices[0].get());

  const ConfigPtr config = make_config(opts.common);
  mshr_tracker* seed_raw = nullptr;
  check(mshr_tracker_new(config.get(), &seed_raw));
  TrackerPtr seed(seed_raw);

  struct SliceRecord {
    int64_t area = 0;
    bool accepted = false;
    double millis = 0.0;
  };
  std::vector<SliceRecord> records(n);
  std::vector<MaskPtr> masks(n);

  const double t0 = now_ms();
  check(mshr_tracker_init(seed.get(), slices[init_slice].get(), &init));
  records[init_slice].millis = now_ms() - t0;
  records[init_slice].accepted = true;
  masks[init_slice] = union_init_targets(seed.get(), width, height);

  auto sweep = [&](int32_t from, int32_t to, int32_t step) {
    mshr_tracker* walker_raw = nullptr;
    check(mshr_tracker_clone(seed.get(), &walker_raw));
    TrackerPtr walker(walker_raw);
    for (int32_t k = from; k != to; k += step) {
      mshr_track_result* result_raw = nullptr;
      check(mshr_tracker_step(walker.get(), slices[k].get(), &result_raw));
      ResultPtr result(result_raw);
      bool any = false;
      masks[k] = union_accepted(result.get(), width, height, &any);
      records[k].accepted = any;
      records[k].millis = mshr_track_result_millis(result.get());
    }
  };
  sweep(init_slice + 1, n, 1);
  sweep(init_slice - 1, -1, -1);

  fs::create_directories(opts.out_dir);
  const fs::path dir = opts.out_dir;
  json volume;
  volume["init_slice"] = init_slice;
  volume["slices"] = json::array();
  for (int32_t k = 0; k < n; ++k) {
    records[k].area = mshr_mask_area(masks[k].get());
    check(mshr_mask_save(masks[k].get(),
                         (dir / frame_name("mask_", k, ".pgm")).string().c_str()));
    volume["slices"].push_back({{"index", k},
                                {"area", records[k].area},
                                {"accepted", records[k].accepted},
                                {"millis", records[k].millis}});
  }
  write_text_file((dir / "volume.json").string(), volume.dump(2) + "\n");
  std::printf("segmented %d slices, profile in %s\n", n,
              (dir / "volume.json").string().c_str());
  return 0;
}

// ---- extract-mshr -------------------------------------------------------

struct ExtractOptions {
  std::string image_path;
  std::string out_dir;
  std::string tree_dump;
  CommonOptions common;
};

int run_extract(const ExtractOptions& opts) {
  const ImagePtr image = load_image(opts.image_path);
  const ConfigPtr config = make_config(opts.common);

  std::vector<TreePtr> trees;
  if (!opts.common.extremal_baseline) {
    mshr_tree* raw = nullptr;
    check(mshr_tree_build(image.get(), config.get(), &raw));
    trees.emplace_back(raw);
  } else {
    for (int32_t ch = 0; ch < mshr_image_channels(image.get()); ++ch)
      for (int bright = 1; bright >= 0; --bright) {
        mshr_tree* raw = nullptr;
        check(mshr_tree_build_levelset(image.get(), ch, bright, &raw));
        trees.emplace_back(raw);
      }
  }

  struct Entry {
    const mshr_detections* detections;
    int32_t tree_index;
    int32_t item;
  };
  std::vector<DetectionsPtr> per_tree;
  std::vector<Entry> entries;
  for (size_t ti = 0; ti < trees.size(); ++ti) {
    mshr_detections* raw = nullptr;
    check(mshr_detect(trees[ti].get(), config.get(), &raw));
    per_tree.emplace_back(raw);
    for (int32_t i = 0; i < mshr_detections_count(raw); ++i)
      entries.push_back({raw, static_cast<int32_t>(ti), i});
  }
  std::stable_sort(entries.begin(), entries.end(),
                   [](const Entry& a, const Entry& b) {
                     const double sa = mshr_detections_stability(a.detections, a.item);
                     const double sb = mshr_detections_stability(b.detections, b.item);
                     if (sa != sb) return sa < sb;
                     return mshr_detections_area(a.detections, a.item) >
                            mshr_detections_area(b.detections, b.item);
                   });

  fs::create_directories(opts.out_dir);
  const fs::path dir = opts.out_dir;
  json report = json::array();
  for (size_t i = 0; i < entries.size(); ++i) {
    const Entry& e = entries[i];
    char name[64];
    std::snprintf(name, sizeof(name), "det_%03zu.pgm", i);
    mshr_mask* mask_raw = nullptr;
    check(mshr_detections_mask(e.detections, e.item, &mask_raw));
    MaskPtr mask(mask_raw);
    check(mshr_mask_save(mask.get(), (dir / name).string().c_str()));

    mshr_rect bbox{};
    check(mshr_detections_bbox(e.detections, e.item, &bbox));
    report.push_back({{"mask", name},
                      {"tree", e.tree_index},
                      {"node", mshr_detections_node(e.detections, e.item)},
                      {"level", mshr_detections_level(e.detections, e.item)},
                      {"stability", mshr_detections_stability(e.detections, e.item)},
                      {"area", mshr_detections_area(e.detections, e.item)},
                      {"bbox", rect_json(bbox)}});
  }
  write_text_file((dir / "detections.json").string(), report.dump(2) + "\n");

  if (!opts.tree_dump.empty()) {
    char* text = nullptr;
    check(mshr_tree_dump_json(trees[0].get(), &text));
    const std::string dump(text);
    mshr_string_free(text);
    write_text_file(opts.tree_dump, dump);
  }
  std::printf("%zu detections written to %s\n", entries.size(),
              opts.out_dir.c_str());
  return 0;
}

// ---- eval ---------------------------------------------------------------

struct EvalOptions {
  std::string pred_dir;
  std::string gt_dir;
  std::string out_path;
};

int run_eval(const EvalOptions& opts) {
  const std::vector<std::string> pred = list_masks(opts.pred_dir);
  const std::vector<std::string> gt = list_masks(opts.gt_dir);
  if (pred.size() != gt.size())
    throw std::runtime_error("prediction and ground-truth counts differ (" +
                             std::to_string(pred.size()) + " vs " +
                             std::to_string(gt.size()) + ")");

  std::vector<double> per_frame(pred.size());
  for (size_t i = 0; i < pred.size(); ++i) {
    const MaskPtr a = load_mask(pred[i]);
    const MaskPtr b = load_mask(gt[i]);
    check(mshr_iou(a.get(), b.get(), &per_frame[i]));
  }

  std::string curve;
  for (size_t i = 0; i < per_frame.size(); ++i) {
    char line[64];
    std::snprintf(line, sizeof(line), "%zu %.9g\n", i, per_frame[i]);
    curve += line;
  }
  if (!opts.out_path.empty()) write_text_file(opts.out_path, curve);

  double mean = 0.0;
  for (const double v : per_frame) mean += v;
  mean /= static_cast<double>(per_frame.size());
  std::vector<double> sorted = per_frame;
  std::sort(sorted.begin(), sorted.end());
  const size_t h = sorted.size() / 2;
  const double median = sorted.size() % 2 == 1
                            ? sorted[h]
                            : 0.5 * (sorted[h - 1] + sorted[h]);

  const json summary = {
      {"frames", per_frame.size()}, {"mean", mean}, {"median", median}};
  std::printf("%s\n", summary.dump().c_str());
  return 0;
}

// ---- best-box -----------------------------------------------------------

struct BestBoxOptions {
  std::string gt_path;
  std::string mode = "exhaustive";
  std::string out_path;
};

int run_best_box(const BestBoxOptions& opts) {
  if (opts.mode != "exhaustive" && opts.mode != "heuristic")
    throw std::runtime_error("--mode must be exhaustive or heuristic");
  const bool exhaustive = opts.mode == "exhaustive";

  std::vector<std::string> paths;
  if (fs::is_directory(opts.gt_path))
    paths = list_masks(opts.gt_path);
  else
    paths.push_back(opts.gt_path);

  std::string table;
  json boxes = json::array();
  double mean_phi = 0.0;
  for (size_t i = 0; i < paths.size(); ++i) {
    const MaskPtr gt = load_mask(paths[i]);
    mshr_rect box{};
    double phi = 0.0;
    check(mshr_best_box(gt.get(), exhaustive ? 1 : 0, &box, &phi));
    mean_phi += phi;

    char line[64];
    std::snprintf(line, sizeof(line), "%zu %.9g\n", i, phi);
    table += line;
    boxes.push_back({{"index", i},
                     {"mask", fs::path(paths[i]).filename().string()},
                     {"phi", phi},
                     {"box", rect_json(box)}});
  }
  if (!opts.out_path.empty()) write_text_file(opts.out_path, table);

  const json summary = {{"mode", opts.mode},
                        {"masks", paths.size()},
                        {"mean_phi", mean_phi / paths.size()},
                        {"boxes", std::move(boxes)}};
  std::printf("%s\n", summary.dump().c_str());
  return 0;
}

// ---- bench --------------------------------------------------------------

struct BenchOptions {
  std::vector<int32_t> sizes = {128, 256, 512};
  std::vector<int32_t> channels = {1, 3};
  int32_t repeats = 3;
};

uint64_t splitmix64(uint64_t* state) {
  uint64_t z = (*state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

ImagePtr noise_image(int32_t size, int32_t channels, uint64_t seed) {
  mshr_image* raw = nullptr;
  check(mshr_image_create(size, size, channels, 255, &raw));
  ImagePtr image(raw);
  int32_t* data = mshr_image_data_mut(image.get());
  const size_t n = static_cast<size_t>(size) * size * channels;
  uint64_t state = seed;
  for (size_t i = 0; i < n; ++i)
    data[i] = static_cast<int32_t>(splitmix64(&state) % 256);
  return image;
}

int run_bench(const BenchOptions& opts) {
  mshr_config* config_raw = nullptr;
  check(mshr_config_default(&config_raw));
  ConfigPtr config(config_raw);

  std::printf("%8s %9s %12s %14s\n", "size", "channels", "millis", "ns/pixel");
  for (const int32_t size : opts.sizes) {
    for (const int32_t channels : opts.channels) {
      const ImagePtr image = noise_image(size, channels, 42);
      std::vector<double> times;
      for (int32_t r = 0; r < opts.repeats; ++r) {
        const double t0 = now_ms();
        mshr_tree* tree_raw = nullptr;
        check(mshr_tree_build(image.get(), config.get(), &tree_raw));
        mshr_tree_free(tree_raw);
        times.push_back(now_ms() - t0);
      }
      std::sort(times.begin(), times.end());
      const double median = times[times.size() / 2];
      const double per_pixel =
          median * 1e6 / (static_cast<double>(size) * size);
      std::printf("%8d %9d %12.2f %14.1f\n", size, channels, median,
                  per_pixel);
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Maximally stable homogeneous region detection and tracking"};
  app.require_subcommand(1);

  GenSceneOptions gen_opts;
  CLI::App* gen = app.add_subcommand("gen-scene",
                                     "Generate a synthetic test sequence");
  gen->add_option("--kind", gen_opts.kind,
                  "Scene kind: fig1-block, color-block, sphere")
      ->capture_default_str();
  gen->add_option("--frames", gen_opts.frames, "Number of frames/slices")
      ->capture_default_str();
  gen->add_option("--width", gen_opts.width, "Frame width (0 = kind default)");
  gen->add_option("--height", gen_opts.height,
                  "Frame height (0 = kind default)");
  gen->add_option("--seed", gen_opts.seed, "Random seed")
      ->capture_default_str();
  gen->add_option("--max-shift", gen_opts.max_shift,
                  "Max per-frame translation in pixels")
      ->capture_default_str();
  gen->add_option("--max-rot", gen_opts.max_rot,
                  "Max per-frame rotation in degrees")
      ->capture_default_str();
  gen->add_option("--occlude-frame", gen_opts.occlude_frame,
                  "Hide the target in this frame (-1 = never)");
  gen->add_option("--out-dir", gen_opts.out_dir, "Output directory")
      ->required();

  TrackOptions track_opts;
  CLI::App* track = app.add_subcommand("track", "Track through a sequence");
  track->add_option("--seq", track_opts.seq, "Scene manifest JSON")
      ->required();
  track->add_option("--init", track_opts.init_text,
                    "Init region r0,c0,h,w (default: manifest \"init\")");
  track->add_option("--out-dir", track_opts.out_dir, "Output directory")
      ->required();
  add_common(track, &track_opts.common);

  Slices3dOptions slices_opts;
  CLI::App* slices = app.add_subcommand(
      "slices3d", "Segment a slice stack outward from an initial slice");
  slices->add_option("--slices", slices_opts.slices, "Slice manifest JSON")
      ->required();
  slices->add_option("--init", slices_opts.init_text,
                     "Init region r0,c0,h,w (default: manifest \"init\")");
  slices->add_option("--init-slice", slices_opts.init_slice,
                     "Index of the initial slice (default: manifest)");
  slices->add_option("--out-dir", slices_opts.out_dir, "Output directory")
      ->required();
  add_common(slices, &slices_opts.common);

  ExtractOptions extract_opts;
  CLI::App* extract = app.add_subcommand(
      "extract-mshr", "Detect stable regions in a single image");
  extract->add_option("--image", extract_opts.image_path, "Input image")
      ->required();
  extract->add_option("--out-dir", extract_opts.out_dir, "Output directory")
      ->required();
  extract->add_option("--dump-tree", extract_opts.tree_dump,
                      "Also write the hierarchy as JSON to this file");
  add_common(extract, &extract_opts.common);

  EvalOptions eval_opts;
  CLI::App* eval = app.add_subcommand(
      "eval", "Per-frame IoU of predicted vs ground-truth masks");
  eval->add_option("--pred", eval_opts.pred_dir, "Directory of predicted masks")
      ->required();
  eval->add_option("--gt", eval_opts.gt_dir,
                   "Directory of ground-truth masks")
      ->required();
  eval->add_option("--out", eval_opts.out_path,
                   "Two-column output file (index iou)");

  BestBoxOptions box_opts;
  CLI::App* box = app.add_subcommand(
      "best-box", "Best axis-aligned box for ground-truth masks");
  box->add_option("--gt", box_opts.gt_path, "Mask file or directory")
      ->required();
  box->add_option("--mode", box_opts.mode, "exhaustive or heuristic")
      ->capture_default_str();
  box->add_option("--out", box_opts.out_path,
                  "Two-column output file (index phi)");

  BenchOptions bench_opts;
  CLI::App* bench = app.add_subcommand(
      "bench", "Time tree construction across sizes and channel counts");
  bench->add_option("--sizes", bench_opts.sizes, "Image sizes")
      ->delimiter(',');
  bench->add_option("--channels", bench_opts.channels, "Channel counts")
      ->delimiter(',');
  bench->add_option("--repeats", bench_opts.repeats, "Repeats per cell")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (gen->parsed()) return run_gen_scene(gen_opts);
    if (track->parsed()) return run_track(track_opts);
    if (slices->parsed()) return run_slices3d(slices_opts);
    if (extract->parsed()) return run_extract(extract_opts);
    if (eval->parsed()) return run_eval(eval_opts);
    if (box->parsed()) return run_best_box(box_opts);
    if (bench->parsed()) return run_bench(bench_opts);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
