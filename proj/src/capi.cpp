#include "mshr/mshr.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <new>
#include <string>
#include <utility>
#include <vector>

#include "component_tree.hpp"
#include "config.hpp"
#include "error.hpp"
#include "eval.hpp"
#include "image.hpp"
#include "scene.hpp"
#include "stability.hpp"
#include "tracker.hpp"

struct mshr_image {
  mshr::MultichannelImage value;
};
struct mshr_mask {
  mshr::SegmentationMask value;
};
struct mshr_config {
  mshr::TrackerConfig value;
};
struct mshr_tree {
  std::shared_ptr<const mshr::ComponentTree> value;
};
struct mshr_detections {
  std::shared_ptr<const mshr::ComponentTree> tree;
  std::vector<mshr::MshrDetection> items;
};
struct mshr_tracker {
  mshr::Tracker value;
};
struct mshr_track_result {
  mshr::TrackResult value;
};
struct mshr_scene {
  mshr::Scene value;
  std::vector<mshr_image> frames;
  std::vector<mshr_mask> gt;
};

namespace {

thread_local std::string g_last_error;

mshr_status status_of(mshr::ErrorCode code) {
  switch (code) {
    case mshr::ErrorCode::InvalidArgument: return MSHR_ERR_INVALID_ARGUMENT;
    case mshr::ErrorCode::Io: return MSHR_ERR_IO;
    case mshr::ErrorCode::Parse: return MSHR_ERR_PARSE;
    case mshr::ErrorCode::DimensionMismatch: return MSHR_ERR_DIMENSION_MISMATCH;
    case mshr::ErrorCode::OutOfRange: return MSHR_ERR_OUT_OF_RANGE;
    case mshr::ErrorCode::NoRegion: return MSHR_ERR_NO_REGION;
    case mshr::ErrorCode::EmptyRegion: return MSHR_ERR_EMPTY_REGION;
    case mshr::ErrorCode::Internal: return MSHR_ERR_INTERNAL;
  }
  return MSHR_ERR_INTERNAL;
}

/// Runs `fn`, converting exceptions into status codes and recording the
/// message for mshr_last_error().
template <typename Fn>
mshr_status guarded(Fn&& fn) {
  try {
    fn();
    return MSHR_OK;
  } catch (const mshr::Error& e) {
    g_last_error = e.what();
    return status_of(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return MSHR_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return MSHR_ERR_INTERNAL;
  }
}

mshr_status invalid(const char* msg) {
  g_last_error = msg;
  return MSHR_ERR_INVALID_ARGUMENT;
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out != nullptr) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

mshr_rect to_c(const mshr::Rect& r) {
  return mshr_rect{r.row0, r.col0, r.height, r.width};
}

mshr::Rect from_c(const mshr_rect& r) {
  return mshr::Rect{r.row0, r.col0, r.height, r.width};
}

bool det_index_ok(const mshr_detections* d, int32_t index) {
  return d != nullptr && index >= 0 &&
         index < static_cast<int32_t>(d->items.size());
}

bool result_index_ok(const mshr_track_result* r, int32_t index) {
  return r != nullptr && index >= 0 &&
         index < static_cast<int32_t>(r->value.targets.size());
}

}  // namespace

extern "C" {

const char* mshr_last_error(void) { return g_last_error.c_str(); }

void mshr_string_free(char* s) { std::free(s); }

/* ---- images ------------------------------------------------------------ */

mshr_status mshr_image_load(const char* path, mshr_image** out) {
  if (path == nullptr || out == nullptr) return invalid("null argument");
  return guarded([&] { *out = new mshr_image{mshr::load_image(path)}; });
}

mshr_status mshr_image_save(const mshr_image* image, const char* path) {
  if (image == nullptr || path == nullptr) return invalid("null argument");
  return guarded([&] { mshr::save_image(image->value, path); });
}

mshr_status mshr_image_create(int32_t width, int32_t height, int32_t channels,
                              int32_t max_value, mshr_image** out) {
  if (out == nullptr) return invalid("null argument");
  return guarded([&] {
    if (width < 1 || height < 1 || channels < 1 || max_value < 1)
      mshr::fail(mshr::ErrorCode::InvalidArgument, "bad image dimensions");
    *out = new mshr_image{
        mshr::MultichannelImage(width, height, channels, max_value)};
  });
}

void mshr_image_free(mshr_image* image) { delete image; }

int32_t mshr_image_width(const mshr_image* image) { return image->value.width; }
int32_t mshr_image_height(const mshr_image* image) {
  return image->value.height;
}
int32_t mshr_image_channels(const mshr_image* image) {
  return image->value.channels;
}
int32_t mshr_image_max_value(const mshr_image* image) {
  return image->value.max_value;
}

const int32_t* mshr_image_data(const mshr_image* image) {
  return image->value.samples.data();
}
int32_t* mshr_image_data_mut(mshr_image* image) {
  return image->value.samples.data();
}

/* ---- masks ------------------------------------------------------------- */

mshr_status mshr_mask_load(const char* path, mshr_mask** out,
                           int* nonbinary_warning) {
  if (path == nullptr || out == nullptr) return invalid("null argument");
  return guarded([&] {
    bool warn = false;
    *out = new mshr_mask{mshr::load_mask(path, &warn)};
    if (nonbinary_warning != nullptr) *nonbinary_warning = warn ? 1 : 0;
  });
}

mshr_status mshr_mask_save(const mshr_mask* mask, const char* path) {
  if (mask == nullptr || path == nullptr) return invalid("null argument");
  return guarded([&] { mshr::save_mask(mask->value, path); });
}

mshr_status mshr_mask_create(int32_t width, int32_t height, mshr_mask** out) {
  if (out == nullptr) return invalid("null argument");
  return guarded([&] {
    if (width < 1 || height < 1)
      mshr::fail(mshr::ErrorCode::InvalidArgument, "bad mask dimensions");
    *out = new mshr_mask{mshr::SegmentationMask(width, height)};
  });
}

void mshr_mask_free(mshr_mask* mask) { delete mask; }

int32_t mshr_mask_width(const mshr_mask* mask) { return mask->value.width; }
int32_t mshr_mask_height(const mshr_mask* mask) { return mask->value.height; }
int64_t mshr_mask_area(const mshr_mask* mask) { return mask->value.area(); }

const uint8_t* mshr_mask_data(const mshr_mask* mask) {
  return mask->value.bits.data();
}
uint8_t* mshr_mask_data_mut(mshr_mask* mask) { return mask->value.bits.data(); }

/* ---- configuration ----------------------------------------------------- */

mshr_status mshr_config_default(mshr_config** out) {
  if (out == nullptr) return invalid("null argument");
  return guarded([&] { *out = new mshr_config{mshr::TrackerConfig{}}; });
}

mshr_status mshr_config_load(const char* path, mshr_config** out) {
  if (path == nullptr || out == nullptr) return invalid("null argument");
  return guarded([&] { *out = new mshr_config{mshr::load_config(path)}; });
}

mshr_status mshr_config_parse(const char* json_text, mshr_config** out) {
  if (json_text == nullptr || out == nullptr) return invalid("null argument");
  return guarded([&] { *out = new mshr_config{mshr::parse_config(json_text)}; });
}

void mshr_config_free(mshr_config* config) { delete config; }

mshr_status mshr_config_set(mshr_config* config, const char* assignment) {
  if (config == nullptr || assignment == nullptr)
    return invalid("null argument");
  return guarded([&] {
    mshr::TrackerConfig next = config->value;
    mshr::apply_override(next, assignment);
    mshr::validate_config(next);
    config->value = next;
  });
}

mshr_status mshr_config_to_json(const mshr_config* config, char** out) {
  if (config == nullptr || out == nullptr) return invalid("null argument");
  return guarded([&] {
    char* s = dup_string(mshr::config_to_json(config->value));
    if (s == nullptr) throw std::bad_alloc();
    *out = s;
  });
}

/* ---- component trees --------------------------------------------------- */

mshr_status mshr_tree_build(const mshr_image* image, const mshr_config* config,
                            mshr_tree** out) {
  if (image == nullptr || config == nullptr || out == nullptr)
    return invalid("null argument");
  return guarded([&] {
    *out = new mshr_tree{std::make_shared<const mshr::ComponentTree>(
        mshr::build_component_tree(image->value, config->value.tree))};
  });
}

mshr_status mshr_tree_build_levelset(const mshr_image* image, int32_t channel,
                                     int bright, mshr_tree** out) {
  if (image == nullptr || out == nullptr) return invalid("null argument");
  return guarded([&] {
    *out = new mshr_tree{std::make_shared<const mshr::ComponentTree>(
        mshr::build_levelset_tree(image->value, channel, bright != 0))};
  });
}

void mshr_tree_free(mshr_tree* tree) { delete tree; }

int32_t mshr_tree_node_count(const mshr_tree* tree) {
  return tree->value->node_count();
}

mshr_status mshr_tree_dump_json(const mshr_tree* tree, char** out) {
  if (tree == nullptr || out == nullptr) return invalid("null argument");
  return guarded([&] {
    char* s = dup_string(tree->value->dump_json());
    if (s == nullptr) throw std::bad_alloc();
    *out = s;
  });
}

/* ---- MSHR detection ---------------------------------------------------- */

mshr_status mshr_detect(const mshr_tree* tree, const mshr_config* config,
                        mshr_detections** out) {
  if (tree == nullptr || config == nullptr || out == nullptr)
    return invalid("null argument");
  return guarded([&] {
    auto items = mshr::extract_mshr(*tree->value, config->value.stability);
    *out = new mshr_detections{tree->value, std::move(items)};
  });
}

void mshr_detections_free(mshr_detections* detections) { delete detections; }

int32_t mshr_detections_count(const mshr_detections* detections) {
  return static_cast<int32_t>(detections->items.size());
}

int32_t mshr_detections_node(const mshr_detections* detections, int32_t index) {
  return det_index_ok(detections, index) ? detections->items[index].node : -1;
}

int32_t mshr_detections_level(const mshr_detections* detections,
                              int32_t index) {
  return det_index_ok(detections, index) ? detections->items[index].level : -1;
}

double mshr_detections_stability(const mshr_detections* detections,
                                 int32_t index) {
  return det_index_ok(detections, index) ? detections->items[index].stability
                                         : -1.0;
}

int64_t mshr_detections_area(const mshr_detections* detections, int32_t index) {
  return det_index_ok(detections, index)
             ? detections->tree->area[detections->items[index].node]
             : -1;
}

mshr_status mshr_detections_bbox(const mshr_detections* detections,
                                 int32_t index, mshr_rect* out) {
  if (!det_index_ok(detections, index) || out == nullptr)
    return invalid("bad detection index");
  *out = to_c(detections->tree->node_bbox(detections->items[index].node));
  return MSHR_OK;
}

mshr_status mshr_detections_mask(const mshr_detections* detections,
                                 int32_t index, mshr_mask** out) {
  if (!det_index_ok(detections, index) || out == nullptr)
    return invalid("bad detection index");
  return guarded([&] {
    *out = new mshr_mask{
        detections->tree->node_mask(detections->items[index].node)};
  });
}

/* ---- tracking ---------------------------------------------------------- */

mshr_status mshr_tracker_new(const mshr_config* config, mshr_tracker** out) {
  if (config == nullptr || out == nullptr) return invalid("null argument");
  return guarded([&] { *out = new mshr_tracker{mshr::Tracker(config->value)}; });
}

mshr_status mshr_tracker_clone(const mshr_tracker* tracker,
                               mshr_tracker** out) {
  if (tracker == nullptr || out == nullptr) return invalid("null argument");
  return guarded([&] { *out = new mshr_tracker{tracker->value}; });
}

void mshr_tracker_free(mshr_tracker* tracker) { delete tracker; }

mshr_status mshr_tracker_init(mshr_tracker* tracker, const mshr_image* image,
                              const mshr_rect* init_box) {
  if (tracker == nullptr || image == nullptr || init_box == nullptr)
    return invalid("null argument");
  return guarded([&] { tracker->value.init(image->value, from_c(*init_box)); });
}

int32_t mshr_tracker_target_count(const mshr_tracker* tracker) {
  return tracker->value.target_count();
}

mshr_status mshr_tracker_target_mask(const mshr_tracker* tracker,
                                     int32_t index, mshr_mask** out) {
  if (tracker == nullptr || out == nullptr) return invalid("null argument");
  if (index < 0 || index >= tracker->value.target_count())
    return invalid("bad target index");
  return guarded(
      [&] { *out = new mshr_mask{tracker->value.target(index).last_mask}; });
}

mshr_status mshr_tracker_target_bbox(const mshr_tracker* tracker,
                                     int32_t index, mshr_rect* out) {
  if (tracker == nullptr || out == nullptr) return invalid("null argument");
  if (index < 0 || index >= tracker->value.target_count())
    return invalid("bad target index");
  *out = to_c(tracker->value.target(index).last_bbox);
  return MSHR_OK;
}

mshr_status mshr_tracker_step(mshr_tracker* tracker, const mshr_image* image,
                              mshr_track_result** out) {
  if (tracker == nullptr || image == nullptr || out == nullptr)
    return invalid("null argument");
  return guarded([&] {
    *out = new mshr_track_result{tracker->value.step(image->value)};
  });
}

void mshr_track_result_free(mshr_track_result* result) { delete result; }

int32_t mshr_track_result_targets(const mshr_track_result* result) {
  return static_cast<int32_t>(result->value.targets.size());
}

int mshr_track_result_accepted(const mshr_track_result* result, int32_t index) {
  return result_index_ok(result, index) && result->value.targets[index].accepted
             ? 1
             : 0;
}

double mshr_track_result_distance(const mshr_track_result* result,
                                  int32_t index) {
  return result_index_ok(result, index) ? result->value.targets[index].distance
                                        : -1.0;
}

double mshr_track_result_millis(const mshr_track_result* result) {
  return result->value.millis;
}

mshr_status mshr_track_result_mask(const mshr_track_result* result,
                                   int32_t index, mshr_mask** out) {
  if (!result_index_ok(result, index) || out == nullptr)
    return invalid("bad target index");
  return guarded(
      [&] { *out = new mshr_mask{result->value.targets[index].mask}; });
}

mshr_status mshr_track_result_bbox(const mshr_track_result* result,
                                   int32_t index, mshr_rect* out) {
  if (!result_index_ok(result, index) || out == nullptr)
    return invalid("bad target index");
  *out = to_c(result->value.targets[index].bbox);
  return MSHR_OK;
}

/* ---- evaluation -------------------------------------------------------- */

mshr_status mshr_iou(const mshr_mask* a, const mshr_mask* b, double* out) {
  if (a == nullptr || b == nullptr || out == nullptr)
    return invalid("null argument");
  return guarded([&] { *out = mshr::iou(a->value, b->value); });
}

mshr_status mshr_best_box(const mshr_mask* ground_truth, int exhaustive,
                          mshr_rect* box_out, double* phi_out) {
  if (ground_truth == nullptr || box_out == nullptr || phi_out == nullptr)
    return invalid("null argument");
  return guarded([&] {
    const mshr::BestBoxResult r =
        mshr::best_box(ground_truth->value, exhaustive != 0);
    *box_out = to_c(r.box);
    *phi_out = r.phi;
  });
}

/* ---- synthetic scenes -------------------------------------------------- */

mshr_status mshr_scene_generate(const char* kind, int32_t frames,
                                int32_t width, int32_t height, uint64_t seed,
                                double max_shift, double max_rot_deg,
                                int32_t occlude_frame, mshr_scene** out) {
  if (kind == nullptr || out == nullptr) return invalid("null argument");
  return guarded([&] {
    mshr::SceneParams params;
    params.kind = kind;
    params.frames = frames;
    params.width = width;
    params.height = height;
    params.seed = seed;
    params.max_shift = max_shift;
    params.max_rot_deg = max_rot_deg;
    params.occlude_frame = occlude_frame;

    auto scene = std::make_unique<mshr_scene>();
    scene->value = mshr::generate_scene(params);
    scene->frames.reserve(scene->value.frames.size());
    scene->gt.reserve(scene->value.frames.size());
    for (const mshr::SceneFrame& f : scene->value.frames) {
      scene->frames.push_back(mshr_image{f.image});
      scene->gt.push_back(mshr_mask{f.gt});
    }
    *out = scene.release();
  });
}

void mshr_scene_free(mshr_scene* scene) { delete scene; }

int32_t mshr_scene_frame_count(const mshr_scene* scene) {
  return static_cast<int32_t>(scene->frames.size());
}

const mshr_image* mshr_scene_frame(const mshr_scene* scene, int32_t index) {
  if (scene == nullptr || index < 0 ||
      index >= static_cast<int32_t>(scene->frames.size()))
    return nullptr;
  return &scene->frames[index];
}

const mshr_mask* mshr_scene_gt(const mshr_scene* scene, int32_t index) {
  if (scene == nullptr || index < 0 ||
      index >= static_cast<int32_t>(scene->gt.size()))
    return nullptr;
  return &scene->gt[index];
}

mshr_status mshr_scene_init_rect(const mshr_scene* scene, mshr_rect* out) {
  if (scene == nullptr || out == nullptr) return invalid("null argument");
  *out = to_c(scene->value.init);
  return MSHR_OK;
}

int32_t mshr_scene_init_slice(const mshr_scene* scene) {
  return scene->value.init_slice;
}

}  // extern "C"
