/* C interface for the MSHR detection and tracking library.
 *
 * All objects are opaque handles created and released by matching
 * mshr_*_free() calls. Functions return mshr_status; on any status other
 * than MSHR_OK the thread-local message from mshr_last_error() describes
 * the failure. Pointers returned through out-parameters are owned by the
 * caller unless documented as borrowed.
 */
#ifndef MSHR_H
#define MSHR_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mshr_status {
  MSHR_OK = 0,
  MSHR_ERR_INVALID_ARGUMENT = 1,
  MSHR_ERR_IO = 2,
  MSHR_ERR_PARSE = 3,
  MSHR_ERR_DIMENSION_MISMATCH = 4,
  MSHR_ERR_OUT_OF_RANGE = 5,
  MSHR_ERR_NO_REGION = 6,
  MSHR_ERR_EMPTY_REGION = 7,
  MSHR_ERR_INTERNAL = 8
} mshr_status;

typedef struct mshr_rect {
  int32_t row0;
  int32_t col0;
  int32_t height;
  int32_t width;
} mshr_rect;

typedef struct mshr_image mshr_image;
typedef struct mshr_mask mshr_mask;
typedef struct mshr_config mshr_config;
typedef struct mshr_tree mshr_tree;
typedef struct mshr_detections mshr_detections;
typedef struct mshr_tracker mshr_tracker;
typedef struct mshr_track_result mshr_track_result;
typedef struct mshr_scene mshr_scene;

/* Message for the most recent failing call on this thread. Borrowed;
 * valid until the next failing call. Empty string if nothing failed. */
const char* mshr_last_error(void);

/* Frees a string returned through a char** out-parameter. */
void mshr_string_free(char* s);

/* ---- images ------------------------------------------------------------ */

/* Loads a PGM/PPM file, or a JSON channel manifest for other channel
 * counts. */
mshr_status mshr_image_load(const char* path, mshr_image** out);

/* Saves as PGM (1 channel), PPM (3 channels), or planar PGMs plus a JSON
 * manifest at `path` otherwise. */
mshr_status mshr_image_save(const mshr_image* image, const char* path);

mshr_status mshr_image_create(int32_t width, int32_t height, int32_t channels,
                              int32_t max_value, mshr_image** out);
void mshr_image_free(mshr_image* image);

int32_t mshr_image_width(const mshr_image* image);
int32_t mshr_image_height(const mshr_image* image);
int32_t mshr_image_channels(const mshr_image* image);
int32_t mshr_image_max_value(const mshr_image* image);

/* Borrowed interleaved sample buffer, length width*height*channels,
 * row-major with channels fastest. */
const int32_t* mshr_image_data(const mshr_image* image);
int32_t* mshr_image_data_mut(mshr_image* image);

/* ---- masks ------------------------------------------------------------- */

/* Loads a PGM as a binary mask; any nonzero value is foreground. If
 * nonbinary_warning is non-NULL it is set to 1 when values other than
 * 0 and maxval were present. */
mshr_status mshr_mask_load(const char* path, mshr_mask** out,
                           int* nonbinary_warning);
mshr_status mshr_mask_save(const mshr_mask* mask, const char* path);
mshr_status mshr_mask_create(int32_t width, int32_t height, mshr_mask** out);
void mshr_mask_free(mshr_mask* mask);

int32_t mshr_mask_width(const mshr_mask* mask);
int32_t mshr_mask_height(const mshr_mask* mask);
int64_t mshr_mask_area(const mshr_mask* mask);

/* Borrowed byte-per-pixel buffer, 0 or 1, length width*height. */
const uint8_t* mshr_mask_data(const mshr_mask* mask);
uint8_t* mshr_mask_data_mut(mshr_mask* mask);

/* ---- configuration ----------------------------------------------------- */

mshr_status mshr_config_default(mshr_config** out);
mshr_status mshr_config_load(const char* path, mshr_config** out);
mshr_status mshr_config_parse(const char* json_text, mshr_config** out);
void mshr_config_free(mshr_config* config);

/* Applies one dotted-path override such as "stability.delta=3". The
 * config is revalidated. */
mshr_status mshr_config_set(mshr_config* config, const char* assignment);

/* Serializes to JSON. *out is malloc'd; release with mshr_string_free. */
mshr_status mshr_config_to_json(const mshr_config* config, char** out);

/* ---- component trees --------------------------------------------------- */

/* Builds the edge-based component tree using the "tree" section of the
 * configuration. */
mshr_status mshr_tree_build(const mshr_image* image, const mshr_config* config,
                            mshr_tree** out);

/* Builds the single-channel extremal-level baseline tree for `channel`,
 * over bright (nonzero) or dark components. */
mshr_status mshr_tree_build_levelset(const mshr_image* image, int32_t channel,
                                     int bright, mshr_tree** out);
void mshr_tree_free(mshr_tree* tree);

int32_t mshr_tree_node_count(const mshr_tree* tree);

/* Serializes the hierarchy to JSON. *out is malloc'd; release with
 * mshr_string_free. */
mshr_status mshr_tree_dump_json(const mshr_tree* tree, char** out);

/* ---- MSHR detection ---------------------------------------------------- */

/* Extracts maximally stable homogeneous regions using the "stability"
 * section of the configuration, sorted by ascending stability score. */
mshr_status mshr_detect(const mshr_tree* tree, const mshr_config* config,
                        mshr_detections** out);
void mshr_detections_free(mshr_detections* detections);

int32_t mshr_detections_count(const mshr_detections* detections);
int32_t mshr_detections_node(const mshr_detections* detections, int32_t index);
int32_t mshr_detections_level(const mshr_detections* detections, int32_t index);
double mshr_detections_stability(const mshr_detections* detections,
                                 int32_t index);
int64_t mshr_detections_area(const mshr_detections* detections, int32_t index);
mshr_status mshr_detections_bbox(const mshr_detections* detections,
                                 int32_t index, mshr_rect* out);
mshr_status mshr_detections_mask(const mshr_detections* detections,
                                 int32_t index, mshr_mask** out);

/* ---- tracking ---------------------------------------------------------- */

mshr_status mshr_tracker_new(const mshr_config* config, mshr_tracker** out);
mshr_status mshr_tracker_clone(const mshr_tracker* tracker, mshr_tracker** out);
void mshr_tracker_free(mshr_tracker* tracker);

/* Selects up to max_targets regions inside init_box of the first frame.
 * Fails with MSHR_ERR_NO_REGION when nothing qualifies. */
mshr_status mshr_tracker_init(mshr_tracker* tracker, const mshr_image* image,
                              const mshr_rect* init_box);

int32_t mshr_tracker_target_count(const mshr_tracker* tracker);

/* Segmentation and bounding box of target `index` as of the most recent
 * accepted observation (the init frame until a step accepts). */
mshr_status mshr_tracker_target_mask(const mshr_tracker* tracker, int32_t index,
                                     mshr_mask** out);
mshr_status mshr_tracker_target_bbox(const mshr_tracker* tracker, int32_t index,
                                     mshr_rect* out);

/* Advances the tracker by one frame. */
mshr_status mshr_tracker_step(mshr_tracker* tracker, const mshr_image* image,
                              mshr_track_result** out);
void mshr_track_result_free(mshr_track_result* result);

int32_t mshr_track_result_targets(const mshr_track_result* result);
int mshr_track_result_accepted(const mshr_track_result* result, int32_t index);

/* Matching distance of the best candidate; negative when the search
 * region held no candidate at all. */
double mshr_track_result_distance(const mshr_track_result* result,
                                  int32_t index);
double mshr_track_result_millis(const mshr_track_result* result);
mshr_status mshr_track_result_mask(const mshr_track_result* result,
                                   int32_t index, mshr_mask** out);
mshr_status mshr_track_result_bbox(const mshr_track_result* result,
                                   int32_t index, mshr_rect* out);

/* ---- evaluation -------------------------------------------------------- */

mshr_status mshr_iou(const mshr_mask* a, const mshr_mask* b, double* out);

/* Best axis-aligned box under the overlap objective. exhaustive != 0
 * searches all boxes; otherwise a multi-start local search is used.
 * phi_out receives the achieved overlap score. */
mshr_status mshr_best_box(const mshr_mask* ground_truth, int exhaustive,
                          mshr_rect* box_out, double* phi_out);

/* ---- synthetic scenes -------------------------------------------------- */

/* Generates a deterministic synthetic sequence. `kind` is "fig1-block",
 * "color-block", or "sphere"; see mshr_scene_* accessors for the parts.
 * width/height 0 selects the kind's default size. occlude_frame -1
 * disables occlusion. */
mshr_status mshr_scene_generate(const char* kind, int32_t frames,
                                int32_t width, int32_t height, uint64_t seed,
                                double max_shift, double max_rot_deg,
                                int32_t occlude_frame, mshr_scene** out);
void mshr_scene_free(mshr_scene* scene);

int32_t mshr_scene_frame_count(const mshr_scene* scene);

/* Borrowed views into the scene; valid until mshr_scene_free. */
const mshr_image* mshr_scene_frame(const mshr_scene* scene, int32_t index);
const mshr_mask* mshr_scene_gt(const mshr_scene* scene, int32_t index);

mshr_status mshr_scene_init_rect(const mshr_scene* scene, mshr_rect* out);
int32_t mshr_scene_init_slice(const mshr_scene* scene);

#ifdef __cplusplus
}
#endif

#endif /* MSHR_H */
