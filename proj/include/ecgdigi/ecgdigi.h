/* C interface to the ecgdigi library.
 *
 * Every fallible call returns an ecgd_status; on failure the message is
 * available from ecgd_last_error() on the same thread until the next call.
 * Strings handed out through char** parameters are owned by the caller and
 * released with ecgd_string_free(). */
#ifndef ECGDIGI_ECGDIGI_H
#define ECGDIGI_ECGDIGI_H

#include <stddef.h>

#if defined(_WIN32)
#  define ECGD_API __declspec(dllexport)
#else
#  define ECGD_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ecgd_status {
  ECGD_OK = 0,
  ECGD_INVALID_ARGUMENT = 1,
  ECGD_NO_LEADS = 2,
  ECGD_PARTIAL_LEADS = 3,
  ECGD_STAGE_FAILURE = 4,
  ECGD_IO = 5,
  ECGD_FORMAT = 6
} ecgd_status;

typedef struct ecgd_config ecgd_config;
typedef struct ecgd_record ecgd_record;

ECGD_API const char* ecgd_version(void);
ECGD_API const char* ecgd_last_error(void);
ECGD_API void ecgd_string_free(char* s);

/* Configuration. Defaults match the library's documented defaults. */
ECGD_API ecgd_status ecgd_config_create(ecgd_config** out);
ECGD_API void ecgd_config_free(ecgd_config* config);
/* Overlays a JSON object; keys absent from it keep their value. The merged
 * result is validated and, on failure, the config is left unchanged. */
ECGD_API ecgd_status ecgd_config_merge_json(ecgd_config* config, const char* json);
ECGD_API ecgd_status ecgd_config_to_json(const ecgd_config* config, char** json);

/* Synthetic dataset with ground truth under the configured output_dir. */
ECGD_API ecgd_status ecgd_synth(const ecgd_config* config, int count);

/* Full pipeline on one page; outputs go to output_dir. Returns ECGD_OK,
 * ECGD_PARTIAL_LEADS or ECGD_NO_LEADS on a completed run, in which case
 * *record (may be NULL) and *diagnostics (may be NULL) are set. */
ECGD_API ecgd_status ecgd_digitize(const ecgd_config* config, const char* page_path, ecgd_record** record,
                                   char** diagnostics);

/* Detection stage only: `class pc bx by bw bh` lines, and the same as JSON. */
ECGD_API ecgd_status ecgd_detect(const ecgd_config* config, const char* page_path, char** lines, char** json);

/* Records. */
ECGD_API ecgd_status ecgd_record_load(const char* path, ecgd_record** out);
ECGD_API ecgd_status ecgd_record_from_json(const char* json, ecgd_record** out);
ECGD_API ecgd_status ecgd_record_to_json(const ecgd_record* record, char** json);
ECGD_API void ecgd_record_free(ecgd_record* record);
ECGD_API size_t ecgd_record_lead_count(const ecgd_record* record);
/* NULL when index is out of range. */
ECGD_API const char* ecgd_record_lead_name(const ecgd_record* record, size_t index);
ECGD_API double ecgd_record_sample_period(const ecgd_record* record, size_t index);
ECGD_API size_t ecgd_record_sample_count(const ecgd_record* record, size_t index);
ECGD_API const double* ecgd_record_samples(const ecgd_record* record, size_t index);

ECGD_API ecgd_status ecgd_plot(const ecgd_record* record, char** svg);

/* Evaluation reports (JSON plus text table). pages_dir may be NULL, in which
 * case every image is frame_width x frame_height. */
ECGD_API ecgd_status ecgd_eval_detect(const char* detections_dir, const char* truths_dir, int frame_width,
                                      int frame_height, const char* pages_dir, char** json, char** table);
ECGD_API ecgd_status ecgd_eval_binarize(const char* pred_dir, const char* truth_dir, char** json, char** table);

#ifdef __cplusplus
}
#endif

#endif
