/* foldgate: cross-validation disagreement monitoring for segmentation
 * pipelines. C API: opaque handles, integer status codes, thread-local
 * error text via fg_last_error(). */

#ifndef FOLDGATE_FOLDGATE_H
#define FOLDGATE_FOLDGATE_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(FOLDGATE_BUILD)
#    define FG_API __declspec(dllexport)
#  else
#    define FG_API __declspec(dllimport)
#  endif
#elif defined(__GNUC__)
#  define FG_API __attribute__((visibility("default")))
#else
#  define FG_API
#endif

#define FG_VERSION_STRING "0.1.0"

#ifdef __cplusplus
extern "C" {
#endif

typedef enum fg_status {
    FG_OK = 0,
    FG_ERR_IO = 1,         /* filesystem failure */
    FG_ERR_VALIDATION = 2, /* bad format, bad config, contract violation */
    FG_ERR_ARGUMENT = 3,   /* null handle / out-of-range argument */
    FG_ERR_INTERNAL = 4
} fg_status;

FG_API const char* fg_version(void);

/* Message of the last failing call on this thread; empty string if none. */
FG_API const char* fg_last_error(void);

/* ---- label volumes ---- */

typedef struct fg_label_volume fg_label_volume;

FG_API fg_status fg_label_volume_read(const char* path, fg_label_volume** out);
FG_API fg_status fg_label_volume_write(const fg_label_volume* vol, const char* path);
FG_API void fg_label_volume_free(fg_label_volume* vol);

FG_API fg_status fg_label_volume_dims(const fg_label_volume* vol, int64_t dims[3]);
FG_API fg_status fg_label_volume_spacing(const fg_label_volume* vol, double spacing[3]);

/* Physical volume of one label in milliliters. */
FG_API fg_status fg_label_volume_ml(const fg_label_volume* vol, int32_t label, double* out_ml);

/* ---- metrics ---- */

FG_API fg_status fg_dice(const fg_label_volume* a, const fg_label_volume* b, int32_t label,
                         double* out_dice);

/* k(k-1)/2; returns 0 for k < 2. */
FG_API size_t fg_interfold_pair_count(size_t k);

/* out_scores must hold fg_interfold_pair_count(n_folds) doubles; pair order
 * (0,1),(0,2),...,(k-2,k-1). */
FG_API fg_status fg_interfold_dices(const fg_label_volume* const* folds, size_t n_folds,
                                    int32_t label, double* out_scores);

/* out_stats receives {min, mean, median, max}. */
FG_API fg_status fg_summary_stats(const double* scores, size_t n_scores, double out_stats[4]);

/* Per-voxel modal label across folds, ties toward the lowest id. */
FG_API fg_status fg_majority_vote(const fg_label_volume* const* folds, size_t n_folds,
                                  fg_label_volume** out);

/* ---- pipeline runs ---- */

typedef struct fg_run_config fg_run_config;

FG_API fg_run_config* fg_run_config_new(void);
FG_API void fg_run_config_free(fg_run_config* cfg);

FG_API fg_status fg_run_config_set_manifest(fg_run_config* cfg, const char* path);
FG_API fg_status fg_run_config_set_cohort(fg_run_config* cfg, const char* dir);
FG_API fg_status fg_run_config_set_policy(fg_run_config* cfg, const char* path);
FG_API fg_status fg_run_config_set_out(fg_run_config* cfg, const char* dir);
FG_API fg_status fg_run_config_set_perf_threshold(fg_run_config* cfg, double threshold);
FG_API fg_status fg_run_config_set_jobs(fg_run_config* cfg, int jobs);
FG_API fg_status fg_run_config_set_watch_interval(fg_run_config* cfg, double seconds);
FG_API fg_status fg_run_config_set_watch_stale_after(fg_run_config* cfg, double seconds);
FG_API fg_status fg_run_config_set_watch_once(fg_run_config* cfg, int once);

/* out_any_flagged (optional) is set to 1 when any case was flagged. */
FG_API fg_status fg_run_flag(const fg_run_config* cfg, int* out_any_flagged);
FG_API fg_status fg_run_ensemble(const fg_run_config* cfg);
FG_API fg_status fg_run_evaluate(const fg_run_config* cfg);
FG_API fg_status fg_run_watch(const fg_run_config* cfg, int* out_any_flagged);

/* ---- synthetic cohorts ---- */

typedef struct fg_synth_config fg_synth_config;

FG_API fg_synth_config* fg_synth_config_new(void);
FG_API void fg_synth_config_free(fg_synth_config* cfg);

FG_API fg_status fg_synth_config_set_cases(fg_synth_config* cfg, int64_t n_cases);
FG_API fg_status fg_synth_config_set_folds(fg_synth_config* cfg, int32_t k_folds);
FG_API fg_status fg_synth_config_set_seed(fg_synth_config* cfg, uint64_t seed);
FG_API fg_status fg_synth_config_set_dims(fg_synth_config* cfg, const int64_t dims[3]);
FG_API fg_status fg_synth_config_set_spacing(fg_synth_config* cfg, const double spacing[3]);
FG_API fg_status fg_synth_config_set_radii(fg_synth_config* cfg, double radii_min,
                                           double radii_max);
FG_API fg_status fg_synth_config_set_disagreement(fg_synth_config* cfg, double d);
FG_API fg_status fg_synth_config_set_reference_noise(fg_synth_config* cfg, double r);
FG_API fg_status fg_synth_config_set_prefix(fg_synth_config* cfg, const char* prefix);

FG_API fg_status fg_run_synth(const fg_synth_config* cfg, const char* out_dir);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* FOLDGATE_FOLDGATE_H */
