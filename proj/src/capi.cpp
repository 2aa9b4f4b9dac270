#include "foldgate/foldgate.h"

#include <cstring>
#include <exception>
#include <memory>
#include <new>
#include <string>
#include <vector>

#include "core/ensemble.hpp"
#include "core/errors.hpp"
#include "core/metrics.hpp"
#include "core/nifti.hpp"
#include "core/pipeline.hpp"
#include "core/synthgen.hpp"
#include "core/volume.hpp"

using namespace foldgate;

struct fg_label_volume {
    LabelVolume vol;
};

struct fg_run_config {
    RunConfig cfg;
};

struct fg_synth_config {
    SynthConfig cfg;
};

namespace {

thread_local std::string tl_last_error;

fg_status fail(fg_status code, const char* message) {
    tl_last_error = message;
    return code;
}

// Every exported call funnels through here so exceptions map to one status
// convention: IoError -> FG_ERR_IO, Format/Validation -> FG_ERR_VALIDATION.
template <typename Fn>
fg_status guarded(Fn&& fn) {
    try {
        fn();
        tl_last_error.clear();
        return FG_OK;
    } catch (const IoError& e) {
        return fail(FG_ERR_IO, e.what());
    } catch (const FormatError& e) {
        return fail(FG_ERR_VALIDATION, e.what());
    } catch (const ValidationError& e) {
        return fail(FG_ERR_VALIDATION, e.what());
    } catch (const std::bad_alloc&) {
        return fail(FG_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(FG_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(FG_ERR_INTERNAL, "unknown error");
    }
}

fg_status require(bool ok, const char* message) {
    return ok ? FG_OK : fail(FG_ERR_ARGUMENT, message);
}

} // namespace

extern "C" {

const char* fg_version(void) { return FG_VERSION_STRING; }

const char* fg_last_error(void) { return tl_last_error.c_str(); }

/* ---- label volumes ---- */

fg_status fg_label_volume_read(const char* path, fg_label_volume** out) {
    if (require(path && out, "fg_label_volume_read: null argument") != FG_OK)
        return FG_ERR_ARGUMENT;
    *out = nullptr;
    return guarded([&] {
        auto handle = std::make_unique<fg_label_volume>();
        handle->vol = to_label_volume(read_nifti(path));
        *out = handle.release();
    });
}

fg_status fg_label_volume_write(const fg_label_volume* vol, const char* path) {
    if (require(vol && path, "fg_label_volume_write: null argument") != FG_OK)
        return FG_ERR_ARGUMENT;
    return guarded([&] { write_nifti(vol->vol, path); });
}

void fg_label_volume_free(fg_label_volume* vol) { delete vol; }

fg_status fg_label_volume_dims(const fg_label_volume* vol, int64_t dims[3]) {
    if (require(vol && dims, "fg_label_volume_dims: null argument") != FG_OK)
        return FG_ERR_ARGUMENT;
    for (int i = 0; i < 3; ++i)
        dims[i] = vol->vol.geometry.dims[static_cast<std::size_t>(i)];
    return FG_OK;
}

fg_status fg_label_volume_spacing(const fg_label_volume* vol, double spacing[3]) {
    if (require(vol && spacing, "fg_label_volume_spacing: null argument") != FG_OK)
        return FG_ERR_ARGUMENT;
    for (int i = 0; i < 3; ++i)
        spacing[i] = vol->vol.geometry.spacing[static_cast<std::size_t>(i)];
    return FG_OK;
}

fg_status fg_label_volume_ml(const fg_label_volume* vol, int32_t label, double* out_ml) {
    if (require(vol && out_ml, "fg_label_volume_ml: null argument") != FG_OK)
        return FG_ERR_ARGUMENT;
    return guarded([&] { *out_ml = label_volume_ml(vol->vol, label); });
}

/* ---- metrics ---- */

fg_status fg_dice(const fg_label_volume* a, const fg_label_volume* b, int32_t label,
                  double* out_dice) {
    if (require(a && b && out_dice, "fg_dice: null argument") != FG_OK)
        return FG_ERR_ARGUMENT;
    return guarded([&] { *out_dice = dice(a->vol, b->vol, label); });
}

size_t fg_interfold_pair_count(size_t k) { return k < 2 ? 0 : k * (k - 1) / 2; }

fg_status fg_interfold_dices(const fg_label_volume* const* folds, size_t n_folds, int32_t label,
                             double* out_scores) {
    if (require(folds && out_scores, "fg_interfold_dices: null argument") != FG_OK)
        return FG_ERR_ARGUMENT;
    for (size_t i = 0; i < n_folds; ++i)
        if (require(folds[i] != nullptr, "fg_interfold_dices: null fold") != FG_OK)
            return FG_ERR_ARGUMENT;
    return guarded([&] {
        std::vector<LabelVolume> vols;
        vols.reserve(n_folds);
        for (size_t i = 0; i < n_folds; ++i)
            vols.push_back(folds[i]->vol);
        const InterfoldScores scores = interfold_dices(vols, label);
        std::memcpy(out_scores, scores.scores.data(), scores.scores.size() * sizeof(double));
    });
}

fg_status fg_summary_stats(const double* scores, size_t n_scores, double out_stats[4]) {
    if (require(scores && out_stats, "fg_summary_stats: null argument") != FG_OK)
        return FG_ERR_ARGUMENT;
    return guarded([&] {
        const SummaryStats s = summarize(std::span<const double>(scores, n_scores));
        out_stats[0] = s.min;
        out_stats[1] = s.mean;
        out_stats[2] = s.median;
        out_stats[3] = s.max;
    });
}

fg_status fg_majority_vote(const fg_label_volume* const* folds, size_t n_folds,
                           fg_label_volume** out) {
    if (require(folds && out, "fg_majority_vote: null argument") != FG_OK)
        return FG_ERR_ARGUMENT;
    for (size_t i = 0; i < n_folds; ++i)
        if (require(folds[i] != nullptr, "fg_majority_vote: null fold") != FG_OK)
            return FG_ERR_ARGUMENT;
    *out = nullptr;
    return guarded([&] {
        std::vector<LabelVolume> vols;
        vols.reserve(n_folds);
        for (size_t i = 0; i < n_folds; ++i)
            vols.push_back(folds[i]->vol);
        auto handle = std::make_unique<fg_label_volume>();
        handle->vol = majority_vote(vols).labels;
        *out = handle.release();
    });
}

/* ---- pipeline runs ---- */

fg_run_config* fg_run_config_new(void) { return new (std::nothrow) fg_run_config(); }

void fg_run_config_free(fg_run_config* cfg) { delete cfg; }

fg_status fg_run_config_set_manifest(fg_run_config* cfg, const char* path) {
    if (require(cfg && path, "fg_run_config_set_manifest: null argument") != FG_OK)
        return FG_ERR_ARGUMENT;
    cfg->cfg.manifest_path = path;
    return FG_OK;
}

fg_status fg_run_config_set_cohort(fg_run_config* cfg, const char* dir) {
    if (require(cfg && dir, "fg_run_config_set_cohort: null argument") != FG_OK)
        return FG_ERR_ARGUMENT;
    cfg->cfg.cohort_dir = dir;
    return FG_OK;
}

fg_status fg_run_config_set_policy(fg_run_config* cfg, const char* path) {
    if (require(cfg && path, "fg_run_config_set_policy: null argument") != FG_OK)
        return FG_ERR_ARGUMENT;
    cfg->cfg.policy_path = path;
    return FG_OK;
}

fg_status fg_run_config_set_out(fg_run_config* cfg, const char* dir) {
    if (require(cfg && dir, "fg_run_config_set_out: null argument") != FG_OK)
        return FG_ERR_ARGUMENT;
    cfg->cfg.out_dir = dir;
    return FG_OK;
}

fg_status fg_run_config_set_perf_threshold(fg_run_config* cfg, double threshold) {
    if (require(cfg != nullptr, "fg_run_config_set_perf_threshold: null config") != FG_OK)
        return FG_ERR_ARGUMENT;
    cfg->cfg.perf_threshold = threshold;
    return FG_OK;
}

fg_status fg_run_config_set_jobs(fg_run_config* cfg, int jobs) {
    if (require(cfg != nullptr, "fg_run_config_set_jobs: null config") != FG_OK)
        return FG_ERR_ARGUMENT;
    cfg->cfg.jobs = jobs;
    return FG_OK;
}

fg_status fg_run_config_set_watch_interval(fg_run_config* cfg, double seconds) {
    if (require(cfg != nullptr, "fg_run_config_set_watch_interval: null config") != FG_OK)
        return FG_ERR_ARGUMENT;
    cfg->cfg.watch_interval_s = seconds;
    return FG_OK;
}

fg_status fg_run_config_set_watch_stale_after(fg_run_config* cfg, double seconds) {
    if (require(cfg != nullptr, "fg_run_config_set_watch_stale_after: null config") != FG_OK)
        return FG_ERR_ARGUMENT;
    cfg->cfg.watch_stale_after_s = seconds;
    return FG_OK;
}

fg_status fg_run_config_set_watch_once(fg_run_config* cfg, int once) {
    if (require(cfg != nullptr, "fg_run_config_set_watch_once: null config") != FG_OK)
        return FG_ERR_ARGUMENT;
    cfg->cfg.watch_once = once != 0;
    return FG_OK;
}

fg_status fg_run_flag(const fg_run_config* cfg, int* out_any_flagged) {
    if (require(cfg != nullptr, "fg_run_flag: null config") != FG_OK)
        return FG_ERR_ARGUMENT;
    return guarded([&] {
        const RunSummary summary = run_flag(cfg->cfg);
        if (out_any_flagged)
            *out_any_flagged = summary.any_flagged ? 1 : 0;
    });
}

fg_status fg_run_ensemble(const fg_run_config* cfg) {
    if (require(cfg != nullptr, "fg_run_ensemble: null config") != FG_OK)
        return FG_ERR_ARGUMENT;
    return guarded([&] { run_ensemble(cfg->cfg); });
}

fg_status fg_run_evaluate(const fg_run_config* cfg) {
    if (require(cfg != nullptr, "fg_run_evaluate: null config") != FG_OK)
        return FG_ERR_ARGUMENT;
    return guarded([&] { run_evaluate(cfg->cfg); });
}

fg_status fg_run_watch(const fg_run_config* cfg, int* out_any_flagged) {
    if (require(cfg != nullptr, "fg_run_watch: null config") != FG_OK)
        return FG_ERR_ARGUMENT;
    return guarded([&] {
        const RunSummary summary = run_watch(cfg->cfg);
        if (out_any_flagged)
            *out_any_flagged = summary.any_flagged ? 1 : 0;
    });
}

/* ---- synthetic cohorts ---- */

fg_synth_config* fg_synth_config_new(void) { return new (std::nothrow) fg_synth_config(); }

void fg_synth_config_free(fg_synth_config* cfg) { delete cfg; }

fg_status fg_synth_config_set_cases(fg_synth_config* cfg, int64_t n_cases) {
    if (require(cfg != nullptr, "fg_synth_config_set_cases: null config") != FG_OK)
        return FG_ERR_ARGUMENT;
    cfg->cfg.n_cases = n_cases;
    return FG_OK;
}

fg_status fg_synth_config_set_folds(fg_synth_config* cfg, int32_t k_folds) {
    if (require(cfg != nullptr, "fg_synth_config_set_folds: null config") != FG_OK)
        return FG_ERR_ARGUMENT;
    cfg->cfg.k_folds = k_folds;
    return FG_OK;
}

fg_status fg_synth_config_set_seed(fg_synth_config* cfg, uint64_t seed) {
    if (require(cfg != nullptr, "fg_synth_config_set_seed: null config") != FG_OK)
        return FG_ERR_ARGUMENT;
    cfg->cfg.seed = seed;
    return FG_OK;
}

fg_status fg_synth_config_set_dims(fg_synth_config* cfg, const int64_t dims[3]) {
    if (require(cfg && dims, "fg_synth_config_set_dims: null argument") != FG_OK)
        return FG_ERR_ARGUMENT;
    for (int i = 0; i < 3; ++i)
        cfg->cfg.dims[static_cast<std::size_t>(i)] = dims[i];
    return FG_OK;
}

fg_status fg_synth_config_set_spacing(fg_synth_config* cfg, const double spacing[3]) {
    if (require(cfg && spacing, "fg_synth_config_set_spacing: null argument") != FG_OK)
        return FG_ERR_ARGUMENT;
    for (int i = 0; i < 3; ++i)
        cfg->cfg.spacing[static_cast<std::size_t>(i)] = spacing[i];
    return FG_OK;
}

fg_status fg_synth_config_set_radii(fg_synth_config* cfg, double radii_min, double radii_max) {
    if (require(cfg != nullptr, "fg_synth_config_set_radii: null config") != FG_OK)
        return FG_ERR_ARGUMENT;
    cfg->cfg.radii_min = radii_min;
    cfg->cfg.radii_max = radii_max;
    return FG_OK;
}

fg_status fg_synth_config_set_disagreement(fg_synth_config* cfg, double d) {
    if (require(cfg != nullptr, "fg_synth_config_set_disagreement: null config") != FG_OK)
        return FG_ERR_ARGUMENT;
    cfg->cfg.disagreement = d;
    return FG_OK;
}

fg_status fg_synth_config_set_reference_noise(fg_synth_config* cfg, double r) {
    if (require(cfg != nullptr, "fg_synth_config_set_reference_noise: null config") != FG_OK)
        return FG_ERR_ARGUMENT;
    cfg->cfg.reference_noise = r;
    return FG_OK;
}

fg_status fg_synth_config_set_prefix(fg_synth_config* cfg, const char* prefix) {
    if (require(cfg && prefix, "fg_synth_config_set_prefix: null argument") != FG_OK)
        return FG_ERR_ARGUMENT;
    cfg->cfg.case_prefix = prefix;
    return FG_OK;
}

fg_status fg_run_synth(const fg_synth_config* cfg, const char* out_dir) {
    if (require(cfg && out_dir, "fg_run_synth: null argument") != FG_OK)
        return FG_ERR_ARGUMENT;
    return guarded([&] { generate_cohort(cfg->cfg, out_dir); });
}

} /* extern "C" */
