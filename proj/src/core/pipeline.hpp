#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>

#include "core/flagging.hpp"

namespace foldgate {

struct RunConfig {
    std::optional<std::filesystem::path> manifest_path; // single case
    std::optional<std::filesystem::path> cohort_dir;    // directory of *.manifest.json
    std::filesystem::path policy_path;
    std::optional<double> perf_threshold; // defaults to the flag threshold per label
    std::filesystem::path out_dir;
    int jobs = 1;
    double watch_interval_s = 2.0;
    double watch_stale_after_s = 300.0;
    bool watch_once = false;
};

struct RunSummary {
    std::int64_t n_cases = 0;
    bool any_flagged = false;
};

/// Writes <case_id>.decision.json per case and decisions.csv for the cohort.
RunSummary run_flag(const RunConfig& cfg);

/// Writes <case_id>.ensemble.nii plus a method sidecar per case. Folds with
/// probability volumes are softmax-averaged; labels-only cases fall back to
/// majority vote; mixed availability within one case is an error.
RunSummary run_ensemble(const RunConfig& cfg);

/// Joins flag decisions with ensemble-vs-reference Dice. Writes
/// confusion.csv, cohorts.csv, scatter_<stat>.csv for each of the four
/// statistics, and report.json. Every manifest needs a reference.
RunSummary run_evaluate(const RunConfig& cfg);

/// Polls cohort_dir as an inbox. Manifests are claimed by renaming to
/// .processing, appended to out_dir/watch.jsonl, then renamed to .done
/// (.failed on error). Stale .processing files are reclaimed. With
/// watch_once, a single scan pass is performed instead of looping.
RunSummary run_watch(const RunConfig& cfg);

} // namespace foldgate
