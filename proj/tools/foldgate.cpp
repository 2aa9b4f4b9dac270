// foldgate CLI. Talks to the library exclusively through the C API so the
// shared library stays the single supported integration surface.

#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "foldgate/foldgate.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitIo = 1;
constexpr int kExitValidation = 2;
constexpr int kExitFlagged = 10;

int exit_code_for(fg_status status) {
    switch (status) {
    case FG_OK: return kExitOk;
    case FG_ERR_IO: return kExitIo;
    case FG_ERR_VALIDATION: return kExitValidation;
    case FG_ERR_ARGUMENT: return kExitValidation;
    case FG_ERR_INTERNAL: return kExitIo;
    }
    return kExitIo;
}

int report(fg_status status) {
    if (status != FG_OK)
        std::fprintf(stderr, "foldgate: %s\n", fg_last_error());
    return exit_code_for(status);
}

struct RunOptions {
    std::string manifest;
    std::string cohort;
    std::string policy;
    std::string out;
    double perf_threshold = -1.0;
    bool has_perf_threshold = false;
    int jobs = 1;
    double interval = 2.0;
    double stale_after = 300.0;
    bool once = false;
    bool fail_on_flag = false;
};

struct ConfigHandle {
    fg_run_config* cfg = fg_run_config_new();
    ~ConfigHandle() { fg_run_config_free(cfg); }
    ConfigHandle(const ConfigHandle&) = delete;
    ConfigHandle& operator=(const ConfigHandle&) = delete;
    ConfigHandle() = default;
};

fg_status apply(const RunOptions& opt, fg_run_config* cfg) {
    fg_status s = FG_OK;
    if (s == FG_OK && !opt.manifest.empty())
        s = fg_run_config_set_manifest(cfg, opt.manifest.c_str());
    if (s == FG_OK && !opt.cohort.empty())
        s = fg_run_config_set_cohort(cfg, opt.cohort.c_str());
    if (s == FG_OK && !opt.policy.empty())
        s = fg_run_config_set_policy(cfg, opt.policy.c_str());
    if (s == FG_OK && !opt.out.empty())
        s = fg_run_config_set_out(cfg, opt.out.c_str());
    if (s == FG_OK && opt.has_perf_threshold)
        s = fg_run_config_set_perf_threshold(cfg, opt.perf_threshold);
    if (s == FG_OK)
        s = fg_run_config_set_jobs(cfg, opt.jobs);
    if (s == FG_OK)
        s = fg_run_config_set_watch_interval(cfg, opt.interval);
    if (s == FG_OK)
        s = fg_run_config_set_watch_stale_after(cfg, opt.stale_after);
    if (s == FG_OK)
        s = fg_run_config_set_watch_once(cfg, opt.once ? 1 : 0);
    return s;
}

void add_input_flags(CLI::App* cmd, RunOptions& opt) {
    cmd->add_option("--manifest", opt.manifest, "Single case manifest (JSON)");
    cmd->add_option("--cohort", opt.cohort, "Directory of *.manifest.json");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"foldgate " FG_VERSION_STRING
                 ": flags segmentation predictions whose cross-validation folds disagree"};
    app.require_subcommand(1);
    app.set_version_flag("--version", FG_VERSION_STRING);

    RunOptions opt;

    CLI::App* flag = app.add_subcommand(
        "flag", "Compute interfold Dice per case and apply the threshold policy");
    add_input_flags(flag, opt);
    flag->add_option("--policy", opt.policy, "Threshold policy JSON")->required();
    flag->add_option("--out", opt.out, "Output directory")->required();
    flag->add_option("--jobs", opt.jobs, "Cases processed in parallel")
        ->check(CLI::PositiveNumber);
    flag->add_flag("--fail-on-flag", opt.fail_on_flag,
                   "Exit with code 10 when any case is flagged");

    CLI::App* ensemble =
        app.add_subcommand("ensemble", "Combine fold predictions into one ensemble mask");
    add_input_flags(ensemble, opt);
    ensemble->add_option("--out", opt.out, "Output directory")->required();
    ensemble->add_option("--jobs", opt.jobs, "Cases processed in parallel")
        ->check(CLI::PositiveNumber);

    CLI::App* evaluate = app.add_subcommand(
        "evaluate", "Join flag decisions with ensemble-vs-reference Dice (references required)");
    add_input_flags(evaluate, opt);
    evaluate->add_option("--policy", opt.policy, "Threshold policy JSON")->required();
    evaluate->add_option("--out", opt.out, "Output directory")->required();
    evaluate
        ->add_option("--perf-threshold", opt.perf_threshold,
                     "Dice below which the ensemble counts as poor (default: flag threshold)")
        ->check(CLI::Range(0.0, 1.0));
    evaluate->add_option("--jobs", opt.jobs, "Cases processed in parallel")
        ->check(CLI::PositiveNumber);

    CLI::App* watch = app.add_subcommand(
        "watch", "Poll an inbox of manifests and append decisions to watch.jsonl");
    watch->add_option("--cohort", opt.cohort, "Inbox directory to poll")->required();
    watch->add_option("--policy", opt.policy, "Threshold policy JSON")->required();
    watch->add_option("--out", opt.out, "Output directory (must exist)")->required();
    watch->add_option("--interval", opt.interval, "Poll interval in seconds")
        ->check(CLI::PositiveNumber);
    watch->add_option("--stale-after", opt.stale_after,
                      "Seconds before an abandoned .processing claim is requeued")
        ->check(CLI::PositiveNumber);
    watch->add_flag("--once", opt.once, "Run a single scan pass and exit");
    watch->add_flag("--fail-on-flag", opt.fail_on_flag,
                    "Exit with code 10 when any case was flagged (with --once)");

    std::int64_t synth_cases = 20;
    std::int32_t synth_folds = 5;
    std::uint64_t synth_seed = 0;
    std::vector<std::int64_t> synth_dims;
    std::vector<double> synth_spacing;
    std::vector<double> synth_radii;
    double synth_disagreement = 0.8;
    double synth_ref_noise = 0.05;
    std::string synth_prefix = "case";

    CLI::App* synth = app.add_subcommand(
        "synth", "Generate a deterministic synthetic cohort (ellipsoids + boundary noise)");
    synth->add_option("--out", opt.out, "Cohort directory to create")->required();
    synth->add_option("--cases", synth_cases, "Number of cases");
    synth->add_option("--folds", synth_folds, "Folds per case");
    synth->add_option("--seed", synth_seed, "Generator seed");
    synth->add_option("--dims", synth_dims, "Grid size, 3 values")->expected(3);
    synth->add_option("--spacing", synth_spacing, "Voxel spacing in mm, 3 values")->expected(3);
    synth->add_option("--radii", synth_radii, "Ellipsoid radius range in voxels, 2 values")
        ->expected(2);
    synth->add_option("--disagreement", synth_disagreement,
                      "Boundary flip probability of the last case (ramped from 0)");
    synth->add_option("--ref-noise", synth_ref_noise, "Boundary flip probability of the reference");
    synth->add_option("--prefix", synth_prefix, "Case id prefix");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitValidation;
    }
    opt.has_perf_threshold = evaluate->count("--perf-threshold") > 0;

    if (synth->parsed()) {
        fg_synth_config* cfg = fg_synth_config_new();
        if (!cfg) {
            std::fprintf(stderr, "foldgate: out of memory\n");
            return kExitIo;
        }
        fg_status s = fg_synth_config_set_cases(cfg, synth_cases);
        if (s == FG_OK)
            s = fg_synth_config_set_folds(cfg, synth_folds);
        if (s == FG_OK)
            s = fg_synth_config_set_seed(cfg, synth_seed);
        if (s == FG_OK && !synth_dims.empty())
            s = fg_synth_config_set_dims(cfg, synth_dims.data());
        if (s == FG_OK && !synth_spacing.empty())
            s = fg_synth_config_set_spacing(cfg, synth_spacing.data());
        if (s == FG_OK && !synth_radii.empty())
            s = fg_synth_config_set_radii(cfg, synth_radii[0], synth_radii[1]);
        if (s == FG_OK)
            s = fg_synth_config_set_disagreement(cfg, synth_disagreement);
        if (s == FG_OK)
            s = fg_synth_config_set_reference_noise(cfg, synth_ref_noise);
        if (s == FG_OK)
            s = fg_synth_config_set_prefix(cfg, synth_prefix.c_str());
        if (s == FG_OK)
            s = fg_run_synth(cfg, opt.out.c_str());
        fg_synth_config_free(cfg);
        return report(s);
    }

    ConfigHandle handle;
    if (!handle.cfg) {
        std::fprintf(stderr, "foldgate: out of memory\n");
        return kExitIo;
    }
    fg_status s = apply(opt, handle.cfg);
    if (s != FG_OK)
        return report(s);

    int any_flagged = 0;
    if (flag->parsed())
        s = fg_run_flag(handle.cfg, &any_flagged);
    else if (ensemble->parsed())
        s = fg_run_ensemble(handle.cfg);
    else if (evaluate->parsed())
        s = fg_run_evaluate(handle.cfg);
    else if (watch->parsed())
        s = fg_run_watch(handle.cfg, &any_flagged);

    const int rc = report(s);
    if (rc == kExitOk && opt.fail_on_flag && any_flagged)
        return kExitFlagged;
    return rc;
}
