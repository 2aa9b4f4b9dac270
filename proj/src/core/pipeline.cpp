#include "core/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <exception>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "core/atomic_io.hpp"
#include "core/ensemble.hpp"
#include "core/errors.hpp"
#include "core/evaluation.hpp"
#include "core/log.hpp"
#include "core/manifest.hpp"
#include "core/metrics.hpp"

namespace foldgate {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::string fmt6(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

// Reports carry floats rounded to 6 decimals so repeated runs serialize
// byte-identically.
double round6(double v) {
    if (!std::isfinite(v))
        return v;
    return static_cast<double>(std::llround(v * 1e6)) / 1e6;
}

const char* bool_str(bool b) { return b ? "true" : "false"; }

struct CaseWork {
    fs::path path;
    CaseManifest manifest;
};

std::vector<CaseWork> collect_cases(const RunConfig& cfg) {
    std::vector<fs::path> paths;
    if (cfg.manifest_path && cfg.cohort_dir)
        throw ValidationError("input: give a manifest file or a cohort directory, not both");
    if (cfg.manifest_path) {
        paths.push_back(*cfg.manifest_path);
    } else if (cfg.cohort_dir) {
        paths = list_cohort(*cfg.cohort_dir);
        if (paths.empty())
            throw ValidationError("cohort: no *.manifest.json files in " +
                                  cfg.cohort_dir->string());
    } else {
        throw ValidationError("input: give a manifest file or a cohort directory");
    }

    std::vector<CaseWork> work;
    work.reserve(paths.size());
    for (const auto& p : paths)
        work.push_back({p, parse_manifest(p)});
    std::sort(work.begin(), work.end(), [](const CaseWork& a, const CaseWork& b) {
        return a.manifest.case_id < b.manifest.case_id;
    });
    for (std::size_t i = 1; i < work.size(); ++i) {
        if (work[i].manifest.case_id == work[i - 1].manifest.case_id)
            throw ValidationError("cohort: duplicate case_id '" + work[i].manifest.case_id +
                                  "' (" + work[i - 1].path.string() + " and " +
                                  work[i].path.string() + ")");
    }
    return work;
}

void ensure_out_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
        throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
}

// Dense index claiming keeps the error order deterministic: when several
// cases fail, the one with the lowest sorted index wins regardless of
// thread timing, so jobs=1 and jobs=N report the same failure.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
    const std::size_t workers =
        std::min<std::size_t>(static_cast<std::size_t>(std::max(1, jobs)), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i)
            fn(i);
        return;
    }

    std::atomic<std::size_t> next{0};
    std::atomic<bool> stop{false};
    std::mutex error_mutex;
    std::vector<std::pair<std::size_t, std::exception_ptr>> errors;

    auto body = [&] {
        while (!stop.load(std::memory_order_relaxed)) {
            const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
            if (i >= n)
                return;
            try {
                fn(i);
            } catch (...) {
                const std::lock_guard<std::mutex> lock(error_mutex);
                errors.emplace_back(i, std::current_exception());
                stop.store(true, std::memory_order_relaxed);
            }
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back(body);
    for (auto& t : pool)
        t.join();

    if (!errors.empty()) {
        const auto first = std::min_element(
            errors.begin(), errors.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
        std::rethrow_exception(first->second);
    }
}

std::string label_name(const std::map<std::int32_t, std::string>& label_map, std::int32_t id) {
    const auto it = label_map.find(id);
    return it == label_map.end() ? std::to_string(id) : it->second;
}

ordered_json summary_json(const SummaryStats& s) {
    ordered_json j;
    j["min"] = round6(s.min);
    j["mean"] = round6(s.mean);
    j["median"] = round6(s.median);
    j["max"] = round6(s.max);
    return j;
}

// Per-label decision rows shared by the decision files and the watch log.
ordered_json decision_labels_json(const FlagDecision& decision,
                                  const std::map<std::int32_t, std::string>& label_map) {
    ordered_json labels = ordered_json::array();
    for (const auto& lf : decision.labels) {
        ordered_json j;
        j["label"] = lf.label;
        j["name"] = label_name(label_map, lf.label);
        j["statistic"] = statistic_name(lf.statistic);
        j["value"] = round6(lf.value);
        j["threshold"] = round6(lf.threshold);
        j["flagged"] = lf.flagged;
        labels.push_back(std::move(j));
    }
    return labels;
}

struct FlaggedCase {
    FlagDecision decision;
    std::map<std::int32_t, InterfoldScores> scores;
    std::map<std::int32_t, SummaryStats> stats;
    std::map<std::int32_t, std::string> label_map;
};

FlaggedCase flag_one_case(const CaseManifest& manifest, const CasePrediction& pred,
                          const ThresholdPolicy& policy) {
    const ResolvedPolicy resolved = resolve_policy(policy, pred.label_map);
    FlaggedCase out;
    out.label_map = pred.label_map;
    for (const auto& [label, threshold] : resolved.thresholds) {
        (void)threshold;
        InterfoldScores s = interfold_dices(pred.fold_labels, label);
        out.stats[label] = summarize(s);
        out.scores[label] = std::move(s);
    }
    out.decision = decide_flag(manifest.case_id, out.stats, resolved);
    return out;
}

void write_decision_file(const fs::path& out_dir, const CaseManifest& manifest,
                         const FlaggedCase& fc) {
    ordered_json doc;
    doc["case_id"] = fc.decision.case_id;
    doc["k"] = manifest.k();
    doc["flagged"] = fc.decision.case_flagged;
    ordered_json labels = ordered_json::array();
    for (const auto& lf : fc.decision.labels) {
        ordered_json j;
        j["label"] = lf.label;
        j["name"] = label_name(fc.label_map, lf.label);
        ordered_json scores = ordered_json::array();
        for (double s : fc.scores.at(lf.label).scores)
            scores.push_back(round6(s));
        j["interfold_dice"] = std::move(scores);
        j["summary"] = summary_json(fc.stats.at(lf.label));
        j["statistic"] = statistic_name(lf.statistic);
        j["value"] = round6(lf.value);
        j["threshold"] = round6(lf.threshold);
        j["flagged"] = lf.flagged;
        labels.push_back(std::move(j));
    }
    doc["labels"] = std::move(labels);
    write_text_atomic(out_dir / (fc.decision.case_id + ".decision.json"), doc.dump(2) + "\n");
}

std::string decisions_csv_row(const FlagDecision& decision) {
    std::string rows;
    for (const auto& lf : decision.labels) {
        rows += decision.case_id;
        rows += ',';
        rows += std::to_string(lf.label);
        rows += ',';
        rows += statistic_name(lf.statistic);
        rows += ',';
        rows += fmt6(lf.value);
        rows += ',';
        rows += fmt6(lf.threshold);
        rows += ',';
        rows += bool_str(lf.flagged);
        rows += '\n';
    }
    return rows;
}

} // namespace

RunSummary run_flag(const RunConfig& cfg) {
    if (cfg.jobs < 1)
        throw ValidationError("jobs must be >= 1, got " + std::to_string(cfg.jobs));
    const ThresholdPolicy policy = load_policy(cfg.policy_path);
    const std::vector<CaseWork> work = collect_cases(cfg);
    ensure_out_dir(cfg.out_dir);

    std::vector<FlagDecision> decisions(work.size());
    parallel_for(work.size(), cfg.jobs, [&](std::size_t i) {
        const CaseWork& w = work[i];
        const CasePrediction pred = load_case(w.manifest, {.include_probabilities = false});
        FlaggedCase fc = flag_one_case(w.manifest, pred, policy);
        write_decision_file(cfg.out_dir, w.manifest, fc);
        decisions[i] = std::move(fc.decision);
    });

    std::string csv = "case_id,label,statistic,value,threshold,flagged\n";
    RunSummary summary;
    summary.n_cases = static_cast<std::int64_t>(work.size());
    for (const auto& d : decisions) {
        csv += decisions_csv_row(d);
        summary.any_flagged = summary.any_flagged || d.case_flagged;
    }
    write_text_atomic(cfg.out_dir / "decisions.csv", csv);
    log::info("flag: " + std::to_string(summary.n_cases) + " case(s), any_flagged=" +
              bool_str(summary.any_flagged));
    return summary;
}

namespace {

EnsembleResult ensemble_case(const CasePrediction& pred) {
    std::size_t with_probs = 0;
    for (const auto& p : pred.fold_probabilities)
        if (p)
            ++with_probs;
    if (with_probs == pred.fold_labels.size()) {
        std::vector<ProbabilityVolume> probs;
        probs.reserve(with_probs);
        for (const auto& p : pred.fold_probabilities)
            probs.push_back(*p);
        return ensemble_softmax(probs);
    }
    if (with_probs == 0)
        return majority_vote(pred.fold_labels);
    throw ValidationError("case '" + pred.case_id + "': " + std::to_string(with_probs) + " of " +
                          std::to_string(pred.fold_labels.size()) +
                          " folds have probability volumes; need all or none");
}

} // namespace

RunSummary run_ensemble(const RunConfig& cfg) {
    if (cfg.jobs < 1)
        throw ValidationError("jobs must be >= 1, got " + std::to_string(cfg.jobs));
    const std::vector<CaseWork> work = collect_cases(cfg);
    ensure_out_dir(cfg.out_dir);

    parallel_for(work.size(), cfg.jobs, [&](std::size_t i) {
        const CaseWork& w = work[i];
        const CasePrediction pred = load_case(w.manifest);
        const EnsembleResult result = ensemble_case(pred);

        const fs::path volume_path = cfg.out_dir / (pred.case_id + ".ensemble.nii");
        write_label_volume_atomic(result.labels, volume_path);

        ordered_json sidecar;
        sidecar["case_id"] = pred.case_id;
        sidecar["method"] = ensemble_method_name(result.method);
        sidecar["k"] = w.manifest.k();
        sidecar["volume_path"] = volume_path.filename().string();
        write_text_atomic(cfg.out_dir / (pred.case_id + ".ensemble.json"),
                          sidecar.dump(2) + "\n");
    });

    RunSummary summary;
    summary.n_cases = static_cast<std::int64_t>(work.size());
    log::info("ensemble: wrote " + std::to_string(summary.n_cases) + " prediction(s)");
    return summary;
}

namespace {

struct EvaluatedCase {
    FlagDecision decision;
    ResolvedPolicy resolved;
    std::map<std::int32_t, std::string> label_map;
    std::map<std::int32_t, SummaryStats> stats;
    std::map<std::int32_t, double> ensemble_dice;
};

std::string cohort_csv_cell(const std::optional<double>& v) {
    return v ? fmt6(*v) : std::string();
}

ordered_json cohort_json(const CohortSummary& s) {
    ordered_json j;
    j["n_flagged"] = s.n_flagged;
    if (s.flagged_mean) {
        j["flagged_mean"] = round6(*s.flagged_mean);
        j["flagged_std"] = round6(*s.flagged_std);
    }
    j["n_unflagged"] = s.n_unflagged;
    if (s.unflagged_mean) {
        j["unflagged_mean"] = round6(*s.unflagged_mean);
        j["unflagged_std"] = round6(*s.unflagged_std);
    }
    j["overall_mean"] = round6(s.overall_mean);
    j["overall_std"] = round6(s.overall_std);
    if (s.removal_delta)
        j["removal_delta"] = round6(*s.removal_delta);
    return j;
}

} // namespace

RunSummary run_evaluate(const RunConfig& cfg) {
    if (cfg.jobs < 1)
        throw ValidationError("jobs must be >= 1, got " + std::to_string(cfg.jobs));
    if (cfg.perf_threshold && (*cfg.perf_threshold < 0.0 || *cfg.perf_threshold > 1.0))
        throw ValidationError("perf-threshold must be in [0,1], got " +
                              std::to_string(*cfg.perf_threshold));
    const ThresholdPolicy policy = load_policy(cfg.policy_path);
    const std::vector<CaseWork> work = collect_cases(cfg);
    for (const auto& w : work)
        if (!w.manifest.reference_path)
            throw ValidationError("evaluate: manifest lacks a reference_path: " +
                                  w.path.string());
    ensure_out_dir(cfg.out_dir);

    std::vector<EvaluatedCase> cases(work.size());
    parallel_for(work.size(), cfg.jobs, [&](std::size_t i) {
        const CaseWork& w = work[i];
        const CasePrediction pred = load_case(w.manifest);
        EvaluatedCase ec;
        ec.resolved = resolve_policy(policy, pred.label_map);
        ec.label_map = pred.label_map;

        FlaggedCase fc = flag_one_case(w.manifest, pred, policy);
        ec.decision = std::move(fc.decision);
        ec.stats = std::move(fc.stats);

        const EnsembleResult result = ensemble_case(pred);
        for (const auto& [label, threshold] : ec.resolved.thresholds) {
            (void)threshold;
            ec.ensemble_dice[label] = dice(result.labels, *pred.reference, label);
        }
        cases[i] = std::move(ec);
    });

    // One policy resolution must hold across the cohort, otherwise the same
    // CSV row would mix labels that mean different things per case.
    for (std::size_t i = 1; i < cases.size(); ++i) {
        if (cases[i].resolved.thresholds != cases.front().resolved.thresholds)
            throw ValidationError("evaluate: case '" + cases[i].decision.case_id +
                                  "' resolves the policy differently from case '" +
                                  cases.front().decision.case_id + "'");
    }

    RunSummary summary;
    summary.n_cases = static_cast<std::int64_t>(cases.size());
    for (const auto& c : cases)
        summary.any_flagged = summary.any_flagged || c.decision.case_flagged;

    const ResolvedPolicy& resolved = cases.front().resolved;
    const auto& names = cases.front().label_map;

    std::string confusion_csv = "label,tp,tn,fp,fn\n";
    std::string cohorts_csv = "label,statistic,n_flagged,flagged_mean,flagged_std,"
                              "n_unflagged,unflagged_mean,unflagged_std\n";

    ordered_json report;
    report["n_cases"] = summary.n_cases;
    report["statistic"] = statistic_name(resolved.statistic);
    ordered_json report_labels = ordered_json::array();

    std::map<Statistic, std::vector<ScatterRow>> scatter_rows;

    for (const auto& [label, threshold] : resolved.thresholds) {
        const double perf_threshold = cfg.perf_threshold.value_or(threshold);

        std::vector<EvaluationRecord> records;
        records.reserve(cases.size());
        std::vector<CaseLabelResult> results;
        results.reserve(cases.size());
        for (const auto& c : cases) {
            const SummaryStats& stats = c.stats.at(label);
            const double value = select_stat(stats, resolved.statistic);
            const bool flagged = value < threshold;
            records.push_back(make_record(c.decision.case_id, label, flagged,
                                          c.ensemble_dice.at(label), perf_threshold));
            CaseLabelResult r;
            r.case_id = c.decision.case_id;
            r.label = label;
            r.stats = stats;
            r.ensemble_dice = c.ensemble_dice.at(label);
            results.push_back(std::move(r));
        }

        const ConfusionMatrix cm = confusion_matrix(records);
        confusion_csv += std::to_string(label) + ',' + std::to_string(cm.tp) + ',' +
                         std::to_string(cm.tn) + ',' + std::to_string(cm.fp) + ',' +
                         std::to_string(cm.fn) + '\n';

        ordered_json label_json;
        label_json["label"] = label;
        label_json["name"] = label_name(names, label);
        label_json["threshold"] = round6(threshold);
        label_json["perf_threshold"] = round6(perf_threshold);
        ordered_json confusion_json;
        confusion_json["tp"] = cm.tp;
        confusion_json["tn"] = cm.tn;
        confusion_json["fp"] = cm.fp;
        confusion_json["fn"] = cm.fn;
        label_json["confusion"] = std::move(confusion_json);

        ordered_json stat_json;
        for (const Statistic stat : kAllStatistics) {
            std::vector<EvaluationRecord> stat_records;
            stat_records.reserve(cases.size());
            for (const auto& c : cases) {
                const double value = select_stat(c.stats.at(label), stat);
                stat_records.push_back(make_record(c.decision.case_id, label, value < threshold,
                                                   c.ensemble_dice.at(label), perf_threshold));
            }
            const CohortSummary cs = cohort_summary(stat_records);
            cohorts_csv += std::to_string(label) + ',';
            cohorts_csv += statistic_name(stat);
            cohorts_csv += ',' + std::to_string(cs.n_flagged) + ',' +
                           cohort_csv_cell(cs.flagged_mean) + ',' +
                           cohort_csv_cell(cs.flagged_std) + ',' +
                           std::to_string(cs.n_unflagged) + ',' +
                           cohort_csv_cell(cs.unflagged_mean) + ',' +
                           cohort_csv_cell(cs.unflagged_std) + '\n';
            stat_json[std::string(statistic_name(stat))] = cohort_json(cs);

            auto rows = scatter_table(results, stat);
            auto& bucket = scatter_rows[stat];
            bucket.insert(bucket.end(), std::make_move_iterator(rows.begin()),
                          std::make_move_iterator(rows.end()));
        }
        label_json["statistics"] = std::move(stat_json);
        report_labels.push_back(std::move(label_json));
    }
    report["labels"] = std::move(report_labels);

    write_text_atomic(cfg.out_dir / "confusion.csv", confusion_csv);
    write_text_atomic(cfg.out_dir / "cohorts.csv", cohorts_csv);
    for (const Statistic stat : kAllStatistics) {
        auto& rows = scatter_rows[stat];
        std::sort(rows.begin(), rows.end(), [](const ScatterRow& a, const ScatterRow& b) {
            if (a.case_id != b.case_id)
                return a.case_id < b.case_id;
            return a.label < b.label;
        });
        std::string csv = "case_id,label,ensemble_dice,stat_value\n";
        for (const auto& row : rows) {
            csv += row.case_id;
            csv += ',' + std::to_string(row.label) + ',' + fmt6(row.ensemble_dice) + ',' +
                   fmt6(row.stat_value) + '\n';
        }
        write_text_atomic(cfg.out_dir /
                              ("scatter_" + std::string(statistic_name(stat)) + ".csv"),
                          csv);
    }
    write_text_atomic(cfg.out_dir / "report.json", report.dump(2) + "\n");

    log::info("evaluate: " + std::to_string(summary.n_cases) + " case(s)");
    return summary;
}

namespace {

std::string iso8601_utc_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

class WatchLog {
public:
    explicit WatchLog(const fs::path& path) : out_(path, std::ios::app) {
        if (!out_)
            throw IoError("watch: cannot open log " + path.string());
        path_ = path;
    }

    void append(const ordered_json& record) {
        out_ << record.dump() << '\n';
        out_.flush();
        if (!out_)
            throw IoError("watch: append failed: " + path_.string());
    }

private:
    std::ofstream out_;
    fs::path path_;
};

bool rename_quiet(const fs::path& from, const fs::path& to) {
    std::error_code ec;
    fs::rename(from, to, ec);
    return !ec;
}

} // namespace

RunSummary run_watch(const RunConfig& cfg) {
    if (!cfg.cohort_dir)
        throw ValidationError("watch: give the inbox directory via --cohort");
    if (cfg.manifest_path)
        throw ValidationError("watch: --manifest is not meaningful here, use --cohort");
    if (!(cfg.watch_interval_s > 0.0))
        throw ValidationError("watch: interval must be > 0");
    if (!(cfg.watch_stale_after_s > 0.0))
        throw ValidationError("watch: stale-after must be > 0");
    std::error_code ec;
    if (!fs::is_directory(*cfg.cohort_dir, ec) || ec)
        throw ValidationError("watch: inbox is not a directory: " + cfg.cohort_dir->string());
    if (!fs::is_directory(cfg.out_dir, ec) || ec)
        throw ValidationError("watch: output is not a directory: " + cfg.out_dir.string());

    const ThresholdPolicy policy = load_policy(cfg.policy_path);
    const fs::path inbox = *cfg.cohort_dir;
    WatchLog watch_log(cfg.out_dir / "watch.jsonl");

    RunSummary summary;
    const auto stale_after = std::chrono::duration_cast<fs::file_time_type::duration>(
        std::chrono::duration<double>(cfg.watch_stale_after_s));

    const auto reclaim_stale = [&] {
        std::error_code list_ec;
        for (const auto& entry : fs::directory_iterator(inbox, list_ec)) {
            if (!entry.is_regular_file())
                continue;
            const std::string name = entry.path().filename().string();
            if (!name.ends_with(".manifest.json.processing"))
                continue;
            std::error_code time_ec;
            const auto mtime = fs::last_write_time(entry.path(), time_ec);
            if (time_ec)
                continue;
            if (fs::file_time_type::clock::now() - mtime < stale_after)
                continue;
            const fs::path back = entry.path().parent_path() /
                                  name.substr(0, name.size() - std::string(".processing").size());
            if (rename_quiet(entry.path(), back))
                log::warn("watch: reclaimed stale claim " + entry.path().string());
        }
    };

    const auto process_one = [&](const fs::path& manifest_path) {
        const fs::path claimed = manifest_path.string() + ".processing";
        if (!rename_quiet(manifest_path, claimed))
            return; // someone else claimed it between listing and renaming
        std::error_code touch_ec;
        fs::last_write_time(claimed, fs::file_time_type::clock::now(), touch_ec);

        ordered_json record;
        bool failed = false;
        try {
            const CaseManifest manifest = parse_manifest(claimed);
            const CasePrediction pred = load_case(manifest, {.include_probabilities = false});
            const FlaggedCase fc = flag_one_case(manifest, pred, policy);
            record["timestamp"] = iso8601_utc_now();
            record["case_id"] = fc.decision.case_id;
            record["decisions"] = decision_labels_json(fc.decision, fc.label_map);
            record["flagged"] = fc.decision.case_flagged;
            summary.any_flagged = summary.any_flagged || fc.decision.case_flagged;
        } catch (const std::exception& e) {
            failed = true;
            record = ordered_json();
            record["timestamp"] = iso8601_utc_now();
            record["manifest"] = manifest_path.filename().string();
            record["error"] = e.what();
            log::warn("watch: " + manifest_path.filename().string() + ": " + e.what());
        }

        try {
            watch_log.append(record);
        } catch (...) {
            // The log itself is broken; release the claim so another watcher
            // (or a restart) still sees the case.
            rename_quiet(claimed, manifest_path);
            throw;
        }
        if (!failed)
            summary.n_cases += 1;
        if (!rename_quiet(claimed, manifest_path.string() + (failed ? ".failed" : ".done")))
            log::warn("watch: cannot release claim: " + claimed.string());
    };

    log::info("watch: polling " + inbox.string() + " every " +
              std::to_string(cfg.watch_interval_s) + "s");
    while (true) {
        reclaim_stale();
        std::vector<fs::path> pending;
        std::error_code list_ec;
        for (const auto& entry : fs::directory_iterator(inbox, list_ec)) {
            if (entry.is_regular_file() &&
                entry.path().filename().string().ends_with(".manifest.json"))
                pending.push_back(entry.path());
        }
        if (list_ec)
            throw IoError("watch: cannot list inbox " + inbox.string() + ": " +
                          list_ec.message());
        std::sort(pending.begin(), pending.end());
        for (const auto& p : pending)
            process_one(p);
        if (cfg.watch_once)
            break;
        std::this_thread::sleep_for(std::chrono::duration<double>(cfg.watch_interval_s));
    }
    return summary;
}

} // namespace foldgate
