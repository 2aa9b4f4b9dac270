#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "core/metrics.hpp"

namespace foldgate {

/// Confusion cell of one (flag decision, ensemble performance) pair.
/// Flagged predictions that performed poorly are true positives.
enum class Cell { TP, TN, FP, FN };

std::string_view cell_name(Cell c);

/// flagged and dice <  threshold -> TP
/// unflagged and dice >= threshold -> TN
/// flagged and dice >= threshold -> FP
/// unflagged and dice <  threshold -> FN
/// "Performed well" includes exact threshold equality.
Cell classify_case(bool flagged, double ensemble_dice, double perf_threshold);

/// One (case, label) pair joined with its ensemble-vs-reference Dice.
struct EvaluationRecord {
    std::string case_id;
    std::int32_t label = 0;
    bool flagged = false;
    double ensemble_dice = 0.0;
    Cell cell = Cell::TN;
};

EvaluationRecord make_record(std::string case_id, std::int32_t label, bool flagged,
                             double ensemble_dice, double perf_threshold);

struct ConfusionMatrix {
    std::int64_t tp = 0;
    std::int64_t tn = 0;
    std::int64_t fp = 0;
    std::int64_t fn = 0;

    [[nodiscard]] std::int64_t total() const { return tp + tn + fp + fn; }
};

/// Counts cells over records of a single label. Throws when records mix
/// labels; an empty span yields all zeros.
ConfusionMatrix confusion_matrix(std::span<const EvaluationRecord> records);

/// Flagged/unflagged cohort means of the ensemble Dice, and the impact of
/// removing the flagged cohort. Standard deviations use the n-1 denominator
/// and are 0 for single-record cohorts; empty cohorts report their mean and
/// std as absent. removal_delta = unflagged mean - overall mean, absent when
/// everything is flagged.
struct CohortSummary {
    std::int64_t n_flagged = 0;
    std::int64_t n_unflagged = 0;
    std::optional<double> flagged_mean;
    std::optional<double> flagged_std;
    std::optional<double> unflagged_mean;
    std::optional<double> unflagged_std;
    double overall_mean = 0.0;
    double overall_std = 0.0;
    std::optional<double> removal_delta;
};

CohortSummary cohort_summary(std::span<const EvaluationRecord> records); // throws on empty

/// Input row for the scatter tables: one case's summary stats and ensemble
/// Dice for one label.
struct CaseLabelResult {
    std::string case_id;
    std::int32_t label = 0;
    SummaryStats stats;
    std::optional<double> ensemble_dice;
};

struct ScatterRow {
    std::string case_id;
    std::int32_t label = 0;
    double ensemble_dice = 0.0; // x
    double stat_value = 0.0;    // y
};

/// One row per case, sorted by case id (then label). Throws when a case
/// lacks an ensemble Dice (no reference available).
std::vector<ScatterRow> scatter_table(std::span<const CaseLabelResult> results,
                                      Statistic statistic);

} // namespace foldgate
