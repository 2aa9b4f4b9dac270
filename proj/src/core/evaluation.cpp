#include "core/evaluation.hpp"

#include <algorithm>
#include <cmath>

#include "core/errors.hpp"

namespace foldgate {

std::string_view cell_name(Cell c) {
    switch (c) {
    case Cell::TP: return "tp";
    case Cell::TN: return "tn";
    case Cell::FP: return "fp";
    case Cell::FN: return "fn";
    }
    return "tn";
}

Cell classify_case(bool flagged, double ensemble_dice, double perf_threshold) {
    const bool poor = ensemble_dice < perf_threshold;
    if (flagged)
        return poor ? Cell::TP : Cell::FP;
    return poor ? Cell::FN : Cell::TN;
}

EvaluationRecord make_record(std::string case_id, std::int32_t label, bool flagged,
                             double ensemble_dice, double perf_threshold) {
    EvaluationRecord rec;
    rec.case_id = std::move(case_id);
    rec.label = label;
    rec.flagged = flagged;
    rec.ensemble_dice = ensemble_dice;
    rec.cell = classify_case(flagged, ensemble_dice, perf_threshold);
    return rec;
}

ConfusionMatrix confusion_matrix(std::span<const EvaluationRecord> records) {
    ConfusionMatrix m;
    if (records.empty())
        return m;
    const std::int32_t label = records.front().label;
    for (const auto& rec : records) {
        if (rec.label != label)
            throw ValidationError("confusion_matrix: records mix labels " +
                                  std::to_string(label) + " and " + std::to_string(rec.label));
        switch (rec.cell) {
        case Cell::TP: ++m.tp; break;
        case Cell::TN: ++m.tn; break;
        case Cell::FP: ++m.fp; break;
        case Cell::FN: ++m.fn; break;
        }
    }
    return m;
}

namespace {

struct MeanStd {
    double mean = 0.0;
    double stddev = 0.0;
};

MeanStd mean_std(const std::vector<double>& xs) {
    MeanStd out;
    if (xs.empty())
        return out;
    double sum = 0.0;
    for (double x : xs)
        sum += x;
    out.mean = sum / static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) {
            const double d = x - out.mean;
            ss += d * d;
        }
        out.stddev = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    }
    return out;
}

} // namespace

CohortSummary cohort_summary(std::span<const EvaluationRecord> records) {
    if (records.empty())
        throw ValidationError("cohort_summary: no records");

    std::vector<double> flagged, unflagged, all;
    all.reserve(records.size());
    for (const auto& rec : records) {
        all.push_back(rec.ensemble_dice);
        (rec.flagged ? flagged : unflagged).push_back(rec.ensemble_dice);
    }

    CohortSummary s;
    s.n_flagged = static_cast<std::int64_t>(flagged.size());
    s.n_unflagged = static_cast<std::int64_t>(unflagged.size());

    const MeanStd overall = mean_std(all);
    s.overall_mean = overall.mean;
    s.overall_std = overall.stddev;

    if (!flagged.empty()) {
        const MeanStd f = mean_std(flagged);
        s.flagged_mean = f.mean;
        s.flagged_std = f.stddev;
    }
    if (!unflagged.empty()) {
        const MeanStd u = mean_std(unflagged);
        s.unflagged_mean = u.mean;
        s.unflagged_std = u.stddev;
        s.removal_delta = u.mean - overall.mean;
    }
    return s;
}

std::vector<ScatterRow> scatter_table(std::span<const CaseLabelResult> results,
                                      Statistic statistic) {
    std::vector<ScatterRow> rows;
    rows.reserve(results.size());
    for (const auto& res : results) {
        if (!res.ensemble_dice)
            throw ValidationError("scatter_table: case '" + res.case_id +
                                  "' has no ensemble Dice (missing reference)");
        ScatterRow row;
        row.case_id = res.case_id;
        row.label = res.label;
        row.ensemble_dice = *res.ensemble_dice;
        row.stat_value = select_stat(res.stats, statistic);
        rows.push_back(std::move(row));
    }
    std::sort(rows.begin(), rows.end(), [](const ScatterRow& a, const ScatterRow& b) {
        if (a.case_id != b.case_id)
            return a.case_id < b.case_id;
        return a.label < b.label;
    });
    return rows;
}

} // namespace foldgate
