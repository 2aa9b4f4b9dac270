#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "core/errors.hpp"
#include "core/evaluation.hpp"

using namespace foldgate;

namespace {

EvaluationRecord rec(const char* id, bool flagged, double dice, double threshold,
                     std::int32_t label = 1) {
    return make_record(id, label, flagged, dice, threshold);
}

} // namespace

TEST_CASE("classify_case covers all four cells") {
    CHECK(classify_case(true, 0.50, 0.825) == Cell::TP);
    CHECK(classify_case(false, 0.50, 0.825) == Cell::FN);
    CHECK(classify_case(false, 0.90, 0.825) == Cell::TN);
    CHECK(classify_case(true, 0.90, 0.825) == Cell::FP);
}

TEST_CASE("exact threshold performance counts as performing well") {
    CHECK(classify_case(true, 0.825, 0.825) == Cell::FP);
    CHECK(classify_case(false, 0.825, 0.825) == Cell::TN);
}

TEST_CASE("cell_name round trip") {
    CHECK(cell_name(Cell::TP) == "tp");
    CHECK(cell_name(Cell::TN) == "tn");
    CHECK(cell_name(Cell::FP) == "fp");
    CHECK(cell_name(Cell::FN) == "fn");
}

TEST_CASE("confusion_matrix counts one of each") {
    const std::vector<EvaluationRecord> records = {
        rec("a", true, 0.5, 0.9),
        rec("b", false, 0.95, 0.9),
        rec("c", true, 0.95, 0.9),
        rec("d", false, 0.5, 0.9),
    };
    const ConfusionMatrix m = confusion_matrix(records);
    CHECK(m.tp == 1);
    CHECK(m.tn == 1);
    CHECK(m.fp == 1);
    CHECK(m.fn == 1);
    CHECK(m.total() == 4);
}

TEST_CASE("confusion_matrix on no records is all zeros") {
    const ConfusionMatrix m = confusion_matrix({});
    CHECK(m.tp == 0);
    CHECK(m.tn == 0);
    CHECK(m.fp == 0);
    CHECK(m.fn == 0);
}

TEST_CASE("confusion_matrix accumulates repeated cells") {
    std::vector<EvaluationRecord> records;
    for (int i = 0; i < 3; ++i)
        records.push_back(rec("x", true, 0.1, 0.9));
    for (int i = 0; i < 2; ++i)
        records.push_back(rec("y", false, 0.1, 0.9));
    const ConfusionMatrix m = confusion_matrix(records);
    CHECK(m.tp == 3);
    CHECK(m.fn == 2);
    CHECK(m.total() == 5);
}

TEST_CASE("confusion_matrix rejects mixed labels") {
    const std::vector<EvaluationRecord> records = {
        rec("a", true, 0.5, 0.9, 1),
        rec("b", true, 0.5, 0.9, 2),
    };
    CHECK_THROWS_AS(confusion_matrix(records), ValidationError);
}

TEST_CASE("confusion cells partition random records") {
    std::mt19937_64 rng(61);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    std::vector<EvaluationRecord> records;
    for (int i = 0; i < 500; ++i)
        records.push_back(rec("r", dist(rng) < 0.5, dist(rng), 0.8));
    CHECK(confusion_matrix(records).total() == 500);
}

TEST_CASE("cohort_summary splits flagged and unflagged means") {
    const std::vector<EvaluationRecord> records = {
        rec("a", true, 0.2, 0.9),
        rec("b", true, 0.4, 0.9),
        rec("c", false, 0.9, 0.9),
        rec("d", false, 1.0, 0.9),
    };
    const CohortSummary s = cohort_summary(records);
    CHECK(s.n_flagged == 2);
    CHECK(s.n_unflagged == 2);
    REQUIRE(s.flagged_mean.has_value());
    REQUIRE(s.unflagged_mean.has_value());
    CHECK(*s.flagged_mean == doctest::Approx(0.3));
    CHECK(*s.unflagged_mean == doctest::Approx(0.95));
    CHECK(s.overall_mean == doctest::Approx(0.625));
    REQUIRE(s.removal_delta.has_value());
    CHECK(*s.removal_delta == doctest::Approx(0.325));
    // sample std with the n-1 denominator
    CHECK(*s.flagged_std == doctest::Approx(std::sqrt(0.02)));
    CHECK(*s.unflagged_std == doctest::Approx(std::sqrt(0.005)));
}

TEST_CASE("cohort_summary with nothing flagged has a removal delta of exactly 0") {
    const std::vector<EvaluationRecord> records = {
        rec("a", false, 0.7, 0.9),
        rec("b", false, 0.8, 0.9),
        rec("c", false, 0.95, 0.9),
    };
    const CohortSummary s = cohort_summary(records);
    CHECK(s.n_flagged == 0);
    CHECK_FALSE(s.flagged_mean.has_value());
    CHECK_FALSE(s.flagged_std.has_value());
    REQUIRE(s.removal_delta.has_value());
    CHECK(*s.removal_delta == 0.0);
}

TEST_CASE("cohort_summary with everything flagged has no removal delta") {
    const std::vector<EvaluationRecord> records = {
        rec("a", true, 0.2, 0.9),
        rec("b", true, 0.3, 0.9),
    };
    const CohortSummary s = cohort_summary(records);
    CHECK(s.n_unflagged == 0);
    CHECK_FALSE(s.unflagged_mean.has_value());
    CHECK_FALSE(s.removal_delta.has_value());
}

TEST_CASE("single-record cohorts report a std of 0") {
    const std::vector<EvaluationRecord> records = {
        rec("a", true, 0.5, 0.9),
        rec("b", false, 0.95, 0.9),
    };
    const CohortSummary s = cohort_summary(records);
    CHECK(*s.flagged_mean == doctest::Approx(0.5));
    CHECK(*s.flagged_std == 0.0);
    CHECK(*s.unflagged_std == 0.0);
}

TEST_CASE("cohort_summary rejects an empty cohort") {
    CHECK_THROWS_AS(cohort_summary({}), ValidationError);
}

TEST_CASE("cohort means recombine into the overall mean") {
    std::mt19937_64 rng(67);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<EvaluationRecord> records;
        const int n = 2 + static_cast<int>(rng() % 40);
        for (int i = 0; i < n; ++i)
            records.push_back(rec("r", dist(rng) < 0.4, dist(rng), 0.8));
        const CohortSummary s = cohort_summary(records);
        double recombined = 0.0;
        if (s.flagged_mean)
            recombined += static_cast<double>(s.n_flagged) * *s.flagged_mean;
        if (s.unflagged_mean)
            recombined += static_cast<double>(s.n_unflagged) * *s.unflagged_mean;
        CHECK(recombined ==
              doctest::Approx(static_cast<double>(n) * s.overall_mean).epsilon(1e-9));
    }
}

TEST_CASE("scatter_table sorts by case id and picks the statistic") {
    SummaryStats s1{0.4, 1.0, 0.7, 0.7};
    SummaryStats s2{0.9, 0.95, 0.92, 0.92};
    const std::vector<CaseLabelResult> results = {
        {"case_2", 1, s2, 0.88},
        {"case_1", 1, s1, 0.75},
    };

    const auto rows = scatter_table(results, Statistic::min);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].case_id == "case_1");
    CHECK(rows[0].ensemble_dice == 0.75);
    CHECK(rows[0].stat_value == 0.4);
    CHECK(rows[1].case_id == "case_2");
    CHECK(rows[1].stat_value == 0.9);

    const auto max_rows = scatter_table(results, Statistic::max);
    CHECK(max_rows[0].stat_value == 1.0);
}

TEST_CASE("scatter_table orders same-case rows by label") {
    SummaryStats s{1.0, 1.0, 1.0, 1.0};
    const std::vector<CaseLabelResult> results = {
        {"case_1", 2, s, 1.0},
        {"case_1", 1, s, 1.0},
    };
    const auto rows = scatter_table(results, Statistic::mean);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].label == 1);
    CHECK(rows[1].label == 2);
}

TEST_CASE("scatter_table requires an ensemble dice") {
    SummaryStats s{1.0, 1.0, 1.0, 1.0};
    const std::vector<CaseLabelResult> results = {{"case_1", 1, s, std::nullopt}};
    CHECK_THROWS_AS(scatter_table(results, Statistic::min), ValidationError);
}
