#include <doctest.h>

#include <random>

#include "core/errors.hpp"
#include "core/metrics.hpp"
#include "testutil.hpp"

using namespace foldgate;
using foldgate::test::make_label;
using foldgate::test::random_label;

namespace {

// Two adjacent 2x2x1 blocks offset by 2 voxels in x: |A|=4, |B|=4, |A∩B|=2.
LabelVolume block_a() {
    LabelVolume v = make_label(4, 4, 1);
    for (std::int64_t y = 0; y < 2; ++y)
        for (std::int64_t x = 0; x < 2; ++x)
            v.voxels[static_cast<std::size_t>(v.index(x, y, 0))] = 1;
    return v;
}

LabelVolume block_b() {
    LabelVolume v = make_label(4, 4, 1);
    for (std::int64_t y = 0; y < 2; ++y)
        for (std::int64_t x = 1; x < 3; ++x)
            v.voxels[static_cast<std::size_t>(v.index(x, y, 0))] = 1;
    return v;
}

} // namespace

TEST_CASE("dice of a volume with itself is 1") {
    const LabelVolume a = block_a();
    CHECK(dice(a, a, 1) == 1.0);
}

TEST_CASE("dice of disjoint label sets is 0") {
    LabelVolume a = make_label(4, 1, 1);
    LabelVolume b = make_label(4, 1, 1);
    a.voxels[0] = 1;
    b.voxels[3] = 1;
    CHECK(dice(a, b, 1) == 0.0);
}

TEST_CASE("dice of half-overlapping blocks is 0.5") {
    CHECK(dice(block_a(), block_b(), 1) == 0.5);
}

TEST_CASE("dice empty conventions") {
    const LabelVolume empty = make_label(3, 3, 3);
    LabelVolume one = make_label(3, 3, 3);
    one.voxels[13] = 1;
    CHECK(dice(empty, empty, 1) == 1.0);
    CHECK(dice(empty, one, 1) == 0.0);
    CHECK(dice(one, empty, 1) == 0.0);
}

TEST_CASE("dice is per label id") {
    LabelVolume a = make_label(2, 1, 1);
    LabelVolume b = make_label(2, 1, 1);
    a.voxels = {1, 2};
    b.voxels = {1, 1};
    CHECK(dice(a, b, 1) == doctest::Approx(2.0 / 3.0));
    CHECK(dice(a, b, 2) == 0.0);
}

TEST_CASE("dice rejects mismatched geometry") {
    const LabelVolume a = make_label(2, 2, 2);
    const LabelVolume b = make_label(2, 2, 3);
    CHECK_THROWS_AS(dice(a, b, 1), ValidationError);
    const LabelVolume c = make_label(2, 2, 2, 1.0, 1.0, 2.0);
    CHECK_THROWS_AS(dice(a, c, 1), ValidationError);
}

TEST_CASE("dice is symmetric on random volumes") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const LabelVolume a = random_label(rng, 6);
        const LabelVolume b = random_label(rng, 6);
        const double ab = dice(a, b, 1);
        CHECK(ab == dice(b, a, 1));
        CHECK(ab >= 0.0);
        CHECK(ab <= 1.0);
    }
}

TEST_CASE("interfold_dices yields k(k-1)/2 scores in pair order") {
    std::mt19937_64 rng(5);
    for (std::int32_t k = 2; k <= 8; ++k) {
        std::vector<LabelVolume> folds;
        for (std::int32_t i = 0; i < k; ++i)
            folds.push_back(random_label(rng, 5));
        const InterfoldScores m = interfold_dices(folds, 1);
        CHECK(m.k == k);
        CHECK(m.scores.size() == static_cast<std::size_t>(k * (k - 1) / 2));

        std::size_t idx = 0;
        for (std::int32_t i = 0; i < k; ++i)
            for (std::int32_t j = i + 1; j < k; ++j)
                CHECK(m.scores[idx++] == dice(folds[static_cast<std::size_t>(i)],
                                              folds[static_cast<std::size_t>(j)], 1));
    }
}

TEST_CASE("interfold_dices with two folds equals their dice") {
    const LabelVolume a = block_a();
    const LabelVolume b = block_b();
    const std::vector<LabelVolume> folds{a, b};
    const InterfoldScores m = interfold_dices(folds, 1);
    REQUIRE(m.scores.size() == 1);
    CHECK(m.scores[0] == dice(a, b, 1));
}

TEST_CASE("interfold_dices of identical folds is all ones") {
    const std::vector<LabelVolume> folds(5, block_a());
    const InterfoldScores m = interfold_dices(folds, 1);
    CHECK(m.scores.size() == 10);
    for (double s : m.scores)
        CHECK(s == 1.0);
}

TEST_CASE("interfold_dices needs at least two folds") {
    const std::vector<LabelVolume> folds{block_a()};
    CHECK_THROWS_AS(interfold_dices(folds, 1), ValidationError);
}

TEST_CASE("making two folds identical raises their pair score to 1") {
    std::mt19937_64 rng(17);
    std::vector<LabelVolume> folds;
    for (int i = 0; i < 4; ++i)
        folds.push_back(random_label(rng, 6));
    folds[2] = folds[0];
    const InterfoldScores m = interfold_dices(folds, 1);
    CHECK(m.scores[1] == 1.0); // pair (0,2)
}

TEST_CASE("summarize over four hand-computed values") {
    const std::vector<double> scores{1.0, 0.8, 0.6, 0.4};
    const SummaryStats s = summarize(scores);
    CHECK(s.min == 0.4);
    CHECK(s.max == 1.0);
    CHECK(s.mean == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(s.median == doctest::Approx(0.7).epsilon(1e-12));
}

TEST_CASE("summarize of a constant set is the constant") {
    const std::vector<double> scores(7, 0.37);
    const SummaryStats s = summarize(scores);
    CHECK(s.min == 0.37);
    CHECK(s.max == 0.37);
    CHECK(s.mean == 0.37);
    CHECK(s.median == 0.37);
}

TEST_CASE("summarize of {0,1}") {
    const std::vector<double> scores{0.0, 1.0};
    const SummaryStats s = summarize(scores);
    CHECK(s.min == 0.0);
    CHECK(s.max == 1.0);
    CHECK(s.mean == 0.5);
    CHECK(s.median == 0.5);
}

TEST_CASE("summarize rejects the empty set") {
    CHECK_THROWS_AS(summarize(std::vector<double>{}), ValidationError);
}

TEST_CASE("summary ordering holds on random score sets") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    std::uniform_int_distribution<int> size_dist(1, 15);
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<double> scores(static_cast<std::size_t>(size_dist(rng)));
        for (auto& s : scores)
            s = dist(rng);
        const SummaryStats st = summarize(scores);
        CHECK(st.min <= st.median);
        CHECK(st.median <= st.max);
        CHECK(st.min <= st.mean);
        CHECK(st.mean <= st.max);
    }
}

TEST_CASE("statistic names round-trip") {
    for (Statistic s : kAllStatistics)
        CHECK(parse_statistic(statistic_name(s)) == s);
    CHECK_THROWS_AS(parse_statistic("p95"), ValidationError);
}

TEST_CASE("label_volume_ml unit conversions") {
    LabelVolume v = make_label(10, 10, 10);
    for (auto& voxel : v.voxels)
        voxel = 1;
    CHECK(label_volume_ml(v, 1) == 1.0);
    CHECK(label_volume_ml(v, 2) == 0.0);

    LabelVolume w = make_label(10, 10, 1, 0.5, 0.5, 3.0);
    for (auto& voxel : w.voxels)
        voxel = 1;
    CHECK(label_volume_ml(w, 1) == doctest::Approx(0.075).epsilon(1e-12));
}
