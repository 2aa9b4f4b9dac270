#include "core/metrics.hpp"

#include <algorithm>
#include <string>

namespace foldgate {

double dice(const LabelVolume& a, const LabelVolume& b, std::int32_t label) {
    require_same_geometry(a.geometry, b.geometry, "dice");
    std::int64_t in_a = 0, in_b = 0, in_both = 0;
    const std::size_t n = a.voxels.size();
    for (std::size_t i = 0; i < n; ++i) {
        const bool va = a.voxels[i] == label;
        const bool vb = b.voxels[i] == label;
        in_a += va;
        in_b += vb;
        in_both += va && vb;
    }
    if (in_a == 0 && in_b == 0) return 1.0; // agreement that the structure is absent
    if (in_a == 0 || in_b == 0) return 0.0;
    return 2.0 * static_cast<double>(in_both) / static_cast<double>(in_a + in_b);
}

InterfoldScores interfold_dices(std::span<const LabelVolume> folds, std::int32_t label) {
    if (folds.size() < 2)
        throw ValidationError("interfold_dices: need at least 2 folds, got " +
                              std::to_string(folds.size()));
    InterfoldScores out;
    out.label = label;
    out.k = static_cast<std::int32_t>(folds.size());
    out.scores.reserve(static_cast<std::size_t>(out.k) * (out.k - 1) / 2);
    for (std::size_t i = 0; i + 1 < folds.size(); ++i)
        for (std::size_t j = i + 1; j < folds.size(); ++j)
            out.scores.push_back(dice(folds[i], folds[j], label));
    return out;
}

std::string_view statistic_name(Statistic s) {
    switch (s) {
        case Statistic::min: return "min";
        case Statistic::mean: return "mean";
        case Statistic::median: return "median";
        case Statistic::max: return "max";
    }
    return "min";
}

Statistic parse_statistic(std::string_view name) {
    for (Statistic s : kAllStatistics)
        if (name == statistic_name(s)) return s;
    throw ValidationError("unknown statistic \"" + std::string(name) +
                          "\" (expected min, mean, median or max)");
}

SummaryStats summarize(std::span<const double> scores) {
    if (scores.empty())
        throw ValidationError("summarize: empty score set");

    SummaryStats s;
    const auto [lo, hi] = std::minmax_element(scores.begin(), scores.end());
    s.min = *lo;
    s.max = *hi;

    double sum = 0.0;
    for (double v : scores) sum += v;
    // The true mean lies in [min, max]; clamp away the last-bit rounding
    // so the ordering invariant holds exactly.
    s.mean = std::clamp(sum / static_cast<double>(scores.size()), s.min, s.max);

    std::vector<double> sorted(scores.begin(), scores.end());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    s.median = (n % 2 == 1) ? sorted[n / 2] : (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0;
    return s;
}

double label_volume_ml(const LabelVolume& v, std::int32_t label) {
    std::int64_t count = 0;
    for (std::int32_t id : v.voxels) count += id == label;
    return static_cast<double>(count) * v.geometry.voxel_volume_mm3() / 1000.0;
}

} // namespace foldgate
