#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "core/volume.hpp"

namespace foldgate {

/// Dice similarity of the voxel sets equal to `label` in a and b:
/// 2|A∩B| / (|A|+|B|). Both sets empty -> 1.0 (agreement on absence);
/// exactly one empty -> 0.0. Counts accumulate in 64-bit integers.
double dice(const LabelVolume& a, const LabelVolume& b, std::int32_t label);

/// The k(k-1)/2 unique pairwise Dice scores between fold predictions,
/// in pair order (0,1),(0,2),...,(k-2,k-1).
struct InterfoldScores {
    std::int32_t label = 0;
    std::int32_t k = 0;
    std::vector<double> scores;
};

InterfoldScores interfold_dices(std::span<const LabelVolume> folds, std::int32_t label);

/// First-order summary of a score set.
struct SummaryStats {
    double min = 0.0;
    double max = 0.0;
    double mean = 0.0;
    double median = 0.0;
};

/// Selector for one SummaryStats field.
enum class Statistic { min, mean, median, max };

constexpr std::array<Statistic, 4> kAllStatistics{Statistic::min, Statistic::mean,
                                                  Statistic::median, Statistic::max};

std::string_view statistic_name(Statistic s);
Statistic parse_statistic(std::string_view name); // throws ValidationError on unknown names

[[nodiscard]] constexpr double select_stat(const SummaryStats& s, Statistic which) {
    switch (which) {
        case Statistic::min: return s.min;
        case Statistic::mean: return s.mean;
        case Statistic::median: return s.median;
        case Statistic::max: return s.max;
    }
    return s.min;
}

/// Min, max, arithmetic mean and median; the median of an even-count set is
/// the mean of the two central order statistics. Throws on an empty set.
SummaryStats summarize(std::span<const double> scores);

inline SummaryStats summarize(const InterfoldScores& m) { return summarize(m.scores); }

/// Physical volume of the voxels equal to `label`, in milliliters.
double label_volume_ml(const LabelVolume& v, std::int32_t label);

} // namespace foldgate
