#include "core/ensemble.hpp"

#include <algorithm>
#include <string>

namespace foldgate {

std::string_view ensemble_method_name(EnsembleMethod m) {
    switch (m) {
        case EnsembleMethod::softmax_mean: return "softmax_mean";
        case EnsembleMethod::majority_vote: return "majority_vote";
    }
    return "softmax_mean";
}

EnsembleResult ensemble_softmax(std::span<const ProbabilityVolume> folds) {
    if (folds.size() < 2)
        throw ValidationError("ensemble_softmax: need at least 2 folds, got " +
                              std::to_string(folds.size()));
    const auto& first = folds.front();
    for (std::size_t f = 1; f < folds.size(); ++f) {
        require_same_geometry(first.geometry, folds[f].geometry,
                              "ensemble_softmax: fold " + std::to_string(f));
        if (folds[f].num_classes != first.num_classes)
            throw ValidationError("ensemble_softmax: fold " + std::to_string(f) + " has " +
                                  std::to_string(folds[f].num_classes) + " classes, fold 0 has " +
                                  std::to_string(first.num_classes));
    }

    const std::int64_t n = first.geometry.voxel_count();
    const std::int32_t num_classes = first.num_classes;
    const std::size_t k = folds.size();

    ProbabilityVolume mean;
    mean.geometry = first.geometry;
    mean.num_classes = num_classes;
    mean.channels.assign(static_cast<std::size_t>(num_classes),
                         std::vector<float>(static_cast<std::size_t>(n)));

    std::vector<float> addends(k);
    for (std::int32_t c = 0; c < num_classes; ++c) {
        auto& out = mean.channels[static_cast<std::size_t>(c)];
        for (std::int64_t i = 0; i < n; ++i) {
            for (std::size_t f = 0; f < k; ++f)
                addends[f] = folds[f].channels[static_cast<std::size_t>(c)][static_cast<std::size_t>(i)];
            // Sorting makes the sum a function of the multiset of values,
            // so permuting the folds cannot change a single bit.
            std::sort(addends.begin(), addends.end());
            double sum = 0.0;
            for (float a : addends) sum += a;
            out[static_cast<std::size_t>(i)] = static_cast<float>(sum / static_cast<double>(k));
        }
    }

    EnsembleResult result;
    result.method = EnsembleMethod::softmax_mean;
    result.labels.geometry = first.geometry;
    result.labels.voxels.resize(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) {
        std::int32_t best = 0;
        float best_p = mean.channels[0][static_cast<std::size_t>(i)];
        for (std::int32_t c = 1; c < num_classes; ++c) {
            const float p = mean.channels[static_cast<std::size_t>(c)][static_cast<std::size_t>(i)];
            if (p > best_p) { // strict: ties stay with the lowest class id
                best_p = p;
                best = c;
            }
        }
        result.labels.voxels[static_cast<std::size_t>(i)] = best;
    }
    result.mean_probabilities = std::move(mean);
    return result;
}

EnsembleResult majority_vote(std::span<const LabelVolume> folds) {
    if (folds.size() < 2)
        throw ValidationError("majority_vote: need at least 2 folds, got " +
                              std::to_string(folds.size()));
    const auto& first = folds.front();
    for (std::size_t f = 1; f < folds.size(); ++f)
        require_same_geometry(first.geometry, folds[f].geometry,
                              "majority_vote: fold " + std::to_string(f));

    const std::int64_t n = first.geometry.voxel_count();
    const std::size_t k = folds.size();

    EnsembleResult result;
    result.method = EnsembleMethod::majority_vote;
    result.labels.geometry = first.geometry;
    result.labels.voxels.resize(static_cast<std::size_t>(n));

    std::vector<std::int32_t> votes(k);
    for (std::int64_t i = 0; i < n; ++i) {
        for (std::size_t f = 0; f < k; ++f)
            votes[f] = folds[f].voxels[static_cast<std::size_t>(i)];
        std::sort(votes.begin(), votes.end());
        // Scan runs of the sorted votes; the first run with the maximal
        // count wins, which is the lowest label id on ties.
        std::int32_t best_label = votes[0];
        std::size_t best_count = 0;
        std::size_t run_start = 0;
        for (std::size_t f = 1; f <= k; ++f) {
            if (f == k || votes[f] != votes[run_start]) {
                const std::size_t run = f - run_start;
                if (run > best_count) {
                    best_count = run;
                    best_label = votes[run_start];
                }
                run_start = f;
            }
        }
        result.labels.voxels[static_cast<std::size_t>(i)] = best_label;
    }
    return result;
}

} // namespace foldgate
