#pragma once

#include <optional>
#include <span>
#include <string_view>

#include "core/volume.hpp"

namespace foldgate {

enum class EnsembleMethod { softmax_mean, majority_vote };

std::string_view ensemble_method_name(EnsembleMethod m);

/// Final prediction combined from k fold outputs. When mean_probabilities is
/// present, labels are its per-voxel argmax with ties broken toward the
/// lowest class id.
struct EnsembleResult {
    LabelVolume labels;
    std::optional<ProbabilityVolume> mean_probabilities;
    EnsembleMethod method = EnsembleMethod::softmax_mean;
};

/// Voxel-wise arithmetic mean of the fold softmax probabilities, then
/// argmax. Addends are summed in ascending order so the result does not
/// depend on fold order.
EnsembleResult ensemble_softmax(std::span<const ProbabilityVolume> folds);

/// Per-voxel modal label across folds, ties broken toward the lowest id.
/// Fallback for pipelines that export label maps only.
EnsembleResult majority_vote(std::span<const LabelVolume> folds);

} // namespace foldgate
