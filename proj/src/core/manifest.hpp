#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "core/volume.hpp"

namespace foldgate {

struct FoldEntry {
    std::int32_t fold_index = 0;
    std::filesystem::path label_path;
    std::vector<std::filesystem::path> probability_paths; // one file per class
};

/// One case's worth of file references, parsed from a *.manifest.json.
/// Relative paths are resolved against the manifest's directory.
struct CaseManifest {
    std::string case_id;
    std::vector<FoldEntry> folds;
    std::optional<std::filesystem::path> reference_path;
    std::map<std::int32_t, std::string> label_map;

    [[nodiscard]] std::int32_t k() const { return static_cast<std::int32_t>(folds.size()); }
    [[nodiscard]] bool has_probabilities() const;
};

CaseManifest parse_manifest(const std::filesystem::path& path);

/// Loaded, geometry-validated volumes for one case. fold_probabilities[i]
/// is empty when fold i ships labels only.
struct CasePrediction {
    std::string case_id;
    std::vector<LabelVolume> fold_labels;
    std::vector<std::optional<ProbabilityVolume>> fold_probabilities;
    std::optional<LabelVolume> reference;
    std::map<std::int32_t, std::string> label_map;
    std::vector<std::string> warnings; // unknown label ids etc., not fatal
};

struct LoadOptions {
    bool include_probabilities = true;
};

CasePrediction load_case(const CaseManifest& manifest, const LoadOptions& options = {});

/// All *.manifest.json directly inside dir, sorted by filename.
std::vector<std::filesystem::path> list_cohort(const std::filesystem::path& dir);

} // namespace foldgate
