#include "core/manifest.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <utility>

#include <json.hpp>

#include "core/errors.hpp"
#include "core/log.hpp"
#include "core/nifti.hpp"

namespace foldgate {

namespace fs = std::filesystem;
using nlohmann::json;

bool CaseManifest::has_probabilities() const {
    return !folds.empty() && std::all_of(folds.begin(), folds.end(), [](const FoldEntry& f) {
        return !f.probability_paths.empty();
    });
}

namespace {

fs::path resolve(const fs::path& base_dir, const std::string& raw, const fs::path& manifest) {
    if (raw.empty())
        throw FormatError("manifest: empty path in " + manifest.string());
    fs::path p(raw);
    return p.is_absolute() ? p : base_dir / p;
}

std::int32_t parse_label_id(const std::string& key, const fs::path& manifest) {
    std::size_t pos = 0;
    int value = 0;
    try {
        value = std::stoi(key, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos != key.size() || value < 0)
        throw FormatError("manifest: label_map key '" + key +
                          "' is not a non-negative integer: " + manifest.string());
    return value;
}

} // namespace

CaseManifest parse_manifest(const fs::path& path) {
    std::error_code ec;
    if (!fs::exists(path, ec) || ec)
        throw ValidationError("manifest: no such file: " + path.string());

    std::ifstream in(path);
    if (!in)
        throw IoError("manifest: cannot open: " + path.string());

    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw FormatError("manifest: " + path.string() + ": " + e.what());
    }
    if (!doc.is_object())
        throw FormatError("manifest: top-level value is not an object: " + path.string());

    CaseManifest m;
    const fs::path base_dir = path.parent_path();

    if (!doc.contains("case_id") || !doc["case_id"].is_string())
        throw FormatError("manifest: missing string field 'case_id': " + path.string());
    m.case_id = doc["case_id"].get<std::string>();
    if (m.case_id.empty() || m.case_id == "." || m.case_id == ".." ||
        m.case_id.find('/') != std::string::npos || m.case_id.find('\\') != std::string::npos)
        throw ValidationError("manifest: case_id '" + m.case_id +
                              "' is not usable as a file name: " + path.string());

    if (!doc.contains("folds") || !doc["folds"].is_array())
        throw FormatError("manifest: missing array field 'folds': " + path.string());
    for (const auto& entry : doc["folds"]) {
        if (!entry.is_object() || !entry.contains("fold_index") ||
            !entry["fold_index"].is_number_integer() || !entry.contains("label_path") ||
            !entry["label_path"].is_string())
            throw FormatError("manifest: each fold needs integer 'fold_index' and string "
                              "'label_path': " + path.string());
        FoldEntry fold;
        fold.fold_index = entry["fold_index"].get<std::int32_t>();
        fold.label_path = resolve(base_dir, entry["label_path"].get<std::string>(), path);
        if (entry.contains("probability_paths")) {
            if (!entry["probability_paths"].is_array())
                throw FormatError("manifest: 'probability_paths' must be an array: " +
                                  path.string());
            for (const auto& p : entry["probability_paths"]) {
                if (!p.is_string())
                    throw FormatError("manifest: 'probability_paths' entries must be strings: " +
                                      path.string());
                fold.probability_paths.push_back(resolve(base_dir, p.get<std::string>(), path));
            }
            if (fold.probability_paths.size() < 2)
                throw ValidationError("manifest: fold " + std::to_string(fold.fold_index) +
                                      " lists " + std::to_string(fold.probability_paths.size()) +
                                      " probability channel(s), need at least 2: " + path.string());
        }
        m.folds.push_back(std::move(fold));
    }

    if (m.folds.size() < 2)
        throw ValidationError("manifest: " + std::to_string(m.folds.size()) +
                              " fold(s), need at least 2: " + path.string());
    std::sort(m.folds.begin(), m.folds.end(), [](const FoldEntry& a, const FoldEntry& b) {
        return a.fold_index < b.fold_index;
    });
    for (std::size_t i = 0; i < m.folds.size(); ++i) {
        if (m.folds[i].fold_index != static_cast<std::int32_t>(i))
            throw ValidationError(
                "manifest: fold indices must be unique and contiguous from 0, got " +
                std::to_string(m.folds[i].fold_index) + " at position " + std::to_string(i) +
                ": " + path.string());
    }

    if (!doc.contains("label_map") || !doc["label_map"].is_object())
        throw FormatError("manifest: missing object field 'label_map': " + path.string());
    for (const auto& [key, value] : doc["label_map"].items()) {
        if (!value.is_string())
            throw FormatError("manifest: label_map values must be strings: " + path.string());
        const std::int32_t id = parse_label_id(key, path);
        if (!m.label_map.emplace(id, value.get<std::string>()).second)
            throw ValidationError("manifest: duplicate label id " + std::to_string(id) + ": " +
                                  path.string());
    }
    if (m.label_map.empty())
        throw ValidationError("manifest: label_map is empty: " + path.string());

    if (doc.contains("reference_path")) {
        if (!doc["reference_path"].is_string())
            throw FormatError("manifest: 'reference_path' must be a string: " + path.string());
        m.reference_path = resolve(base_dir, doc["reference_path"].get<std::string>(), path);
    }
    return m;
}

namespace {

void require_case_geometry(const VolumeGeometry& expected, const VolumeGeometry& got,
                           const std::string& case_id, const std::string& which) {
    if (!same_dims(expected, got))
        throw ValidationError("case '" + case_id + "': " + which + " has dims " +
                              describe_geometry(got) + ", expected " +
                              describe_geometry(expected));
    if (!spacing_close(expected, got))
        throw ValidationError("case '" + case_id + "': " + which + " spacing " +
                              describe_geometry(got) + " differs from " +
                              describe_geometry(expected) + " by more than 1e-4 mm");
}

} // namespace

CasePrediction load_case(const CaseManifest& manifest, const LoadOptions& options) {
    CasePrediction pred;
    pred.case_id = manifest.case_id;
    pred.label_map = manifest.label_map;

    for (const auto& fold : manifest.folds) {
        LabelVolume vol = to_label_volume(read_nifti(fold.label_path));
        validate_label_volume(vol, "case '" + manifest.case_id + "' fold " +
                                       std::to_string(fold.fold_index));
        pred.fold_labels.push_back(std::move(vol));
    }

    const VolumeGeometry& geom = pred.fold_labels.front().geometry;
    for (std::size_t i = 1; i < pred.fold_labels.size(); ++i)
        require_case_geometry(geom, pred.fold_labels[i].geometry, manifest.case_id,
                              "fold " + std::to_string(manifest.folds[i].fold_index));

    if (manifest.reference_path) {
        LabelVolume ref = to_label_volume(read_nifti(*manifest.reference_path));
        validate_label_volume(ref, "case '" + manifest.case_id + "' reference");
        require_case_geometry(geom, ref.geometry, manifest.case_id, "reference");
        pred.reference = std::move(ref);
    }

    pred.fold_probabilities.resize(pred.fold_labels.size());
    if (options.include_probabilities) {
        std::optional<std::int32_t> num_classes;
        std::int32_t first_prob_fold = -1;
        for (std::size_t i = 0; i < manifest.folds.size(); ++i) {
            const auto& fold = manifest.folds[i];
            if (fold.probability_paths.empty())
                continue;
            ProbabilityVolume prob;
            prob.geometry = geom;
            prob.num_classes = static_cast<std::int32_t>(fold.probability_paths.size());
            for (const auto& channel_path : fold.probability_paths) {
                NiftiVolume raw = read_nifti(channel_path);
                require_case_geometry(geom, raw.geometry, manifest.case_id,
                                      "fold " + std::to_string(fold.fold_index) +
                                          " probability channel " + channel_path.string());
                prob.channels.push_back(to_channel(raw));
            }
            validate_probability_volume(prob, "case '" + manifest.case_id + "' fold " +
                                                  std::to_string(fold.fold_index));
            if (num_classes && *num_classes != prob.num_classes)
                throw ValidationError(
                    "case '" + manifest.case_id + "': fold " +
                    std::to_string(fold.fold_index) + " has " + std::to_string(prob.num_classes) +
                    " probability channels, fold " + std::to_string(first_prob_fold) + " has " +
                    std::to_string(*num_classes));
            if (!num_classes) {
                num_classes = prob.num_classes;
                first_prob_fold = fold.fold_index;
            }
            pred.fold_probabilities[i] = std::move(prob);
        }
    }

    std::set<std::int32_t> seen;
    for (const auto& vol : pred.fold_labels)
        seen.insert(vol.voxels.begin(), vol.voxels.end());
    if (pred.reference)
        seen.insert(pred.reference->voxels.begin(), pred.reference->voxels.end());
    for (std::int32_t id : seen) {
        if (id != 0 && !manifest.label_map.count(id)) {
            std::string msg = "case '" + manifest.case_id + "': label id " + std::to_string(id) +
                              " appears in a volume but not in label_map";
            log::warn(msg);
            pred.warnings.push_back(std::move(msg));
        }
    }
    return pred;
}

std::vector<fs::path> list_cohort(const fs::path& dir) {
    std::error_code ec;
    if (!fs::is_directory(dir, ec) || ec)
        throw ValidationError("cohort: not a directory: " + dir.string());

    std::vector<fs::path> manifests;
    for (const auto& entry : fs::directory_iterator(dir, ec)) {
        if (entry.is_regular_file() && entry.path().filename().string().ends_with(".manifest.json"))
            manifests.push_back(entry.path());
    }
    if (ec)
        throw IoError("cohort: cannot list " + dir.string() + ": " + ec.message());
    std::sort(manifests.begin(), manifests.end());
    return manifests;
}

} // namespace foldgate
