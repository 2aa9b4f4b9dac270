#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include "core/metrics.hpp"

namespace foldgate {

/// Flagging policy as written in a policy file: the summary statistic to
/// compare and per-label thresholds keyed by label name (resolved against a
/// case's label map; plain integer keys are taken as raw label ids).
/// The case rule is "any": a case is flagged iff any configured label is.
struct ThresholdPolicy {
    Statistic statistic = Statistic::min;
    std::map<std::string, double> thresholds;
};

ThresholdPolicy load_policy(const std::filesystem::path& path);

/// Policy with label names resolved to ids for one label map.
struct ResolvedPolicy {
    Statistic statistic = Statistic::min;
    std::map<std::int32_t, double> thresholds;
};

ResolvedPolicy resolve_policy(const ThresholdPolicy& policy,
                              const std::map<std::int32_t, std::string>& label_map);

struct LabelFlag {
    std::int32_t label = 0;
    Statistic statistic = Statistic::min;
    double value = 0.0;
    double threshold = 0.0;
    bool flagged = false; // value < threshold, strictly
};

struct FlagDecision {
    std::string case_id;
    std::vector<LabelFlag> labels; // one entry per configured label, ascending id
    bool case_flagged = false;     // OR over the per-label flags
};

/// Compares the selected statistic against each configured threshold.
/// A label is flagged iff its statistic is strictly below the threshold;
/// equality is unflagged. Labels absent from the policy are ignored.
/// Throws ValidationError when a configured label has no summary entry.
FlagDecision decide_flag(const std::string& case_id,
                         const std::map<std::int32_t, SummaryStats>& stats,
                         const ResolvedPolicy& policy);

} // namespace foldgate
