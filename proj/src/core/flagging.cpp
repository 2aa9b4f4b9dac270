#include "core/flagging.hpp"

#include <cctype>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "core/errors.hpp"

namespace foldgate {

namespace {

bool is_integer_key(const std::string& s) {
    if (s.empty()) return false;
    for (char c : s)
        if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    return true;
}

} // namespace

ThresholdPolicy load_policy(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f)
        throw ValidationError("policy: cannot open: " + path.string());

    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(f);
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError("policy: invalid JSON in " + path.string() + ": " + e.what());
    }
    if (!doc.is_object())
        throw FormatError("policy: top-level value must be an object: " + path.string());

    ThresholdPolicy policy;
    if (doc.contains("statistic")) {
        if (!doc["statistic"].is_string())
            throw FormatError("policy: \"statistic\" must be a string: " + path.string());
        policy.statistic = parse_statistic(doc["statistic"].get<std::string>());
    }
    if (doc.contains("case_rule")) {
        if (!doc["case_rule"].is_string() || doc["case_rule"].get<std::string>() != "any")
            throw ValidationError("policy: only case_rule \"any\" is supported: " + path.string());
    }
    if (!doc.contains("thresholds") || !doc["thresholds"].is_object() || doc["thresholds"].empty())
        throw FormatError("policy: \"thresholds\" must be a non-empty object: " + path.string());
    for (const auto& [name, value] : doc["thresholds"].items()) {
        if (!value.is_number())
            throw FormatError("policy: threshold for \"" + name + "\" must be a number: " +
                              path.string());
        const double t = value.get<double>();
        if (t < 0.0 || t > 1.0)
            throw ValidationError("policy: threshold for \"" + name + "\" is " +
                                  std::to_string(t) + ", must be in [0,1]: " + path.string());
        policy.thresholds[name] = t;
    }
    return policy;
}

ResolvedPolicy resolve_policy(const ThresholdPolicy& policy,
                              const std::map<std::int32_t, std::string>& label_map) {
    ResolvedPolicy out;
    out.statistic = policy.statistic;
    for (const auto& [name, threshold] : policy.thresholds) {
        std::int32_t id = -1;
        bool found = false;
        for (const auto& [label_id, label_name] : label_map) {
            if (label_name == name) {
                if (found)
                    throw ValidationError("policy: label name \"" + name +
                                          "\" is ambiguous in the label map");
                id = label_id;
                found = true;
            }
        }
        if (!found && is_integer_key(name)) {
            try {
                const long raw = std::stol(name);
                if (raw < 0 || raw > std::numeric_limits<std::int32_t>::max())
                    throw std::out_of_range(name);
                id = static_cast<std::int32_t>(raw);
                found = true;
            } catch (const std::out_of_range&) {
                throw ValidationError("policy: label id \"" + name + "\" is out of range");
            }
        }
        if (!found)
            throw ValidationError("policy: label \"" + name + "\" not present in the label map");
        if (out.thresholds.contains(id))
            throw ValidationError("policy: label id " + std::to_string(id) +
                                  " configured more than once");
        out.thresholds[id] = threshold;
    }
    return out;
}

FlagDecision decide_flag(const std::string& case_id,
                         const std::map<std::int32_t, SummaryStats>& stats,
                         const ResolvedPolicy& policy) {
    FlagDecision decision;
    decision.case_id = case_id;
    for (const auto& [label, threshold] : policy.thresholds) {
        const auto it = stats.find(label);
        if (it == stats.end())
            throw ValidationError("decide_flag: no summary statistics for label " +
                                  std::to_string(label) + " in case " + case_id);
        LabelFlag flag;
        flag.label = label;
        flag.statistic = policy.statistic;
        flag.value = select_stat(it->second, policy.statistic);
        flag.threshold = threshold;
        flag.flagged = flag.value < threshold;
        decision.case_flagged = decision.case_flagged || flag.flagged;
        decision.labels.push_back(flag);
    }
    return decision;
}

} // namespace foldgate
