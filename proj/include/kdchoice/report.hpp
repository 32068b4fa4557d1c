#pragma once

#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "kdchoice/bounds.hpp"
#include "kdchoice/harness.hpp"
#include "kdchoice/prob.hpp"
#include "kdchoice/stats.hpp"
#include "kdchoice/storage_sim.hpp"

namespace kdchoice {

// Report schema version; bump when serialized field layout changes.
inline constexpr int kReportSchemaVersion = 1;

inline const char* to_string(Strategy s) {
    return s == Strategy::KdChoice ? "kd" : "optimal";
}

inline const char* to_string(TieBreak t) {
    return t == TieBreak::LowestBinIndex ? "index" : "random";
}

inline const char* to_string(Regime r) {
    return r == Regime::BoundedDk ? "bounded_dk" : "growing_dk";
}

inline const char* to_string(PlacementMode m) {
    return m == PlacementMode::Replicate ? "replicate" : "chunk";
}

template <typename Key>
inline nlohmann::json histogram_json(const std::map<Key, std::uint64_t>& histogram) {
    nlohmann::json out = nlohmann::json::object();
    for (const auto& [value, count] : histogram) out[std::to_string(value)] = count;
    return out;
}

inline nlohmann::json to_json(const ProcessParams& params) {
    return {{"n", params.n},         {"m", params.m},
            {"k", params.k},         {"d", params.d},
            {"strategy", to_string(params.strategy)},
            {"tie_break", to_string(params.tie_break)},
            {"seed", params.seed}};
}

inline nlohmann::json to_json(const BoundReport& report) {
    return {{"d_k", report.d_k},
            {"regime", to_string(report.regime)},
            {"dk_threshold", report.dk_threshold},
            {"log_base", "natural"},
            {"y_star_constant", 1.0}, // C in the y! = d_k / C estimate
            {"leading_bound", report.leading_bound},
            {"bounded_dk_leading", report.bounded_dk_leading},
            {"growing_dk_leading", report.growing_dk_leading},
            {"y_star_est", report.y_star_est},
            {"y_hat_upper", report.y_hat_upper},
            {"y_hat_lower", report.y_hat_lower},
            {"gamma_depth", report.gamma_depth}};
}

inline nlohmann::json to_json(const IntersectionResult& result) {
    nlohmann::json out = {{"x_star", result.x_star},
                          {"lower_bound", result.lower_bound},
                          {"d_k", result.d_k}};
    if (result.upper_bound) {
        out["upper_bound"] = *result.upper_bound;
    } else {
        out["upper_bound"] = nullptr;
    }
    return out;
}

inline nlohmann::json to_json(const AggregateStats& stats) {
    nlohmann::json out = {{"trials", stats.trials},
                          {"max_load_histogram", histogram_json(stats.max_load_histogram)},
                          {"max_load_mean", stats.mean_max_load()},
                          {"max_load_max", stats.observed_max_load()},
                          {"mean_messages", stats.mean_messages()},
                          {"mean_y_star_emp", stats.mean_y_star_emp()},
                          {"mean_y_hat_emp", stats.mean_y_hat_emp()}};
    nlohmann::json nu = nlohmann::json::object();
    nlohmann::json mu = nlohmann::json::object();
    for (const auto& [y, sum] : stats.nu_sums) nu[std::to_string(y)] = stats.mean_nu(y);
    for (const auto& [y, sum] : stats.mu_sums) mu[std::to_string(y)] = stats.mean_mu(y);
    out["nu_curves"] = nu;
    out["mu_curves"] = mu;
    if (!stats.intersection_histogram.empty()) {
        out["intersection_histogram"] = histogram_json(stats.intersection_histogram);
        out["intersection_median"] = *stats.median_intersection();
        out["single_max_load_histogram"] =
            histogram_json(stats.single_max_load_histogram);
    }
    return out;
}

inline nlohmann::json to_json(const Verdict& verdict) {
    return {{"name", verdict.name},
            {"observed", verdict.observed},
            {"predicted", verdict.predicted},
            {"slack", verdict.slack},
            {"status", to_string(verdict.status)},
            {"note", verdict.note}};
}

inline nlohmann::json to_json(const ExperimentReport& report) {
    nlohmann::json config = to_json(report.config.params);
    config["trials"] = report.config.trials;
    // parallelism is a scheduling knob, not part of the experiment identity;
    // echoing it would break byte-identity across --jobs levels
    config["probes"] = report.config.probes;
    config["paired_single"] = report.config.paired_single;
    config["single_choice"] = report.config.single_choice;
    config["slack"] = report.config.slack;

    nlohmann::json out = {{"config", config},
                          {"stats", to_json(report.stats)},
                          {"partial", report.partial}};
    out["bounds"] = report.bounds ? to_json(*report.bounds) : nlohmann::json(nullptr);
    out["intersection"] =
        report.intersection ? to_json(*report.intersection) : nlohmann::json(nullptr);
    nlohmann::json verdicts = nlohmann::json::array();
    for (const Verdict& v : report.verdicts) verdicts.push_back(to_json(v));
    out["verdicts"] = verdicts;
    return out;
}

inline nlohmann::json to_json(const SweepRow& row) {
    return {{"n", row.point.n},
            {"k", row.point.k},
            {"d", row.point.d},
            {"d_k", row.d_k},
            {"trials", row.trials},
            {"max_load_mean", row.max_load_mean},
            {"max_load_max", row.max_load_max},
            {"messages_per_ball", row.messages_per_ball},
            {"bound_leading", row.bound_leading},
            {"verdict", to_string(row.verdict)},
            {"error", row.error}};
}

inline nlohmann::json to_json(const TailCheckResult& result) {
    return {{"trials", result.trials},
            {"mu_violations", result.mu_violations},
            {"nu_violations", result.nu_violations},
            {"mu_threshold", result.bounds.mu_threshold},
            {"mu_prob", result.bounds.mu_prob},
            {"nu_threshold", result.bounds.nu_threshold},
            {"nu_prob", result.bounds.nu_prob},
            {"predicted_prob", result.predicted_prob},
            {"margin", result.margin},
            {"verdict", to_string(result.verdict)}};
}

inline nlohmann::json to_json(const SearchStats& stats) {
    return {{"searches", stats.searches},
            {"total_probes", stats.total_probes},
            {"mean_probes", stats.mean_probes}};
}

// Envelope every CLI command prints: schema version, echoed command line,
// results, and enough provenance to reproduce each number. Deliberately no
// wall-clock fields, so identical invocations serialize identically.
inline std::string render_document(const std::string& command, const nlohmann::json& config,
                                   const nlohmann::json& results, std::uint64_t seed) {
    nlohmann::json doc = {{"schema_version", kReportSchemaVersion},
                          {"command", command},
                          {"config", config},
                          {"results", results},
                          {"provenance",
                           {{"seed", seed},
                            {"compiler", std::string(__VERSION__)},
                            {"library", "kdchoice"}}}};
    return doc.dump(2) + "\n";
}

// Flat key,value rows for anything that is not naturally tabular.
inline std::string render_kv_csv(const std::vector<std::pair<std::string, std::string>>& rows) {
    std::ostringstream out;
    out << "key,value\n";
    for (const auto& [key, value] : rows) out << key << "," << value << "\n";
    return out.str();
}

// Pinned sweep columns; order is part of the schema.
inline std::string render_sweep_csv(const std::vector<SweepRow>& rows) {
    std::ostringstream out;
    out << "n,k,d,d_k,trials,max_load_mean,max_load_max,messages_per_ball,bound_leading,verdict\n";
    for (const SweepRow& row : rows) {
        out << row.point.n << ',' << row.point.k << ',' << row.point.d << ',' << row.d_k << ','
            << row.trials << ',' << row.max_load_mean << ',' << row.max_load_max << ','
            << row.messages_per_ball << ',' << row.bound_leading << ','
            << to_string(row.verdict) << '\n';
    }
    return out.str();
}

} // namespace kdchoice
