#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "evground/stream_io.hpp"

namespace evg {

// Tuple roles entering the evaluation. The actor is never compared: correct
// actor assignment is implicit in the matching itself.
enum class Role : uint8_t { Overall, Action, Object, Relation, Flag };

inline constexpr std::array<Role, 4> kFieldRoles = {Role::Action, Role::Object,
                                                    Role::Relation, Role::Flag};

std::string_view role_name(Role role);   // "overall", "x", "o", "r", "i"

struct MatchConfig {
    double delta = 5.0;   // temporal tolerance, seconds
    // verbose alternative: assign by time window alone, then score each
    // role's field agreement within the assigned pairs
    bool role_within_overall = false;
};

// role-restricted field agreement; relation equality treats absent = absent
bool field_match(const EventTuple& gt, const EventTuple& pred, Role role);

struct MatchedPair {
    size_t gt_index = 0;
    size_t pred_index = 0;
    double abs_dt = 0.0;
};

struct MatchReport {
    std::vector<MatchedPair> pairs;
    size_t tp = 0;
    size_t fp = 0;
    size_t fn = 0;
    double precision = 1.0;
    double recall = 1.0;
    double gs = 1.0;
};

// P = tp/(tp+fp), R = tp/(tp+fn), GS = 2PR/(P+R); empty denominators score 1
// (vacuous perfection), GS = 0 when P + R = 0
MatchReport make_report(std::vector<MatchedPair> pairs, size_t gt_count, size_t pred_count);

// Greedy delta-tolerant assignment: ground truths in ascending start time
// (ties by tuple_order); each takes the unassigned field-matching prediction
// with minimal |dt| within delta, ties toward the earlier prediction time,
// then input order. Each prediction is assigned at most once.
MatchReport match_events(const std::vector<EventTuple>& gts,
                         const std::vector<EventTuple>& preds, const MatchConfig& config,
                         Role role = Role::Overall);

// Independent brute-force reference: maximum achievable TP over all injective
// partial assignments respecting field_match and the delta window. Bounded to
// 8x8 instances (throws TooLarge beyond that).
size_t oracle_match(const std::vector<EventTuple>& gts, const std::vector<EventTuple>& preds,
                    const MatchConfig& config, Role role = Role::Overall);

// ---------------------------------------------------------------------------
// Recording-level reports
// ---------------------------------------------------------------------------

struct RecordingScore {
    std::string name;
    Scenario scenario = Scenario::Sorting;
    Constellation constellation = Constellation::OneP;
    size_t gt_count = 0;
    size_t pred_count = 0;
    MatchReport overall;
    std::map<Role, MatchReport> roles;   // x, o, r, i
};

RecordingScore score_recording(const GroundTruthFile& gt, const std::vector<EventTuple>& preds,
                               const MatchConfig& config, std::string name = {});

// GS per delta for the same files; non-decreasing in delta
std::vector<std::pair<double, double>> ablate_delta(const std::vector<EventTuple>& gts,
                                                    const std::vector<EventTuple>& preds,
                                                    const std::vector<double>& deltas);

// ---------------------------------------------------------------------------
// Aggregation across recordings
// ---------------------------------------------------------------------------

struct PooledCounts {
    size_t tp = 0;
    size_t fp = 0;
    size_t fn = 0;

    void add(const MatchReport& report);
    MatchReport report() const;   // micro-averaged scores
};

struct SuiteSummary {
    std::vector<RecordingScore> recordings;
    // micro-averaged GS per (scenario, constellation) cell, overall column,
    // and per-role; macro = mean of per-recording GS
    std::map<std::pair<Scenario, Constellation>, MatchReport> cells;
    MatchReport overall;
    std::map<Role, MatchReport> roles;
    std::map<Scenario, std::map<Role, MatchReport>> scenario_roles;
    double macro_mean_gs = 0.0;
};

SuiteSummary summarize(std::vector<RecordingScore> recordings);

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

std::string render_recording_report(const RecordingScore& score, bool per_role);
std::string render_suite_tables(const SuiteSummary& summary);
std::string render_ablation_table(const std::vector<std::pair<double, double>>& rows);

nlohmann::json recording_to_json(const RecordingScore& score);
nlohmann::json summary_to_json(const SuiteSummary& summary);

} // namespace evg
