#include "evground/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <sstream>

namespace evg {

using nlohmann::json;

std::string_view role_name(Role role) {
    switch (role) {
        case Role::Overall: return "overall";
        case Role::Action: return "x";
        case Role::Object: return "o";
        case Role::Relation: return "r";
        case Role::Flag: return "i";
    }
    return "overall";
}

bool field_match(const EventTuple& gt, const EventTuple& pred, Role role) {
    switch (role) {
        case Role::Action: return gt.action == pred.action;
        case Role::Object: return gt.object == pred.object;
        case Role::Relation: return gt.relation == pred.relation;
        case Role::Flag: return gt.robot_interaction == pred.robot_interaction;
        case Role::Overall:
            return gt.action == pred.action && gt.object == pred.object &&
                   gt.relation == pred.relation &&
                   gt.robot_interaction == pred.robot_interaction;
    }
    return false;
}

MatchReport make_report(std::vector<MatchedPair> pairs, size_t gt_count, size_t pred_count) {
    MatchReport report;
    report.pairs = std::move(pairs);
    report.tp = report.pairs.size();
    report.fp = pred_count - report.tp;
    report.fn = gt_count - report.tp;
    report.precision = pred_count == 0 ? 1.0 : double(report.tp) / double(pred_count);
    report.recall = gt_count == 0 ? 1.0 : double(report.tp) / double(gt_count);
    double sum = report.precision + report.recall;
    report.gs = sum == 0.0 ? 0.0 : 2.0 * report.precision * report.recall / sum;
    return report;
}

namespace {

// shared greedy core, generic over the field predicate
std::vector<MatchedPair> greedy_assign(
    const std::vector<EventTuple>& gts, const std::vector<EventTuple>& preds, double delta,
    const std::function<bool(const EventTuple&, const EventTuple&)>& compatible) {
    std::vector<size_t> order(gts.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        if (gts[a].time != gts[b].time) return gts[a].time < gts[b].time;
        auto cmp = tuple_order(gts[a], gts[b]);
        if (cmp != std::strong_ordering::equal) return cmp == std::strong_ordering::less;
        return a < b;
    });

    std::vector<bool> taken(preds.size(), false);
    std::vector<MatchedPair> pairs;
    for (size_t gi : order) {
        const EventTuple& gt = gts[gi];
        ptrdiff_t best = -1;
        for (size_t pi = 0; pi < preds.size(); ++pi) {
            if (taken[pi]) continue;
            const EventTuple& pred = preds[pi];
            double gap = std::fabs(pred.time - gt.time);
            if (gap > delta || !compatible(gt, pred)) continue;
            if (best < 0) {
                best = ptrdiff_t(pi);
                continue;
            }
            double best_gap = std::fabs(preds[best].time - gt.time);
            // closest first, then earlier prediction time, then input order
            if (gap < best_gap ||
                (gap == best_gap && preds[pi].time < preds[best].time))
                best = ptrdiff_t(pi);
        }
        if (best >= 0) {
            taken[best] = true;
            pairs.push_back(MatchedPair{gi, size_t(best),
                                        std::fabs(preds[best].time - gt.time)});
        }
    }
    return pairs;
}

} // namespace

MatchReport match_events(const std::vector<EventTuple>& gts,
                         const std::vector<EventTuple>& preds, const MatchConfig& config,
                         Role role) {
    if (config.delta <= 0) throw Error(Errc::ConfigError, "delta must be positive");
    auto pairs = greedy_assign(gts, preds, config.delta,
                               [role](const EventTuple& g, const EventTuple& p) {
                                   return field_match(g, p, role);
                               });
    return make_report(std::move(pairs), gts.size(), preds.size());
}

size_t oracle_match(const std::vector<EventTuple>& gts, const std::vector<EventTuple>& preds,
                    const MatchConfig& config, Role role) {
    if (gts.size() > 8 || preds.size() > 8)
        throw Error(Errc::TooLarge, "oracle matching is bounded to 8x8 instances");
    if (config.delta <= 0) throw Error(Errc::ConfigError, "delta must be positive");

    const size_t gt_count = gts.size();
    std::vector<uint32_t> compatible(gt_count, 0);
    for (size_t gi = 0; gi < gt_count; ++gi)
        for (size_t pi = 0; pi < preds.size(); ++pi)
            if (field_match(gts[gi], preds[pi], role) &&
                std::fabs(preds[pi].time - gts[gi].time) <= config.delta)
                compatible[gi] |= (1u << pi);

    // exhaustive over all injective partial mappings, memoized on
    // (next ground truth, used predictions)
    const size_t mask_count = size_t(1) << preds.size();
    std::vector<int8_t> memo((gt_count + 1) * mask_count, -1);
    std::function<int8_t(size_t, uint32_t)> best = [&](size_t gi, uint32_t used) -> int8_t {
        if (gi == gt_count) return 0;
        int8_t& slot = memo[gi * mask_count + used];
        if (slot >= 0) return slot;
        int8_t result = best(gi + 1, used);   // leave this ground truth unmatched
        uint32_t options = compatible[gi] & ~used;
        while (options) {
            uint32_t bit = options & (~options + 1);
            options ^= bit;
            result = std::max<int8_t>(result, int8_t(1 + best(gi + 1, used | bit)));
        }
        slot = result;
        return result;
    };
    return size_t(best(0, 0));
}

// ---------------------------------------------------------------------------
// Recording-level reports
// ---------------------------------------------------------------------------

RecordingScore score_recording(const GroundTruthFile& gt, const std::vector<EventTuple>& preds,
                               const MatchConfig& config, std::string name) {
    RecordingScore score;
    score.name = std::move(name);
    score.scenario = gt.scenario;
    score.constellation = gt.constellation;
    score.gt_count = gt.tuples.size();
    score.pred_count = preds.size();
    score.overall = match_events(gt.tuples, preds, config, Role::Overall);

    if (config.role_within_overall) {
        // assign by time window alone, then score field agreement inside the
        // assigned pairs
        auto pairs = greedy_assign(gt.tuples, preds, config.delta,
                                   [](const EventTuple&, const EventTuple&) { return true; });
        for (Role role : kFieldRoles) {
            std::vector<MatchedPair> agreeing;
            for (const MatchedPair& pair : pairs)
                if (field_match(gt.tuples[pair.gt_index], preds[pair.pred_index], role))
                    agreeing.push_back(pair);
            score.roles[role] = make_report(std::move(agreeing), gt.tuples.size(), preds.size());
        }
    } else {
        for (Role role : kFieldRoles)
            score.roles[role] = match_events(gt.tuples, preds, config, role);
    }
    return score;
}

std::vector<std::pair<double, double>> ablate_delta(const std::vector<EventTuple>& gts,
                                                    const std::vector<EventTuple>& preds,
                                                    const std::vector<double>& deltas) {
    std::vector<std::pair<double, double>> rows;
    for (double delta : deltas) {
        if (delta <= 0) throw Error(Errc::ConfigError, "deltas must be positive");
        MatchConfig config{delta};
        rows.emplace_back(delta, match_events(gts, preds, config).gs);
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Aggregation
// ---------------------------------------------------------------------------

void PooledCounts::add(const MatchReport& report) {
    tp += report.tp;
    fp += report.fp;
    fn += report.fn;
}

MatchReport PooledCounts::report() const {
    MatchReport out;
    out.tp = tp;
    out.fp = fp;
    out.fn = fn;
    out.precision = tp + fp == 0 ? 1.0 : double(tp) / double(tp + fp);
    out.recall = tp + fn == 0 ? 1.0 : double(tp) / double(tp + fn);
    double sum = out.precision + out.recall;
    out.gs = sum == 0.0 ? 0.0 : 2.0 * out.precision * out.recall / sum;
    return out;
}

SuiteSummary summarize(std::vector<RecordingScore> recordings) {
    SuiteSummary summary;
    std::map<std::pair<Scenario, Constellation>, PooledCounts> cells;
    PooledCounts overall;
    std::map<Role, PooledCounts> roles;
    std::map<Scenario, std::map<Role, PooledCounts>> scenario_roles;
    double gs_sum = 0.0;

    for (const RecordingScore& score : recordings) {
        cells[{score.scenario, score.constellation}].add(score.overall);
        overall.add(score.overall);
        gs_sum += score.overall.gs;
        for (const auto& [role, report] : score.roles) {
            roles[role].add(report);
            scenario_roles[score.scenario][role].add(report);
        }
    }

    for (const auto& [key, pooled] : cells) summary.cells[key] = pooled.report();
    summary.overall = overall.report();
    for (const auto& [role, pooled] : roles) summary.roles[role] = pooled.report();
    for (const auto& [scenario, by_role] : scenario_roles)
        for (const auto& [role, pooled] : by_role)
            summary.scenario_roles[scenario][role] = pooled.report();
    summary.macro_mean_gs = recordings.empty() ? 1.0 : gs_sum / double(recordings.size());
    summary.recordings = std::move(recordings);
    return summary;
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

namespace {

std::string fixed3(double value) {
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "%.3f", value);
    return buffer;
}

void pad(std::string& line, size_t width) {
    if (line.size() < width) line.append(width - line.size(), ' ');
}

} // namespace

std::string render_recording_report(const RecordingScore& score, bool per_role) {
    std::ostringstream out;
    out << "recording: " << (score.name.empty() ? "(unnamed)" : score.name)
        << "  scenario=" << scenario_name(score.scenario)
        << "  constellation=" << constellation_name(score.constellation)
        << "  gt=" << score.gt_count << "  pred=" << score.pred_count << "\n";
    out << "role      GS      P       R       TP   FP   FN\n";
    auto row = [&](std::string_view name, const MatchReport& report) {
        std::string line(name);
        pad(line, 10);
        line += fixed3(report.gs);
        pad(line, 18);
        line += fixed3(report.precision);
        pad(line, 26);
        line += fixed3(report.recall);
        pad(line, 34);
        line += std::to_string(report.tp);
        pad(line, 39);
        line += std::to_string(report.fp);
        pad(line, 44);
        line += std::to_string(report.fn);
        out << line << "\n";
    };
    row("overall", score.overall);
    if (per_role)
        for (Role role : kFieldRoles)
            if (auto it = score.roles.find(role); it != score.roles.end())
                row(role_name(role), it->second);
    return out.str();
}

std::string render_suite_tables(const SuiteSummary& summary) {
    static const std::vector<std::pair<Scenario, std::vector<Constellation>>> kLayout = {
        {Scenario::Sorting,
         {Constellation::OneP, Constellation::TwoP, Constellation::OnePR,
          Constellation::TwoPR}},
        {Scenario::Pouring, {Constellation::TwoP, Constellation::OnePR}},
        {Scenario::Handover, {Constellation::TwoP, Constellation::OnePR}},
    };
    const size_t col = 8;

    std::ostringstream out;
    out << "Grounding Score by scenario and constellation\n";
    std::string header1, header2, values;
    for (const auto& [scenario, constellations] : kLayout) {
        std::string title(scenario_name(scenario));
        pad(header1, header2.size());
        header1 += title;
        for (Constellation c : constellations) {
            std::string cell(constellation_name(c));
            pad(cell, col);
            header2 += cell;
            auto it = summary.cells.find({scenario, c});
            std::string value = it == summary.cells.end() ? "-" : fixed3(it->second.gs);
            pad(value, col);
            values += value;
        }
        header2 += "  ";
        values += "  ";
    }
    header2 += "overall";
    values += fixed3(summary.overall.gs);
    pad(header1, 0);
    out << header1 << "\n" << header2 << "\n" << values << "\n\n";

    out << "Per-role Grounding Score\n";
    std::string roles_header1, roles_header2, roles_values;
    auto role_block = [&](const std::string& title,
                          const std::map<Role, MatchReport>& reports) {
        pad(roles_header1, roles_header2.size());
        roles_header1 += title;
        for (Role role : kFieldRoles) {
            std::string cell(role_name(role));
            pad(cell, col);
            roles_header2 += cell;
            auto it = reports.find(role);
            std::string value = it == reports.end() ? "-" : fixed3(it->second.gs);
            pad(value, col);
            roles_values += value;
        }
        roles_header2 += "  ";
        roles_values += "  ";
    };
    for (const auto& [scenario, reports] : summary.scenario_roles)
        role_block(std::string(scenario_name(scenario)), reports);
    role_block("all", summary.roles);
    out << roles_header1 << "\n" << roles_header2 << "\n" << roles_values << "\n";
    return out.str();
}

std::string render_ablation_table(const std::vector<std::pair<double, double>>& rows) {
    std::ostringstream out;
    std::string header = "delta_s ", values = "GS      ";
    for (const auto& [delta, gs] : rows) {
        char buffer[32];
        std::snprintf(buffer, sizeof(buffer), "%-8.3g", delta);
        header += buffer;
        std::string value = fixed3(gs);
        pad(value, 8);
        values += value;
    }
    out << header << "\n" << values << "\n";
    return out.str();
}

// ---------------------------------------------------------------------------
// JSON reports
// ---------------------------------------------------------------------------

namespace {

json report_to_json(const MatchReport& report) {
    return json{{"tp", report.tp},         {"fp", report.fp},
                {"fn", report.fn},         {"precision", report.precision},
                {"recall", report.recall}, {"gs", report.gs}};
}

json roles_to_json(const std::map<Role, MatchReport>& roles) {
    json out = json::object();
    for (const auto& [role, report] : roles)
        out[std::string(role_name(role))] = report_to_json(report);
    return out;
}

} // namespace

json recording_to_json(const RecordingScore& score) {
    return json{{"name", score.name},
                {"scenario", std::string(scenario_name(score.scenario))},
                {"constellation", std::string(constellation_name(score.constellation))},
                {"gt_count", score.gt_count},
                {"pred_count", score.pred_count},
                {"overall", report_to_json(score.overall)},
                {"roles", roles_to_json(score.roles)}};
}

json summary_to_json(const SuiteSummary& summary) {
    json recordings = json::array();
    for (const RecordingScore& score : summary.recordings)
        recordings.push_back(recording_to_json(score));
    json cells = json::array();
    for (const auto& [key, report] : summary.cells)
        cells.push_back({{"scenario", std::string(scenario_name(key.first))},
                         {"constellation", std::string(constellation_name(key.second))},
                         {"report", report_to_json(report)}});
    json scenario_roles = json::object();
    for (const auto& [scenario, roles] : summary.scenario_roles)
        scenario_roles[std::string(scenario_name(scenario))] = roles_to_json(roles);
    return json{{"recordings", std::move(recordings)},
                {"cells", std::move(cells)},
                {"overall", report_to_json(summary.overall)},
                {"roles", roles_to_json(summary.roles)},
                {"scenario_roles", std::move(scenario_roles)},
                {"macro_mean_gs", summary.macro_mean_gs}};
}

} // namespace evg
