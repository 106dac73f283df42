#include "evground/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "evground/rng.hpp"

namespace evg {

using nlohmann::json;

namespace {

std::vector<ActorId> constellation_actors(Constellation constellation) {
    std::vector<ActorId> actors;
    for (int k = 1; k <= constellation_person_count(constellation); ++k)
        actors.push_back(ActorId{ActorKind::Person, uint32_t(k)});
    if (constellation_has_robot(constellation))
        actors.push_back(ActorId{ActorKind::Robot, 1});
    return actors;
}

std::string object_crop(ObjectId id) { return "crops/" + id.render() + ".png"; }

std::string actor_crop(ActorId id, uint64_t frame) {
    return "crops/" + id.render() + "_f" + std::to_string(frame) + ".png";
}

} // namespace

void validate_script(const ScenarioScript& script) {
    auto fail = [](const std::string& what) { throw Error(Errc::InvalidScript, what); };

    if (script.frame_period_s <= 0) fail("frame_period_s must be positive");
    if (script.event_duration_s <= 0) fail("event_duration_s must be positive");
    for (double p : {script.noise.label_flip_prob, script.noise.drop_prob})
        if (!(p >= 0.0 && p <= 1.0)) fail("noise probabilities must lie in [0, 1]");
    if (script.noise.timing_jitter_std_s < 0) fail("timing jitter std must be >= 0");

    std::set<ActorId> allowed;
    for (ActorId actor : constellation_actors(script.constellation)) allowed.insert(actor);
    std::map<ActorId, std::vector<double>> starts;
    for (const EventTuple& event : script.events) {
        if (!allowed.count(event.actor))
            fail("actor " + event.actor.render() + " is not part of constellation " +
                 std::string(constellation_name(script.constellation)));
        if (event.relation)
            if (const auto* target = std::get_if<ActorId>(&event.relation->target);
                target && !allowed.count(*target))
                fail("relation target " + target->render() +
                     " is not part of the constellation");
        starts[event.actor].push_back(event.time);
    }
    for (auto& [actor, times] : starts) {
        std::sort(times.begin(), times.end());
        for (size_t i = 1; i < times.size(); ++i)
            if (times[i] < times[i - 1] + script.event_duration_s)
                fail("events of " + actor.render() + " overlap in time");
    }
    if (script.stream_end_s) {
        double last_end = 0.0;
        for (const EventTuple& event : script.events)
            last_end = std::max(last_end, event.time + script.event_duration_s);
        if (*script.stream_end_s < last_end)
            fail("stream_end_s cuts the last event short");
    }
}

GeneratedEpisode generate(const ScenarioScript& script) {
    validate_script(script);
    GeneratedEpisode out;
    out.oracle = script;

    out.ground_truth.scenario = script.scenario;
    out.ground_truth.constellation = script.constellation;
    out.ground_truth.tuples = script.events;
    std::sort(out.ground_truth.tuples.begin(), out.ground_truth.tuples.end(), tuple_less);

    // registry: referenced objects plus hinted extras, in id order
    std::map<ObjectId, std::optional<std::string>> objects;
    for (const EventTuple& event : script.events) {
        objects.emplace(event.object, std::nullopt);
        if (event.relation)
            if (const auto* target = std::get_if<ObjectId>(&event.relation->target))
                objects.emplace(*target, std::nullopt);
    }
    for (const auto& [id, hint] : script.object_hints) objects[id] = hint;
    for (const auto& [id, hint] : objects)
        out.registry.entries.push_back(RegistryEntry{id, object_crop(id), 0.0, hint});

    Rng rng(script.seed);

    // jittered label-run starts (stream only; ground truth keeps script times)
    struct Run {
        double start;
        Verb verb;
    };
    std::map<ActorId, std::vector<Run>> runs;
    double jittered_last_end = 0.0;
    std::vector<EventTuple> ordered = out.ground_truth.tuples;
    for (const EventTuple& event : ordered) {
        double start = event.time;
        if (script.noise.timing_jitter_std_s > 0)
            start = std::max(0.0, start + rng.gaussian() * script.noise.timing_jitter_std_s);
        runs[event.actor].push_back(Run{start, event.action});
        jittered_last_end = std::max(jittered_last_end, start + script.event_duration_s);
    }

    double stream_end = script.stream_end_s.value_or(
        std::max(jittered_last_end,
                 ordered.empty() ? 0.0 : ordered.back().time + script.event_duration_s) +
        2.0);
    std::vector<ActorId> actors = constellation_actors(script.constellation);

    for (uint64_t index = 0;; ++index) {
        double time = double(index) * script.frame_period_s;
        if (time >= stream_end - 1e-9) break;
        if (script.noise.drop_prob > 0 && rng.bernoulli(script.noise.drop_prob)) continue;

        FrameRecord frame;
        frame.frame_index = index;
        frame.time = time;
        frame.scene_crop = "crops/scene_f" + std::to_string(index) + ".png";
        for (ActorId actor : actors) {
            Verb label = Verb::Idle;
            double best_start = -1.0;
            auto it = runs.find(actor);
            if (it != runs.end())
                for (const Run& run : it->second)
                    if (time >= run.start && time < run.start + script.event_duration_s &&
                        run.start > best_start) {
                        // overlapping jittered runs resolve to the later start
                        label = run.verb;
                        best_start = run.start;
                    }
            if (script.noise.label_flip_prob > 0 &&
                rng.bernoulli(script.noise.label_flip_prob)) {
                // uniform over the other 12 verbs
                size_t draw = rng.below(kAllVerbs.size() - 1);
                Verb flipped = kAllVerbs[draw];
                if (flipped == label) flipped = kAllVerbs[kAllVerbs.size() - 1];
                label = flipped;
            }
            frame.actions[actor] = label;
            frame.person_crops[actor] = actor_crop(actor, index);
        }
        out.frames.push_back(std::move(frame));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Builtin scripts
// ---------------------------------------------------------------------------

namespace {

constexpr ActorId P1{ActorKind::Person, 1};
constexpr ActorId P2{ActorKind::Person, 2};
constexpr ActorId R1{ActorKind::Robot, 1};

EventTuple evt(ActorId actor, Verb verb, uint32_t object, double time,
               std::optional<SpatialRelation> relation = {}, bool robot_flag = false) {
    return make_tuple(actor, verb, ObjectId{object}, std::move(relation), robot_flag, time);
}

SpatialRelation rel_on(uint32_t object) { return SpatialRelation::make(Rho::On, ObjectId{object}); }
SpatialRelation rel_in(uint32_t object) { return SpatialRelation::make(Rho::In, ObjectId{object}); }
SpatialRelation rel_to(ActorId actor) { return SpatialRelation::make(Rho::To, actor); }

std::vector<std::pair<ObjectId, std::string>> sorting_objects() {
    return {{ObjectId{1}, "apple"}, {ObjectId{2}, "apple"},  {ObjectId{3}, "banana"},
            {ObjectId{4}, "orange"}, {ObjectId{5}, "bowl"},  {ObjectId{6}, "plate"}};
}

std::vector<std::pair<ObjectId, std::string>> pouring_objects() {
    return {{ObjectId{1}, "bottle"}, {ObjectId{2}, "cup"}, {ObjectId{3}, "cup"},
            {ObjectId{4}, "cup"}};
}

std::vector<std::pair<ObjectId, std::string>> handover_objects() {
    return {{ObjectId{1}, "cup"}, {ObjectId{2}, "banana"}, {ObjectId{3}, "bottle"},
            {ObjectId{4}, "plate"}};
}

ScenarioScript base_script(std::string name, Scenario scenario, Constellation constellation,
                           uint64_t seed,
                           std::vector<std::pair<ObjectId, std::string>> hints,
                           std::vector<EventTuple> events) {
    ScenarioScript script;
    script.name = std::move(name);
    script.scenario = scenario;
    script.constellation = constellation;
    script.seed = seed;
    script.object_hints = std::move(hints);
    script.events = std::move(events);
    validate_script(script);
    return script;
}

std::vector<ScenarioScript> make_builtins() {
    std::vector<ScenarioScript> scripts;

    scripts.push_back(base_script(
        "sorting_1P", Scenario::Sorting, Constellation::OneP, 1001, sorting_objects(),
        {evt(P1, Verb::Grasp, 1, 2.0), evt(P1, Verb::PlaceDown, 1, 4.5, rel_in(5)),
         evt(P1, Verb::Grasp, 3, 7.0), evt(P1, Verb::PlaceDown, 3, 9.5, rel_on(6)),
         evt(P1, Verb::Grasp, 4, 12.0), evt(P1, Verb::PlaceDown, 4, 14.5, rel_in(5)),
         evt(P1, Verb::Grasp, 2, 17.0), evt(P1, Verb::PlaceDown, 2, 19.5, rel_on(6))}));

    scripts.push_back(base_script(
        "sorting_1P_b", Scenario::Sorting, Constellation::OneP, 1002, sorting_objects(),
        {evt(P1, Verb::Grasp, 4, 1.5), evt(P1, Verb::PlaceDown, 4, 4.0, rel_on(6)),
         evt(P1, Verb::Grasp, 1, 6.5), evt(P1, Verb::PlaceDown, 1, 9.0, rel_in(5)),
         evt(P1, Verb::Grasp, 2, 11.5), evt(P1, Verb::PlaceDown, 2, 14.0, rel_in(5))}));

    scripts.push_back(base_script(
        "sorting_2P", Scenario::Sorting, Constellation::TwoP, 1003, sorting_objects(),
        {evt(P1, Verb::Grasp, 1, 2.0), evt(P2, Verb::Grasp, 3, 3.2),
         evt(P1, Verb::PlaceDown, 1, 5.0, rel_in(5)),
         evt(P2, Verb::PlaceDown, 3, 6.2, rel_on(6)), evt(P1, Verb::Grasp, 2, 8.0),
         evt(P2, Verb::Grasp, 4, 9.2), evt(P1, Verb::PlaceDown, 2, 11.0, rel_in(5)),
         evt(P2, Verb::PlaceDown, 4, 12.2, rel_in(5))}));

    scripts.push_back(base_script(
        "sorting_2P_b", Scenario::Sorting, Constellation::TwoP, 1004, sorting_objects(),
        {evt(P1, Verb::Grasp, 4, 1.5), evt(P1, Verb::Handover, 4, 4.0, rel_to(P2)),
         evt(P2, Verb::PlaceDown, 4, 6.5, rel_in(5)), evt(P2, Verb::Grasp, 3, 9.0),
         evt(P2, Verb::Handover, 3, 11.5, rel_to(P1)),
         evt(P1, Verb::PlaceDown, 3, 14.0, rel_on(6))}));

    scripts.push_back(base_script(
        "sorting_1P_R", Scenario::Sorting, Constellation::OnePR, 1005, sorting_objects(),
        {evt(P1, Verb::Grasp, 1, 2.0),
         evt(P1, Verb::Handover, 1, 4.5, rel_to(R1), true),
         evt(R1, Verb::PlaceDown, 1, 7.0, rel_in(5)), evt(P1, Verb::Grasp, 3, 9.5),
         evt(P1, Verb::PlaceDown, 3, 12.0, rel_on(6)), evt(R1, Verb::Grasp, 4, 14.5),
         evt(R1, Verb::PlaceDown, 4, 17.0, rel_in(5))}));

    scripts.push_back(base_script(
        "sorting_1P_R_b", Scenario::Sorting, Constellation::OnePR, 1006, sorting_objects(),
        {evt(R1, Verb::Grasp, 2, 1.5),
         evt(R1, Verb::Handover, 2, 4.0, rel_to(P1), true),
         evt(P1, Verb::PlaceDown, 2, 6.5, rel_on(6)), evt(P1, Verb::Grasp, 4, 9.0),
         evt(P1, Verb::Handover, 4, 11.5, rel_to(R1), true),
         evt(R1, Verb::PlaceDown, 4, 14.0, rel_in(5))}));

    scripts.push_back(base_script(
        "sorting_2P_R", Scenario::Sorting, Constellation::TwoPR, 1007, sorting_objects(),
        {evt(P1, Verb::Grasp, 1, 2.0),
         evt(P1, Verb::Handover, 1, 4.5, rel_to(R1), true),
         evt(R1, Verb::PlaceDown, 1, 7.0, rel_in(5)), evt(P2, Verb::Grasp, 4, 9.0),
         evt(P2, Verb::PlaceDown, 4, 11.5, rel_in(5)), evt(P2, Verb::Grasp, 3, 14.0),
         evt(P2, Verb::PlaceDown, 3, 16.5, rel_on(6))}));

    scripts.push_back(base_script(
        "sorting_2P_R_b", Scenario::Sorting, Constellation::TwoPR, 1008, sorting_objects(),
        {evt(P2, Verb::Grasp, 2, 1.5), evt(P2, Verb::Handover, 2, 4.0, rel_to(P1)),
         evt(P1, Verb::PlaceDown, 2, 6.5, rel_in(5)), evt(R1, Verb::Grasp, 3, 9.0),
         evt(R1, Verb::Handover, 3, 11.5, rel_to(P2), true),
         evt(P2, Verb::PlaceDown, 3, 14.0, rel_on(6)), evt(P1, Verb::Grasp, 4, 16.5),
         evt(P1, Verb::PlaceDown, 4, 19.0, rel_on(6))}));

    scripts.push_back(base_script(
        "pouring_2P", Scenario::Pouring, Constellation::TwoP, 1009, pouring_objects(),
        {evt(P1, Verb::Grasp, 1, 2.0), evt(P2, Verb::Hold, 2, 3.5),
         evt(P1, Verb::Pour, 1, 6.0, rel_in(2)), evt(P1, Verb::PlaceDown, 1, 9.0),
         evt(P2, Verb::Grasp, 3, 11.5), evt(P2, Verb::PlaceDown, 3, 14.0)}));

    scripts.push_back(base_script(
        "pouring_2P_b", Scenario::Pouring, Constellation::TwoP, 1010, pouring_objects(),
        {evt(P2, Verb::Grasp, 1, 1.5), evt(P2, Verb::Pour, 1, 4.5, rel_in(4)),
         evt(P1, Verb::Hold, 4, 5.5), evt(P2, Verb::Pour, 1, 8.0, rel_in(3)),
         evt(P2, Verb::PlaceDown, 1, 11.0), evt(P1, Verb::Grasp, 4, 13.5)}));

    scripts.push_back(base_script(
        "pouring_1P_R", Scenario::Pouring, Constellation::OnePR, 1011, pouring_objects(),
        {evt(R1, Verb::Grasp, 1, 2.0), evt(R1, Verb::Pour, 1, 5.0, rel_in(2)),
         evt(P1, Verb::Hold, 2, 6.5), evt(R1, Verb::PlaceDown, 1, 8.5),
         evt(P1, Verb::Grasp, 2, 11.0),
         evt(P1, Verb::Handover, 2, 13.5, rel_to(R1), true)}));

    scripts.push_back(base_script(
        "pouring_1P_R_b", Scenario::Pouring, Constellation::OnePR, 1012, pouring_objects(),
        {evt(P1, Verb::Grasp, 1, 1.5), evt(P1, Verb::Pour, 1, 4.5, rel_in(3)),
         evt(P1, Verb::Handover, 1, 7.5, rel_to(R1), true),
         evt(R1, Verb::Pour, 1, 10.5, rel_in(4)), evt(R1, Verb::PlaceDown, 1, 13.5)}));

    scripts.push_back(base_script(
        "handover_2P", Scenario::Handover, Constellation::TwoP, 1013, handover_objects(),
        {evt(P1, Verb::Grasp, 1, 2.0), evt(P1, Verb::Handover, 1, 4.5, rel_to(P2)),
         evt(P2, Verb::PlaceDown, 1, 7.0, rel_on(4)), evt(P2, Verb::Grasp, 2, 9.5),
         evt(P2, Verb::Handover, 2, 12.0, rel_to(P1)),
         evt(P1, Verb::PlaceDown, 2, 14.5, rel_on(4))}));

    scripts.push_back(base_script(
        "handover_2P_b", Scenario::Handover, Constellation::TwoP, 1014, handover_objects(),
        {evt(P2, Verb::Grasp, 3, 1.5), evt(P2, Verb::Handover, 3, 4.0, rel_to(P1)),
         evt(P1, Verb::PlaceDown, 3, 6.5), evt(P1, Verb::Grasp, 2, 9.0),
         evt(P1, Verb::Handover, 2, 11.5, rel_to(P2)),
         evt(P2, Verb::PlaceDown, 2, 14.0, rel_on(4))}));

    scripts.push_back(base_script(
        "handover_1P_R", Scenario::Handover, Constellation::OnePR, 1015, handover_objects(),
        {evt(P1, Verb::Grasp, 1, 2.0),
         evt(P1, Verb::Handover, 1, 4.5, rel_to(R1), true),
         evt(R1, Verb::PlaceDown, 1, 7.0, rel_on(4)), evt(R1, Verb::Grasp, 2, 9.5),
         evt(R1, Verb::Handover, 2, 12.0, rel_to(P1), true),
         evt(P1, Verb::PlaceDown, 2, 14.5, rel_on(4))}));

    scripts.push_back(base_script(
        "handover_1P_R_b", Scenario::Handover, Constellation::OnePR, 1016, handover_objects(),
        {evt(R1, Verb::Grasp, 3, 1.5),
         evt(R1, Verb::Handover, 3, 4.0, rel_to(P1), true), evt(P1, Verb::Hold, 3, 6.5),
         evt(P1, Verb::Handover, 3, 9.0, rel_to(R1), true),
         evt(R1, Verb::PlaceDown, 3, 11.5)}));

    return scripts;
}

// the three-event worked example: apple handed to the robot, placed into the
// bowl, orange follows
ScenarioScript make_worked_example() {
    return base_script(
        "sorting_example_s3", Scenario::Sorting, Constellation::TwoPR, 1000,
        {{ObjectId{1}, "apple"}, {ObjectId{2}, "bowl"}, {ObjectId{3}, "orange"}},
        {evt(P1, Verb::Handover, 1, 2.0, rel_to(R1), true),
         evt(R1, Verb::PlaceDown, 1, 5.0, rel_in(2)),
         evt(P2, Verb::PlaceDown, 3, 8.0, rel_in(2))});
}

} // namespace

std::vector<ScenarioScript> builtin_suite() { return make_builtins(); }

std::optional<ScenarioScript> find_builtin(std::string_view name) {
    if (name == "sorting_example_s3") return make_worked_example();
    for (ScenarioScript& script : make_builtins())
        if (script.name == name) return std::move(script);
    return std::nullopt;
}

std::vector<std::string> builtin_names() {
    std::vector<std::string> names;
    for (const ScenarioScript& script : make_builtins()) names.push_back(script.name);
    names.push_back("sorting_example_s3");
    return names;
}

// ---------------------------------------------------------------------------
// Script JSON
// ---------------------------------------------------------------------------

ScenarioScript script_from_json(const json& value) {
    auto fail = [](const std::string& what) { throw Error(Errc::InvalidScript, what); };
    if (!value.is_object()) fail("script must be a JSON object");

    ScenarioScript script;
    if (value.contains("name")) script.name = value["name"].get<std::string>();

    std::string scenario_text = value.value("scenario", "");
    auto scenario = scenario_from_name(scenario_text);
    if (!scenario)
        throw Error(Errc::UnknownScenario, "unknown scenario '" + scenario_text + "'");
    script.scenario = *scenario;

    std::string constellation_text = value.value("constellation", "");
    auto constellation = constellation_from_name(constellation_text);
    if (!constellation)
        throw Error(Errc::UnknownScenario,
                    "unknown constellation '" + constellation_text + "'");
    script.constellation = *constellation;

    script.seed = value.value("seed", uint64_t(0));
    script.frame_period_s = value.value("frame_period_s", 0.1);
    script.event_duration_s = value.value("event_duration_s", 1.5);
    if (value.contains("stream_end_s") && !value["stream_end_s"].is_null())
        script.stream_end_s = value["stream_end_s"].get<double>();
    if (value.contains("noise")) {
        const json& noise = value["noise"];
        script.noise.label_flip_prob = noise.value("label_flip_prob", 0.0);
        script.noise.timing_jitter_std_s = noise.value("timing_jitter_std_s", 0.0);
        script.noise.drop_prob = noise.value("drop_prob", 0.0);
    }
    if (value.contains("objects")) {
        for (const json& entry : value["objects"]) {
            auto id = ObjectId::try_parse(entry.value("id", ""));
            if (!id) fail("object hint with a non-canonical id");
            std::string hint = entry.value("label_hint", "");
            script.object_hints.emplace_back(*id, hint);
        }
    }
    if (!value.contains("events") || !value["events"].is_array())
        fail("script needs an 'events' array");
    int line = 0;
    for (const json& entry : value["events"]) {
        try {
            script.events.push_back(tuple_from_json(entry));
        } catch (const Error& err) {
            fail("event " + std::to_string(line) + ": " + err.what());
        }
        ++line;
    }
    validate_script(script);
    return script;
}

json script_to_json(const ScenarioScript& script) {
    json events = json::array();
    for (const EventTuple& event : script.events) events.push_back(tuple_to_json(event));
    json objects = json::array();
    for (const auto& [id, hint] : script.object_hints)
        objects.push_back({{"id", id.render()}, {"label_hint", hint}});
    json value{{"name", script.name},
               {"scenario", std::string(scenario_name(script.scenario))},
               {"constellation", std::string(constellation_name(script.constellation))},
               {"seed", script.seed},
               {"frame_period_s", script.frame_period_s},
               {"event_duration_s", script.event_duration_s},
               {"noise",
                {{"label_flip_prob", script.noise.label_flip_prob},
                 {"timing_jitter_std_s", script.noise.timing_jitter_std_s},
                 {"drop_prob", script.noise.drop_prob}}},
               {"objects", std::move(objects)},
               {"events", std::move(events)}};
    if (script.stream_end_s) value["stream_end_s"] = *script.stream_end_s;
    return value;
}

} // namespace evg
