#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "evground/stream_io.hpp"

namespace evg {

struct NoiseConfig {
    double label_flip_prob = 0.0;     // i.i.d. per frame and actor
    double timing_jitter_std_s = 0.0; // Gaussian shift of event starts, stream only
    double drop_prob = 0.0;           // i.i.d. whole-frame drops

    bool operator==(const NoiseConfig&) const = default;
};

// A timed ground-truth event list plus everything needed to synthesize the
// detector stream it would produce.
struct ScenarioScript {
    std::string name;
    Scenario scenario = Scenario::Sorting;
    Constellation constellation = Constellation::OneP;
    std::vector<EventTuple> events;
    double frame_period_s = 0.1;
    double event_duration_s = 1.5;
    std::optional<double> stream_end_s;   // default: last event end + 2s
    NoiseConfig noise;
    uint64_t seed = 0;
    // optional registry label hints, keyed by object id
    std::vector<std::pair<ObjectId, std::string>> object_hints;

    bool operator==(const ScenarioScript&) const = default;
};

// throws InvalidScript: constellation/actor mismatches, same-actor duration
// overlaps, bad probabilities or periods
void validate_script(const ScenarioScript& script);

struct GeneratedEpisode {
    GroundTruthFile ground_truth;       // the unperturbed event list
    std::vector<FrameRecord> frames;    // labels perturbed by noise under seed
    ObjectRegistry registry;            // every referenced object
    ScenarioScript oracle;              // feeds the scripted backend
};

// Paints each actor idle except during [start, start+duration) of its events,
// then applies seeded noise (jitter moves stream label runs, never the ground
// truth; flips rewrite single frame labels; drops remove whole frames).
// Deterministic: same script and seed give byte-identical outputs.
GeneratedEpisode generate(const ScenarioScript& script);

// The 16-recording matrix: sorting x {1P,2P,1P+R,2P+R}, pouring x {2P,1P+R},
// handover x {2P,1P+R}, two recordings each.
std::vector<ScenarioScript> builtin_suite();

// suite scripts plus the 3-event worked example `sorting_example_s3`
std::optional<ScenarioScript> find_builtin(std::string_view name);
std::vector<std::string> builtin_names();

ScenarioScript script_from_json(const nlohmann::json& value);
nlohmann::json script_to_json(const ScenarioScript& script);

} // namespace evg
