#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "evground/event_model.hpp"

namespace evg {

// ---------------------------------------------------------------------------
// Stream records
// ---------------------------------------------------------------------------

// One time-slice of the detector stream: per-actor action labels plus crop
// references. Crops are opaque strings; this module never opens image files.
struct FrameRecord {
    uint64_t frame_index = 0;
    double time = 0.0;
    std::map<ActorId, Verb> actions;
    // keyed by every tracked actor (robots included); wire field "person_crops"
    std::map<ActorId, std::string> person_crops;
    std::optional<std::string> scene_crop;

    bool operator==(const FrameRecord&) const = default;
};

struct RegistryEntry {
    ObjectId id;
    std::string crop;
    double first_seen = 0.0;
    std::optional<std::string> label_hint;

    bool operator==(const RegistryEntry&) const = default;
};

struct ObjectRegistry {
    std::vector<RegistryEntry> entries;

    bool operator==(const ObjectRegistry&) const = default;
};

enum class Scenario : uint8_t { Sorting, Pouring, Handover };
enum class Constellation : uint8_t { OneP, TwoP, OnePR, TwoPR };

std::string_view scenario_name(Scenario scenario);            // "sorting" ...
std::optional<Scenario> scenario_from_name(std::string_view name);
std::string_view constellation_name(Constellation c);        // "1P", "2P", "1P+R", "2P+R"
std::optional<Constellation> constellation_from_name(std::string_view name);
bool constellation_has_robot(Constellation c);
int constellation_person_count(Constellation c);

struct GroundTruthFile {
    Scenario scenario = Scenario::Sorting;
    Constellation constellation = Constellation::OneP;
    std::vector<EventTuple> tuples;   // kept in tuple_order

    bool operator==(const GroundTruthFile&) const = default;
};

// ---------------------------------------------------------------------------
// Tuple <-> JSON (the normative line schema shared by ground truth,
// predictions, scripts and snapshots)
// ---------------------------------------------------------------------------

nlohmann::json tuple_to_json(const EventTuple& tuple);
// line is used in error reports only (0 = not line-addressed)
EventTuple tuple_from_json(const nlohmann::json& value, int line = 0);

// ---------------------------------------------------------------------------
// .frames.jsonl
// ---------------------------------------------------------------------------

// Incremental line-delimited parser; enforces strictly increasing
// (frame, time) across the records it has produced.
class FrameStreamParser {
public:
    explicit FrameStreamParser(std::istream& input);

    // next record in file order, or nullopt at end of stream
    std::optional<FrameRecord> next();

private:
    std::istream& input_;
    int line_ = 0;
    bool have_previous_ = false;
    uint64_t previous_frame_ = 0;
    double previous_time_ = 0.0;
};

std::vector<FrameRecord> parse_frame_stream(std::istream& input);
std::vector<FrameRecord> parse_frame_stream(const std::string& text);
size_t write_frame_stream(const std::vector<FrameRecord>& records, std::ostream& sink);

// ---------------------------------------------------------------------------
// .objects.json
// ---------------------------------------------------------------------------

ObjectRegistry parse_object_registry(std::istream& input);
ObjectRegistry parse_object_registry(const std::string& text);
size_t write_object_registry(const ObjectRegistry& registry, std::ostream& sink);

// ---------------------------------------------------------------------------
// .events.jsonl (ground truth: header line + tuple lines; predictions:
// tuple lines only)
// ---------------------------------------------------------------------------

GroundTruthFile parse_ground_truth(std::istream& input);
GroundTruthFile parse_ground_truth(const std::string& text);
size_t write_ground_truth(const GroundTruthFile& file, std::ostream& sink);

// Tolerates (skips) a leading ground-truth header line so a ground-truth
// file can be read where predictions are expected.
std::vector<EventTuple> parse_predictions(std::istream& input);
std::vector<EventTuple> parse_predictions(const std::string& text);
size_t write_predictions(const std::vector<EventTuple>& tuples, std::ostream& sink);

// ---------------------------------------------------------------------------
// file helpers
// ---------------------------------------------------------------------------

std::string read_text_file(const std::string& path);       // throws Errc::IoError
void write_text_file(const std::string& path, const std::string& text);

} // namespace evg
