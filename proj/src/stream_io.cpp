#include "evground/stream_io.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace evg {

using nlohmann::json;

namespace {

[[noreturn]] void malformed(int line, const std::string& what) {
    throw Error(Errc::MalformedLine, what, line);
}

json parse_json_line(const std::string& text, int line) {
    json value = json::parse(text, nullptr, /*allow_exceptions=*/false);
    if (value.is_discarded()) malformed(line, "not valid JSON");
    if (!value.is_object()) malformed(line, "expected a JSON object");
    return value;
}

// Reads the next line, rejecting blank lines; returns nullopt at end of input.
std::optional<std::string> next_line(std::istream& input, int& line_no) {
    std::string text;
    if (!std::getline(input, text)) return std::nullopt;
    ++line_no;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (text.find_first_not_of(" \t") == std::string::npos)
        malformed(line_no, "blank line");
    return text;
}

const json& require_field(const json& record, const char* key, int line) {
    auto it = record.find(key);
    if (it == record.end()) malformed(line, std::string("missing field '") + key + "'");
    return *it;
}

std::string require_string(const json& record, const char* key, int line) {
    const json& value = require_field(record, key, line);
    if (!value.is_string()) malformed(line, std::string("field '") + key + "' must be a string");
    return value.get<std::string>();
}

double require_number(const json& record, const char* key, int line) {
    const json& value = require_field(record, key, line);
    if (!value.is_number()) malformed(line, std::string("field '") + key + "' must be a number");
    return value.get<double>();
}

ActorId parse_actor_id(const std::string& text, int line) {
    if (auto id = ActorId::try_parse(text)) return *id;
    malformed(line, "not a canonical actor id: '" + text + "'");
}

Verb parse_verb(const std::string& text, int line) {
    if (auto verb = verb_from_name(text)) return *verb;
    throw Error(Errc::UnknownVerb, "verb '" + text + "' is outside the vocabulary", line);
}

size_t emit_line(const json& value, std::ostream& sink) {
    std::string text = value.dump();
    sink << text << '\n';
    if (!sink) throw Error(Errc::IoError, "failed writing output line");
    return text.size() + 1;
}

} // namespace

// ---------------------------------------------------------------------------
// scenario / constellation names
// ---------------------------------------------------------------------------

std::string_view scenario_name(Scenario scenario) {
    switch (scenario) {
        case Scenario::Sorting: return "sorting";
        case Scenario::Pouring: return "pouring";
        case Scenario::Handover: return "handover";
    }
    return "sorting";
}

std::optional<Scenario> scenario_from_name(std::string_view name) {
    if (name == "sorting") return Scenario::Sorting;
    if (name == "pouring") return Scenario::Pouring;
    if (name == "handover") return Scenario::Handover;
    return std::nullopt;
}

std::string_view constellation_name(Constellation c) {
    switch (c) {
        case Constellation::OneP: return "1P";
        case Constellation::TwoP: return "2P";
        case Constellation::OnePR: return "1P+R";
        case Constellation::TwoPR: return "2P+R";
    }
    return "1P";
}

std::optional<Constellation> constellation_from_name(std::string_view name) {
    if (name == "1P") return Constellation::OneP;
    if (name == "2P") return Constellation::TwoP;
    if (name == "1P+R") return Constellation::OnePR;
    if (name == "2P+R") return Constellation::TwoPR;
    return std::nullopt;
}

bool constellation_has_robot(Constellation c) {
    return c == Constellation::OnePR || c == Constellation::TwoPR;
}

int constellation_person_count(Constellation c) {
    return (c == Constellation::TwoP || c == Constellation::TwoPR) ? 2 : 1;
}

// ---------------------------------------------------------------------------
// tuple <-> JSON
// ---------------------------------------------------------------------------

json tuple_to_json(const EventTuple& tuple) {
    json value{
        {"actor", tuple.actor.render()},
        {"action", std::string(verb_name(tuple.action))},
        {"object", tuple.object.render()},
        {"robot_interaction", tuple.robot_interaction},
        {"time", tuple.time},
    };
    if (tuple.relation)
        value["relation"] = {{"rho", std::string(rho_name(tuple.relation->rho))},
                             {"target", render_entity(tuple.relation->target)}};
    return value;
}

EventTuple tuple_from_json(const json& value, int line) {
    if (!value.is_object()) malformed(line, "expected a JSON object");
    ActorId actor = parse_actor_id(require_string(value, "actor", line), line);
    Verb action = parse_verb(require_string(value, "action", line), line);
    std::string object_text = require_string(value, "object", line);
    auto object = ObjectId::try_parse(object_text);
    if (!object) malformed(line, "not a canonical object id: '" + object_text + "'");

    std::optional<SpatialRelation> relation;
    if (auto it = value.find("relation"); it != value.end() && !it->is_null()) {
        if (!it->is_object()) malformed(line, "field 'relation' must be an object");
        std::string rho_text = require_string(*it, "rho", line);
        auto rho = rho_from_name(rho_text);
        if (!rho) malformed(line, "unknown relation '" + rho_text + "'");
        std::string target_text = require_string(*it, "target", line);
        auto target = try_parse_entity(target_text);
        if (!target) malformed(line, "relation target '" + target_text + "' is not a canonical id");
        try {
            relation = SpatialRelation::make(*rho, *target);
        } catch (const Error& err) {
            throw Error(err.code(), err.what(), line);
        }
    }

    const json& flag = require_field(value, "robot_interaction", line);
    if (!flag.is_boolean()) malformed(line, "field 'robot_interaction' must be a boolean");
    double time = require_number(value, "time", line);

    try {
        return make_tuple(actor, action, *object, std::move(relation),
                          flag.get<bool>(), time);
    } catch (const Error& err) {
        if (line > 0 && err.line() == 0) throw Error(err.code(), err.what(), line);
        throw;
    }
}

// ---------------------------------------------------------------------------
// .frames.jsonl
// ---------------------------------------------------------------------------

FrameStreamParser::FrameStreamParser(std::istream& input) : input_(input) {}

std::optional<FrameRecord> FrameStreamParser::next() {
    auto text = next_line(input_, line_);
    if (!text) return std::nullopt;
    const int line = line_;
    json value = parse_json_line(*text, line);

    FrameRecord record;
    const json& frame = require_field(value, "frame", line);
    if (!frame.is_number_integer() || frame.get<int64_t>() < 0)
        malformed(line, "field 'frame' must be a non-negative integer");
    record.frame_index = frame.get<uint64_t>();
    record.time = require_number(value, "time", line);

    const json& actions = require_field(value, "actions", line);
    if (!actions.is_object()) malformed(line, "field 'actions' must be an object");
    for (const auto& [key, verb] : actions.items()) {
        if (!verb.is_string()) malformed(line, "action label for '" + key + "' must be a string");
        record.actions.emplace(parse_actor_id(key, line),
                               parse_verb(verb.get<std::string>(), line));
    }

    const json& crops = require_field(value, "person_crops", line);
    if (!crops.is_object()) malformed(line, "field 'person_crops' must be an object");
    for (const auto& [key, crop] : crops.items()) {
        if (!crop.is_string()) malformed(line, "crop for '" + key + "' must be a string");
        record.person_crops.emplace(parse_actor_id(key, line), crop.get<std::string>());
    }

    if (auto it = value.find("scene_crop"); it != value.end() && !it->is_null()) {
        if (!it->is_string()) malformed(line, "field 'scene_crop' must be a string");
        record.scene_crop = it->get<std::string>();
    }

    auto same_keys = std::equal(record.actions.begin(), record.actions.end(),
                                record.person_crops.begin(), record.person_crops.end(),
                                [](const auto& a, const auto& c) { return a.first == c.first; });
    if (record.actions.size() != record.person_crops.size() || !same_keys)
        malformed(line, "'actions' and 'person_crops' must key the same actors");

    if (have_previous_ &&
        (record.frame_index <= previous_frame_ || record.time <= previous_time_))
        throw Error(Errc::NonMonotoneTime,
                    "frame/time must strictly increase within a stream", line);
    have_previous_ = true;
    previous_frame_ = record.frame_index;
    previous_time_ = record.time;
    return record;
}

std::vector<FrameRecord> parse_frame_stream(std::istream& input) {
    FrameStreamParser parser(input);
    std::vector<FrameRecord> records;
    while (auto record = parser.next()) records.push_back(std::move(*record));
    return records;
}

std::vector<FrameRecord> parse_frame_stream(const std::string& text) {
    std::istringstream input(text);
    return parse_frame_stream(input);
}

size_t write_frame_stream(const std::vector<FrameRecord>& records, std::ostream& sink) {
    size_t bytes = 0;
    for (const FrameRecord& record : records) {
        json actions = json::object();
        for (const auto& [actor, verb] : record.actions)
            actions[actor.render()] = std::string(verb_name(verb));
        json crops = json::object();
        for (const auto& [actor, crop] : record.person_crops)
            crops[actor.render()] = crop;
        json value{{"frame", record.frame_index},
                   {"time", record.time},
                   {"actions", std::move(actions)},
                   {"person_crops", std::move(crops)}};
        if (record.scene_crop) value["scene_crop"] = *record.scene_crop;
        bytes += emit_line(value, sink);
    }
    return bytes;
}

// ---------------------------------------------------------------------------
// .objects.json
// ---------------------------------------------------------------------------

ObjectRegistry parse_object_registry(std::istream& input) {
    std::string text((std::istreambuf_iterator<char>(input)),
                     std::istreambuf_iterator<char>());
    return parse_object_registry(text);
}

ObjectRegistry parse_object_registry(const std::string& text) {
    json value = json::parse(text, nullptr, false);
    if (value.is_discarded() || !value.is_object())
        malformed(0, "object registry must be a JSON object");
    const json& objects = require_field(value, "objects", 0);
    if (!objects.is_array()) malformed(0, "field 'objects' must be an array");

    ObjectRegistry registry;
    for (const json& entry : objects) {
        if (!entry.is_object()) malformed(0, "registry entries must be objects");
        RegistryEntry out;
        std::string id_text = require_string(entry, "id", 0);
        auto id = ObjectId::try_parse(id_text);
        if (!id) malformed(0, "not a canonical object id: '" + id_text + "'");
        out.id = *id;
        out.crop = require_string(entry, "crop", 0);
        out.first_seen = require_number(entry, "first_seen", 0);
        if (out.first_seen < 0) malformed(0, "first_seen must be >= 0");
        if (auto it = entry.find("label_hint"); it != entry.end() && !it->is_null()) {
            if (!it->is_string()) malformed(0, "field 'label_hint' must be a string");
            out.label_hint = it->get<std::string>();
        }
        for (const RegistryEntry& seen : registry.entries)
            if (seen.id == out.id)
                malformed(0, "duplicate object id " + out.id.render());
        registry.entries.push_back(std::move(out));
    }
    return registry;
}

size_t write_object_registry(const ObjectRegistry& registry, std::ostream& sink) {
    json objects = json::array();
    for (const RegistryEntry& entry : registry.entries) {
        json value{{"id", entry.id.render()},
                   {"crop", entry.crop},
                   {"first_seen", entry.first_seen}};
        if (entry.label_hint) value["label_hint"] = *entry.label_hint;
        objects.push_back(std::move(value));
    }
    return emit_line(json{{"objects", std::move(objects)}}, sink);
}

// ---------------------------------------------------------------------------
// .events.jsonl
// ---------------------------------------------------------------------------

namespace {

bool looks_like_header(const json& value) {
    return value.is_object() && value.contains("scenario") && !value.contains("actor");
}

} // namespace

GroundTruthFile parse_ground_truth(std::istream& input) {
    int line_no = 0;
    auto header_text = next_line(input, line_no);
    if (!header_text) malformed(1, "missing ground-truth header line");
    json header = parse_json_line(*header_text, line_no);
    if (!looks_like_header(header))
        malformed(line_no, "first line must be the {scenario, constellation} header");

    GroundTruthFile file;
    std::string scenario_text = require_string(header, "scenario", line_no);
    auto scenario = scenario_from_name(scenario_text);
    if (!scenario)
        throw Error(Errc::UnknownScenario, "unknown scenario '" + scenario_text + "'", line_no);
    file.scenario = *scenario;
    std::string constellation_text = require_string(header, "constellation", line_no);
    auto constellation = constellation_from_name(constellation_text);
    if (!constellation)
        throw Error(Errc::UnknownScenario,
                    "unknown constellation '" + constellation_text + "'", line_no);
    file.constellation = *constellation;

    while (auto text = next_line(input, line_no))
        file.tuples.push_back(tuple_from_json(parse_json_line(*text, line_no), line_no));
    std::sort(file.tuples.begin(), file.tuples.end(), tuple_less);
    return file;
}

GroundTruthFile parse_ground_truth(const std::string& text) {
    std::istringstream input(text);
    return parse_ground_truth(input);
}

size_t write_ground_truth(const GroundTruthFile& file, std::ostream& sink) {
    size_t bytes = emit_line(
        json{{"scenario", std::string(scenario_name(file.scenario))},
             {"constellation", std::string(constellation_name(file.constellation))}},
        sink);
    std::vector<EventTuple> sorted = file.tuples;
    std::sort(sorted.begin(), sorted.end(), tuple_less);
    for (const EventTuple& tuple : sorted) bytes += emit_line(tuple_to_json(tuple), sink);
    return bytes;
}

std::vector<EventTuple> parse_predictions(std::istream& input) {
    std::vector<EventTuple> tuples;
    int line_no = 0;
    while (auto text = next_line(input, line_no)) {
        json value = parse_json_line(*text, line_no);
        if (line_no == 1 && looks_like_header(value)) continue;
        tuples.push_back(tuple_from_json(value, line_no));
    }
    return tuples;
}

std::vector<EventTuple> parse_predictions(const std::string& text) {
    std::istringstream input(text);
    return parse_predictions(input);
}

size_t write_predictions(const std::vector<EventTuple>& tuples, std::ostream& sink) {
    size_t bytes = 0;
    for (const EventTuple& tuple : tuples) bytes += emit_line(tuple_to_json(tuple), sink);
    return bytes;
}

// ---------------------------------------------------------------------------
// file helpers
// ---------------------------------------------------------------------------

std::string read_text_file(const std::string& path) {
    std::ifstream input(path, std::ios::binary);
    if (!input) throw Error(Errc::IoError, "cannot open " + path);
    std::ostringstream buffer;
    buffer << input.rdbuf();
    return buffer.str();
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream output(path, std::ios::binary);
    if (!output) throw Error(Errc::IoError, "cannot open " + path + " for writing");
    output << text;
    if (!output) throw Error(Errc::IoError, "failed writing " + path);
}

} // namespace evg
