#include "evground/reasoner.hpp"

#include <algorithm>
#include <chrono>
#include <future>
#include <sstream>

#include <json.hpp>

namespace evg {

using nlohmann::json;

void FrameBuffer::push(FrameRecord frame) {
    frames_.push_back(std::move(frame));
    if (frames_.size() > kCapacity) frames_.pop_front();
}

std::string diagnostics_to_jsonl(const std::vector<Diagnostic>& diagnostics) {
    std::string out;
    for (const Diagnostic& diag : diagnostics) {
        json value{{"trigger",
                    {{"actor", diag.trigger.actor.render()},
                     {"action", std::string(verb_name(diag.trigger.action))},
                     {"time", diag.trigger.time},
                     {"frame", diag.trigger.frame_index}}},
                   {"error_kind", diag.error_kind},
                   {"raw_excerpt", diag.raw_excerpt}};
        out += value.dump();
        out += '\n';
    }
    return out;
}

// ---------------------------------------------------------------------------
// Context assembly
// ---------------------------------------------------------------------------

namespace {

std::string build_instruction(ActorId actor, std::optional<Verb> detected) {
    std::ostringstream text;
    text << "You watch a shared tabletop workspace. The reference images identify "
            "known object and person instances; use their ids. The final images are "
            "the most recent captured views, newest last. ";
    if (detected)
        text << "The action detector reports that " << actor.render() << " started '"
             << verb_name(*detected) << "'. ";
    else
        text << "Describe the current activity of " << actor.render() << ". ";
    text << "Identify the involved object, the performed action, an optional spatial "
            "relation, and whether the robot interacts with the acting person. Reply "
            "with exactly one JSON object of the form {\"object\": \"object_k\", "
            "\"action\": \"verb\", \"on\"|\"in\"|\"to\": \"target_id\", "
            "\"robot_interaction\": true|false}; omit the relation key if none applies.";
    return text.str();
}

ReasonerRequest build_request(ActorId actor, std::optional<Verb> detected, double time,
                              const MemoryStore& memory, const FrameBuffer& buffer,
                              bool cropped_frames) {
    if (!memory.has_actor(actor))
        throw Error(Errc::UnknownActor, actor.render() + " is not registered");
    if (buffer.empty())
        throw Error(Errc::EmptyBuffer, "no frames buffered before first trigger");

    ReasonerRequest request;
    request.acting_actor = actor;
    request.detected_action = detected;
    request.trigger_time = time;
    request.instruction = build_instruction(actor, detected);

    Episode episode = memory.episode();
    for (const auto& [id, record] : episode.objects)
        request.object_refs.emplace_back(id, record.crop);
    for (const auto& [id, record] : episode.actors) {
        request.person_refs.emplace_back(id, record.crop);
        if (id.is_robot() && !request.robot_hand_ref) request.robot_hand_ref = record.crop;
    }

    for (size_t i = 0; i < buffer.size(); ++i) {
        const FrameRecord& frame = buffer.at(i);
        auto actor_crop = frame.person_crops.find(actor);
        if (cropped_frames && actor_crop != frame.person_crops.end()) {
            request.recent_frames.push_back(actor_crop->second);
        } else if (frame.scene_crop) {
            request.recent_frames.push_back(*frame.scene_crop);
        } else if (actor_crop != frame.person_crops.end()) {
            request.recent_frames.push_back(actor_crop->second);
        } else if (!frame.person_crops.empty()) {
            request.recent_frames.push_back(frame.person_crops.begin()->second);
        }
    }
    if (request.recent_frames.empty())
        throw Error(Errc::EmptyBuffer, "buffered frames carry no usable crops");
    validate_request(request);
    return request;
}

} // namespace

ReasonerRequest assemble_context(const TriggerEvent& trigger, const MemoryStore& memory,
                                 const FrameBuffer& buffer, const ReasonerOptions& options) {
    return build_request(trigger.actor, trigger.action, trigger.time, memory, buffer,
                         options.cropped_frames);
}

// ---------------------------------------------------------------------------
// Response interpretation
// ---------------------------------------------------------------------------

namespace {

std::string strip_code_fence(std::string text) {
    auto first = text.find_first_not_of(" \t\r\n");
    auto last = text.find_last_not_of(" \t\r\n");
    if (first == std::string::npos) return "";
    text = text.substr(first, last - first + 1);
    if (text.rfind("```", 0) == 0) {
        size_t line_end = text.find('\n');
        if (line_end != std::string::npos) {
            text = text.substr(line_end + 1);
            size_t fence = text.rfind("```");
            if (fence != std::string::npos) text = text.substr(0, fence);
        }
    }
    return text;
}

// VLM outputs frequently use Python-style single quotes; accept that one
// deviation before giving up.
json parse_response_text(const std::string& raw) {
    std::string text = strip_code_fence(raw);
    json value = json::parse(text, nullptr, false);
    if (!value.is_discarded()) return value;
    std::string swapped = text;
    std::replace(swapped.begin(), swapped.end(), '\'', '"');
    value = json::parse(swapped, nullptr, false);
    return value;
}

} // namespace

EventTuple interpret_response(const ReasonerResponse& response, const TriggerEvent& trigger,
                              const MemoryStore& memory) {
    json value = parse_response_text(response.raw);
    if (value.is_discarded() || !value.is_object())
        throw Error(Errc::ParseFailure, "response is not a JSON object");
    if (!value.contains("object") || !value["object"].is_string())
        throw Error(Errc::ParseFailure, "response lacks a string 'object' field");
    if (!value.contains("action") || !value["action"].is_string())
        throw Error(Errc::ParseFailure, "response lacks a string 'action' field");

    std::string action_text = value["action"].get<std::string>();
    auto action = verb_from_name(action_text);
    if (!action)
        throw Error(Errc::VocabularyError, "action '" + action_text + "' is outside the vocabulary");

    std::string object_text = value["object"].get<std::string>();
    auto object = ObjectId::try_parse(object_text);
    if (!object)
        throw Error(Errc::ParseFailure, "'" + object_text + "' is not a canonical object id");
    if (!memory.has_object(*object))
        throw Error(Errc::UnknownReference, object->render() + " is not in memory");

    std::optional<SpatialRelation> relation;
    int relation_keys = 0;
    for (Rho rho : {Rho::On, Rho::In, Rho::To}) {
        auto it = value.find(std::string(rho_name(rho)));
        if (it == value.end()) continue;
        ++relation_keys;
        if (relation_keys > 1)
            throw Error(Errc::ParseFailure, "response carries more than one relation key");
        if (!it->is_string())
            throw Error(Errc::ParseFailure, "relation target must be a string");
        std::string target_text = it->get<std::string>();
        auto target = try_parse_entity(target_text);
        if (!target)
            throw Error(Errc::ParseFailure,
                        "relation target '" + target_text + "' is not a canonical id");
        bool known = std::holds_alternative<ActorId>(*target)
                         ? memory.has_actor(std::get<ActorId>(*target))
                         : memory.has_object(std::get<ObjectId>(*target));
        if (!known)
            throw Error(Errc::UnknownReference,
                        "relation target " + render_entity(*target) + " is not in memory");
        relation = SpatialRelation::make(rho, *target);
    }

    bool flag = false;
    if (auto it = value.find("robot_interaction"); it != value.end()) {
        if (!it->is_boolean())
            throw Error(Errc::ParseFailure, "robot_interaction must be a boolean");
        flag = it->get<bool>();
    }

    return make_tuple(trigger.actor, *action, *object, std::move(relation), flag, trigger.time);
}

std::optional<EventTuple> on_trigger(const TriggerEvent& trigger, MemoryStore& memory,
                                     const FrameBuffer& buffer, VlmClient& client,
                                     const ReasonerOptions& options,
                                     std::vector<Diagnostic>& diagnostics) {
    std::string raw;
    try {
        ReasonerRequest request = assemble_context(trigger, memory, buffer, options);
        ReasonerResponse response = client.query(request);
        raw = response.raw;
        EventTuple tuple = interpret_response(response, trigger, memory);
        memory.append_event(tuple);
        return tuple;
    } catch (const Error& err) {
        diagnostics.push_back(Diagnostic{trigger, std::string(errc_name(err.code())),
                                         raw.substr(0, 120)});
        return std::nullopt;
    }
}

// ---------------------------------------------------------------------------
// Stream driver
// ---------------------------------------------------------------------------

namespace {

// counts and times actual backend invocations
class CountingClient : public VlmClient {
public:
    CountingClient(VlmClient& inner, RunStats& stats) : inner_(inner), stats_(stats) {}

    ReasonerResponse query(const ReasonerRequest& request) override {
        auto start = std::chrono::steady_clock::now();
        struct Meter {
            std::chrono::steady_clock::time_point start;
            RunStats& stats;
            std::mutex& mutex;
            ~Meter() {
                auto end = std::chrono::steady_clock::now();
                std::lock_guard lock(mutex);
                ++stats.calls;
                stats.wall_ms_total +=
                    std::chrono::duration<double, std::milli>(end - start).count();
            }
        } meter{start, stats_, mutex_};
        return inner_.query(request);
    }

private:
    VlmClient& inner_;
    RunStats& stats_;
    std::mutex mutex_;
};

void adopt_new_actors(const FrameRecord& frame, MemoryStore& memory) {
    for (const auto& [actor, crop] : frame.person_crops)
        if (!memory.has_actor(actor)) memory.adopt_actor(actor, crop, frame.time);
}

ActorId pick_baseline_actor(const FrameRecord& frame) {
    for (const auto& [actor, verb] : frame.actions)
        if (verb != Verb::Idle) return actor;
    return frame.actions.begin()->first;
}

} // namespace

RunStats run_stream(const std::vector<FrameRecord>& frames, const ObjectRegistry& registry,
                    VlmClient& client, const RunOptions& options, MemoryStore& memory,
                    std::vector<Diagnostic>& diagnostics) {
    RunStats stats;
    CountingClient counted(client, stats);
    ReasonerOptions reasoner_options{options.cropped_frames};
    TriggerDetector detector(options.debounce);
    FrameBuffer buffer;

    for (const RegistryEntry& entry : registry.entries)
        memory.adopt_object(entry.id, entry.crop, entry.first_seen);

    for (const FrameRecord& frame : frames) {
        ++stats.frames;
        adopt_new_actors(frame, memory);
        buffer.push(frame);

        if (options.baseline) {
            if (frame.actions.empty()) continue;
            ActorId actor = pick_baseline_actor(frame);
            Verb label = frame.actions.at(actor);
            std::optional<Verb> detected =
                label == Verb::Idle ? std::nullopt : std::optional<Verb>(label);
            TriggerEvent pseudo{actor, label, frame.time, frame.frame_index};
            std::string raw;
            try {
                ReasonerRequest request = build_request(actor, detected, frame.time, memory,
                                                        buffer, options.cropped_frames);
                ReasonerResponse response = counted.query(request);
                raw = response.raw;
                EventTuple tuple = interpret_response(response, pseudo, memory);
                memory.append_event(tuple);
                ++stats.tuples;
            } catch (const Error& err) {
                diagnostics.push_back(Diagnostic{pseudo, std::string(errc_name(err.code())),
                                                 raw.substr(0, 120)});
            }
            continue;
        }

        std::vector<TriggerEvent> triggers = detector.observe(frame);
        stats.triggers += triggers.size();

        if (options.parallel_queries && options.in_flight > 1 && triggers.size() > 1) {
            // bounded window: assemble sequentially, query in parallel,
            // interpret/append in trigger order
            for (size_t base = 0; base < triggers.size();
                 base += size_t(options.in_flight)) {
                size_t count = std::min(size_t(options.in_flight), triggers.size() - base);
                std::vector<std::future<ReasonerResponse>> pending;
                std::vector<std::optional<Error>> failures(count);
                for (size_t i = 0; i < count; ++i) {
                    try {
                        ReasonerRequest request = assemble_context(
                            triggers[base + i], memory, buffer, reasoner_options);
                        pending.push_back(std::async(std::launch::async,
                                                     [&counted, request]() {
                                                         return counted.query(request);
                                                     }));
                    } catch (const Error& err) {
                        pending.emplace_back();
                        failures[i] = err;
                    }
                }
                for (size_t i = 0; i < count; ++i) {
                    const TriggerEvent& trigger = triggers[base + i];
                    std::string raw;
                    try {
                        if (failures[i]) throw *failures[i];
                        ReasonerResponse response = pending[i].get();
                        raw = response.raw;
                        EventTuple tuple = interpret_response(response, trigger, memory);
                        memory.append_event(tuple);
                        ++stats.tuples;
                    } catch (const Error& err) {
                        diagnostics.push_back(Diagnostic{
                            trigger, std::string(errc_name(err.code())), raw.substr(0, 120)});
                    }
                }
            }
        } else {
            for (const TriggerEvent& trigger : triggers)
                if (on_trigger(trigger, memory, buffer, counted, reasoner_options, diagnostics))
                    ++stats.tuples;
        }
    }
    stats.diagnostics = diagnostics.size();
    return stats;
}

} // namespace evg
