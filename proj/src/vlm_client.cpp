#include "evground/vlm_client.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

namespace evg {

using nlohmann::json;

void validate_request(const ReasonerRequest& request) {
    if (request.recent_frames.empty() || request.recent_frames.size() > 4)
        throw Error(Errc::ConfigError, "recent_frames must hold 1..4 crop references");
    if (request.detected_action && *request.detected_action == Verb::Idle)
        throw Error(Errc::ConfigError, "detected_action cannot be idle");
}

// ---------------------------------------------------------------------------
// ScriptedClient
// ---------------------------------------------------------------------------

ScriptedClient::ScriptedClient(std::vector<EventTuple> events, double delta)
    : events_(std::move(events)), delta_(delta) {
    if (delta_ <= 0) throw Error(Errc::ConfigError, "delta must be positive");
    std::sort(events_.begin(), events_.end(), tuple_less);
}

std::string ScriptedClient::render_answer(const EventTuple& event) {
    json value{{"object", event.object.render()},
               {"action", std::string(verb_name(event.action))},
               {"robot_interaction", event.robot_interaction}};
    if (event.relation)
        value[std::string(rho_name(event.relation->rho))] =
            render_entity(event.relation->target);
    return value.dump();
}

ReasonerResponse ScriptedClient::query(const ReasonerRequest& request) {
    validate_request(request);
    const EventTuple* best = nullptr;
    double best_gap = 0.0;
    for (const EventTuple& event : events_) {
        if (event.actor != request.acting_actor) continue;
        double gap = std::fabs(event.time - request.trigger_time);
        if (!best || gap < best_gap) {   // ties keep the earlier event
            best = &event;
            best_gap = gap;
        }
    }
    if (!best || best_gap > 2.0 * delta_)
        throw Error(Errc::NoScriptedAnswer,
                    "no scripted event for " + request.acting_actor.render() +
                        " near t=" + std::to_string(request.trigger_time));
    return ReasonerResponse{render_answer(*best)};
}

// ---------------------------------------------------------------------------
// FaultInjectingClient
// ---------------------------------------------------------------------------

namespace {

void check_probability(double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0))
        throw Error(Errc::ConfigError, std::string(name) + " must lie in [0, 1]");
}

// uniform over {1..max(8, current)} minus current
uint32_t different_object_index(uint32_t current, Rng& rng) {
    uint32_t space = std::max<uint32_t>(8, current);
    uint32_t draw = static_cast<uint32_t>(rng.below(space - 1)) + 1;
    return draw >= current ? draw + 1 : draw;
}

Verb different_verb(Verb current, Rng& rng) {
    std::vector<Verb> pool;
    for (Verb verb : kAllVerbs)
        if (verb != Verb::Idle && verb != current) pool.push_back(verb);
    return pool[rng.below(pool.size())];
}

void perturb_relation(json& value, Rng& rng) {
    const char* found = nullptr;
    for (const char* key : {"on", "in", "to"})
        if (value.contains(key)) found = key;

    if (!found) {
        // add a relation that can never be a self-relation
        uint32_t object_index = 1;
        if (value.contains("object") && value["object"].is_string())
            if (auto id = ObjectId::try_parse(value["object"].get<std::string>()))
                object_index = id->index;
        value["on"] = ObjectId{object_index + 1}.render();
        return;
    }

    std::string target = value[found].is_string() ? value[found].get<std::string>() : "";
    if (std::string_view(found) == "to") {
        // retarget within the same entity kind
        if (auto actor = ActorId::try_parse(target)) {
            std::vector<std::string> pool = {"person_1", "person_2", "robot_1"};
            pool.erase(std::remove(pool.begin(), pool.end(), actor->render()), pool.end());
            value["to"] = pool[rng.below(pool.size())];
        } else if (auto object = ObjectId::try_parse(target)) {
            value["to"] = ObjectId{different_object_index(object->index, rng)}.render();
        } else {
            value["to"] = "object_1";
        }
    } else {
        value.erase(found);
        value[std::string_view(found) == "on" ? "in" : "on"] = target;
    }
}

} // namespace

FaultInjectingClient::FaultInjectingClient(std::shared_ptr<VlmClient> inner,
                                           FaultConfig config)
    : inner_(std::move(inner)), config_(config), rng_(config.seed) {
    if (!inner_) throw Error(Errc::ConfigError, "fault wrapper needs an inner backend");
    check_probability(config_.p_object, "p_object");
    check_probability(config_.p_action, "p_action");
    check_probability(config_.p_relation, "p_relation");
    check_probability(config_.p_flag, "p_flag");
    check_probability(config_.p_malformed, "p_malformed");
}

ReasonerResponse FaultInjectingClient::query(const ReasonerRequest& request) {
    ReasonerResponse response = inner_->query(request);

    std::lock_guard lock(mutex_);
    bool any = config_.p_object > 0 || config_.p_action > 0 || config_.p_relation > 0 ||
               config_.p_flag > 0 || config_.p_malformed > 0;
    if (!any) return response;   // byte-identical passthrough

    if (rng_.bernoulli(config_.p_malformed)) {
        response.raw = response.raw.substr(0, response.raw.size() / 2);
        return response;
    }

    json value = json::parse(response.raw, nullptr, false);
    if (value.is_discarded() || !value.is_object()) return response;

    if (rng_.bernoulli(config_.p_action) && value.contains("action") &&
        value["action"].is_string()) {
        Verb current = verb_from_name(value["action"].get<std::string>()).value_or(Verb::Idle);
        value["action"] = std::string(verb_name(different_verb(current, rng_)));
    }
    if (rng_.bernoulli(config_.p_object) && value.contains("object") &&
        value["object"].is_string()) {
        uint32_t current = 1;
        if (auto id = ObjectId::try_parse(value["object"].get<std::string>()))
            current = id->index;
        value["object"] = ObjectId{different_object_index(current, rng_)}.render();
    }
    if (rng_.bernoulli(config_.p_relation)) perturb_relation(value, rng_);
    if (rng_.bernoulli(config_.p_flag) && value.contains("robot_interaction") &&
        value["robot_interaction"].is_boolean())
        value["robot_interaction"] = !value["robot_interaction"].get<bool>();

    response.raw = value.dump();
    return response;
}

// ---------------------------------------------------------------------------
// RemoteClient
// ---------------------------------------------------------------------------

namespace {

std::string base64_encode(const std::string& bytes) {
    static const char table[] =
        "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    std::string out;
    out.reserve((bytes.size() + 2) / 3 * 4);
    size_t i = 0;
    while (i + 2 < bytes.size()) {
        uint32_t n = (uint8_t(bytes[i]) << 16) | (uint8_t(bytes[i + 1]) << 8) |
                     uint8_t(bytes[i + 2]);
        out += table[(n >> 18) & 63];
        out += table[(n >> 12) & 63];
        out += table[(n >> 6) & 63];
        out += table[n & 63];
        i += 3;
    }
    if (i + 1 == bytes.size()) {
        uint32_t n = uint8_t(bytes[i]) << 16;
        out += table[(n >> 18) & 63];
        out += table[(n >> 12) & 63];
        out += "==";
    } else if (i + 2 == bytes.size()) {
        uint32_t n = (uint8_t(bytes[i]) << 16) | (uint8_t(bytes[i + 1]) << 8);
        out += table[(n >> 18) & 63];
        out += table[(n >> 12) & 63];
        out += table[(n >> 6) & 63];
        out += '=';
    }
    return out;
}

json image_entry(const std::string& role, const std::string& id, const std::string& ref) {
    json entry{{"role", role}, {"id", id}, {"name", ref}};
    std::error_code ec;
    if (std::filesystem::is_regular_file(ref, ec)) {
        std::ifstream input(ref, std::ios::binary);
        std::string bytes((std::istreambuf_iterator<char>(input)),
                          std::istreambuf_iterator<char>());
        entry["data"] = base64_encode(bytes);
    } else {
        entry["data"] = ref;   // opaque reference passes through
    }
    return entry;
}

} // namespace

RemoteClient::RemoteClient(RemoteConfig config) : config_(std::move(config)) {
    const std::string& url = config_.endpoint;
    const std::string scheme = "http://";
    if (url.substr(0, scheme.size()) != scheme)
        throw Error(Errc::ConfigError, "remote endpoint must be an http:// URL");
    std::string rest = url.substr(scheme.size());
    size_t slash = rest.find('/');
    std::string authority = slash == std::string::npos ? rest : rest.substr(0, slash);
    path_ = slash == std::string::npos ? "/" : rest.substr(slash);
    size_t colon = authority.find(':');
    if (colon == std::string::npos) {
        host_ = authority;
    } else {
        host_ = authority.substr(0, colon);
        port_ = std::stoi(authority.substr(colon + 1));
    }
    if (host_.empty()) throw Error(Errc::ConfigError, "remote endpoint has no host");
}

std::string RemoteClient::build_body(const ReasonerRequest& request) {
    json images = json::array();
    for (const auto& [id, crop] : request.object_refs)
        images.push_back(image_entry("object", id.render(), crop));
    for (const auto& [id, crop] : request.person_refs)
        images.push_back(image_entry("person", id.render(), crop));
    if (request.robot_hand_ref)
        images.push_back(image_entry("robot_hand", "robot_hand", *request.robot_hand_ref));
    for (size_t i = 0; i < request.recent_frames.size(); ++i)
        images.push_back(image_entry("recent", "frame_" + std::to_string(i),
                                     request.recent_frames[i]));
    json body{{"instruction", request.instruction},
              {"images", std::move(images)},
              {"actor", request.acting_actor.render()},
              {"trigger_time", request.trigger_time}};
    if (request.detected_action)
        body["detected_action"] = std::string(verb_name(*request.detected_action));
    return body.dump();
}

ReasonerResponse RemoteClient::query(const ReasonerRequest& request) {
    validate_request(request);
    std::string body = build_body(request);

    httplib::Headers headers;
    if (!config_.auth_token.empty())
        headers.emplace("Authorization", "Bearer " + config_.auth_token);

    double backoff = config_.backoff_initial_s;
    httplib::Error last_error = httplib::Error::Success;
    int last_status = 0;
    for (int attempt = 0; attempt <= config_.retries; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(std::chrono::duration<double>(backoff));
            backoff *= 2.0;
        }
        httplib::Client client(host_, port_);
        auto seconds = static_cast<time_t>(config_.timeout_s);
        auto micros = static_cast<time_t>((config_.timeout_s - double(seconds)) * 1e6);
        client.set_connection_timeout(seconds, micros);
        client.set_read_timeout(seconds, micros);
        client.set_write_timeout(seconds, micros);

        auto result = client.Post(path_, headers, body, "application/json");
        if (result && result->status == 200) return ReasonerResponse{result->body};
        if (result && result->status >= 400 && result->status < 500)
            throw Error(Errc::RemoteError,
                        "remote backend returned status " + std::to_string(result->status));
        last_error = result ? httplib::Error::Success : result.error();
        last_status = result ? result->status : 0;
    }
    if (last_error == httplib::Error::ConnectionTimeout || last_error == httplib::Error::Read)
        throw Error(Errc::Timeout, "remote backend timed out after retries");
    throw Error(Errc::RemoteError,
                last_status != 0
                    ? "remote backend failed with status " + std::to_string(last_status)
                    : "remote backend unreachable after retries");
}

} // namespace evg
