#pragma once

#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "evground/event_model.hpp"
#include "evground/rng.hpp"

namespace evg {

// Everything the reasoning backend sees for one invocation: instruction
// text, instance reference crops, the most recent frames (newest last), and
// the detector's label. detected_action is absent only for frame-by-frame
// baseline requests, which have no trigger; when present it is never idle.
struct ReasonerRequest {
    std::string instruction;
    std::vector<std::pair<ObjectId, std::string>> object_refs;
    std::vector<std::pair<ActorId, std::string>> person_refs;
    std::optional<std::string> robot_hand_ref;
    std::vector<std::string> recent_frames;   // 1..4 crop references
    std::optional<Verb> detected_action;
    ActorId acting_actor;
    double trigger_time = 0.0;
};

// throws ConfigError on violated request invariants
void validate_request(const ReasonerRequest& request);

// Raw backend output. May be malformed; parsing/validation happens in the
// reasoner, not here.
struct ReasonerResponse {
    std::string raw;
};

class VlmClient {
public:
    virtual ~VlmClient() = default;
    virtual ReasonerResponse query(const ReasonerRequest& request) = 0;
};

// ---------------------------------------------------------------------------
// Scripted oracle
// ---------------------------------------------------------------------------

// Answers from a scenario's ground-truth events: picks the event with the
// request's actor closest in time to the trigger, refusing beyond
// 2 * delta (mirrors the evaluation's temporal tolerance).
class ScriptedClient : public VlmClient {
public:
    explicit ScriptedClient(std::vector<EventTuple> events, double delta = 5.0);

    ReasonerResponse query(const ReasonerRequest& request) override;

    // response text for one ground-truth event (also used by tests)
    static std::string render_answer(const EventTuple& event);

private:
    std::vector<EventTuple> events_;
    double delta_;
};

// ---------------------------------------------------------------------------
// Fault injection
// ---------------------------------------------------------------------------

struct FaultConfig {
    double p_object = 0.0;
    double p_action = 0.0;
    double p_relation = 0.0;
    double p_flag = 0.0;
    double p_malformed = 0.0;
    uint64_t seed = 0;
};

// Wraps any backend and corrupts each response field independently with the
// configured probabilities. The random stream is serialized per
// request-arrival order, so a fixed seed and request order give identical
// responses. With all probabilities zero the response passes through
// byte-identical.
class FaultInjectingClient : public VlmClient {
public:
    FaultInjectingClient(std::shared_ptr<VlmClient> inner, FaultConfig config);

    ReasonerResponse query(const ReasonerRequest& request) override;

private:
    std::shared_ptr<VlmClient> inner_;
    FaultConfig config_;
    std::mutex mutex_;
    Rng rng_;
};

// ---------------------------------------------------------------------------
// Remote backend
// ---------------------------------------------------------------------------

struct RemoteConfig {
    std::string endpoint;              // e.g. http://127.0.0.1:8080/reason
    std::string auth_token;            // optional bearer token
    double timeout_s = 10.0;
    int retries = 2;                   // after the first attempt
    double backoff_initial_s = 0.5;    // doubles per retry
};

// Single-POST JSON backend for real VLM services. Crop references that name
// readable files are inlined as base64 payloads; other references are passed
// through as-is. Never blocks past timeout * (retries + 1) plus backoff.
class RemoteClient : public VlmClient {
public:
    explicit RemoteClient(RemoteConfig config);

    ReasonerResponse query(const ReasonerRequest& request) override;

    // exposed for tests
    static std::string build_body(const ReasonerRequest& request);

private:
    RemoteConfig config_;
    std::string host_;
    int port_ = 80;
    std::string path_;
};

} // namespace evg
