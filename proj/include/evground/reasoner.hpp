#pragma once

#include <deque>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "evground/memory.hpp"
#include "evground/stream_io.hpp"
#include "evground/trigger.hpp"
#include "evground/vlm_client.hpp"

namespace evg {

// Ring of the most recent frames, oldest first, capacity exactly 4.
class FrameBuffer {
public:
    static constexpr size_t kCapacity = 4;

    void push(FrameRecord frame);
    bool empty() const { return frames_.empty(); }
    size_t size() const { return frames_.size(); }
    const FrameRecord& at(size_t index) const { return frames_.at(index); }

private:
    std::deque<FrameRecord> frames_;
};

struct ReasonerOptions {
    // pass the acting person's crop as the recent-frame input instead of the
    // full scene view
    bool cropped_frames = false;
};

// One dropped invocation: which trigger, what failed, and what the backend
// actually said.
struct Diagnostic {
    TriggerEvent trigger;
    std::string error_kind;
    std::string raw_excerpt;
};

std::string diagnostics_to_jsonl(const std::vector<Diagnostic>& diagnostics);

// Builds the backend request for one trigger from memory and the frame
// buffer: every registered object and person reference, the robot hand when
// a robot is registered, the buffered recent frames, and the detected label.
// Throws UnknownActor / EmptyBuffer.
ReasonerRequest assemble_context(const TriggerEvent& trigger, const MemoryStore& memory,
                                 const FrameBuffer& buffer, const ReasonerOptions& options = {});

// Parses the backend's raw output into a validated tuple. Tuple time and
// actor always come from the trigger; the response cannot reassign them. The
// action is taken from the response (it is the refined interpretation; a
// disagreement with the trigger label is legitimate).
// Throws ParseFailure / UnknownReference / VocabularyError and the tuple
// validation errors.
EventTuple interpret_response(const ReasonerResponse& response, const TriggerEvent& trigger,
                              const MemoryStore& memory);

// assemble -> query -> interpret -> append. On any failure no tuple is
// emitted; one diagnostic is recorded and the pipeline continues.
std::optional<EventTuple> on_trigger(const TriggerEvent& trigger, MemoryStore& memory,
                                     const FrameBuffer& buffer, VlmClient& client,
                                     const ReasonerOptions& options,
                                     std::vector<Diagnostic>& diagnostics);

// ---------------------------------------------------------------------------
// Stream driver
// ---------------------------------------------------------------------------

struct RunOptions {
    DebounceConfig debounce{2};
    // one backend invocation per frame instead of trigger gating (the
    // captioning baseline; requests carry no detected action on idle frames)
    bool baseline = false;
    bool cropped_frames = false;
    // parallel query window for backends without a seeded random stream
    // (remote); scripted/fault dispatch stays sequential so seeds reproduce
    int in_flight = 2;
    bool parallel_queries = false;
};

struct RunStats {
    uint64_t frames = 0;
    uint64_t triggers = 0;
    uint64_t calls = 0;
    uint64_t tuples = 0;
    uint64_t diagnostics = 0;
    double wall_ms_total = 0.0;

    double wall_ms_per_call() const { return calls ? wall_ms_total / double(calls) : 0.0; }
};

// Streams frames through trigger -> reasoner, bootstrapping memory from the
// object registry and from actors as they first appear.
RunStats run_stream(const std::vector<FrameRecord>& frames, const ObjectRegistry& registry,
                    VlmClient& client, const RunOptions& options, MemoryStore& memory,
                    std::vector<Diagnostic>& diagnostics);

} // namespace evg
