#pragma once

#include <map>
#include <vector>

#include "evground/stream_io.hpp"

namespace evg {

// Emitted when an actor begins a new non-idle action. Gates every reasoner
// invocation; time/frame point at the first frame of the label run, which is
// what ground-truth start times are annotated against.
struct TriggerEvent {
    ActorId actor;
    Verb action = Verb::Grasp;
    double time = 0.0;
    uint64_t frame_index = 0;

    bool operator==(const TriggerEvent&) const = default;
};

struct DebounceConfig {
    // consecutive observations of the same label required before a trigger fires
    int min_hold_frames = 2;
};

// Per-stream state machine over per-actor action labels. A trigger fires at
// the first frame where a new non-idle label has persisted for
// min_hold_frames consecutive observations; transitions into idle never fire.
// Not shared across threads; one detector per stream.
class TriggerDetector {
public:
    explicit TriggerDetector(DebounceConfig config = {});

    // throws OutOfOrderFrame if the frame does not advance the stream
    std::vector<TriggerEvent> observe(const FrameRecord& frame);

    // back to stream start; identical future inputs yield identical triggers
    void reset();

private:
    struct RunState {
        Verb label = Verb::Idle;
        double start_time = 0.0;
        uint64_t start_frame = 0;
        int length = 0;
        bool fired = false;
    };

    DebounceConfig config_;
    std::map<ActorId, RunState> runs_;
    bool have_previous_ = false;
    uint64_t previous_frame_ = 0;
    double previous_time_ = 0.0;
};

} // namespace evg
