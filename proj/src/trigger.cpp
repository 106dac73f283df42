#include "evground/trigger.hpp"

namespace evg {

TriggerDetector::TriggerDetector(DebounceConfig config) : config_(config) {
    if (config_.min_hold_frames < 1)
        throw Error(Errc::ConfigError, "min_hold_frames must be >= 1");
}

std::vector<TriggerEvent> TriggerDetector::observe(const FrameRecord& frame) {
    if (have_previous_ &&
        (frame.frame_index <= previous_frame_ || frame.time <= previous_time_))
        throw Error(Errc::OutOfOrderFrame, "frames must arrive in stream order");
    have_previous_ = true;
    previous_frame_ = frame.frame_index;
    previous_time_ = frame.time;

    std::vector<TriggerEvent> triggers;
    for (const auto& [actor, label] : frame.actions) {
        RunState& run = runs_[actor];   // fresh actors start on an empty run
        if (run.length == 0 || label != run.label) {
            run.label = label;
            run.start_time = frame.time;
            run.start_frame = frame.frame_index;
            run.length = 1;
            run.fired = false;
        } else {
            ++run.length;
        }
        if (run.label != Verb::Idle && !run.fired && run.length >= config_.min_hold_frames) {
            triggers.push_back(TriggerEvent{actor, run.label, run.start_time, run.start_frame});
            run.fired = true;
        }
    }
    return triggers;   // map iteration puts these in canonical actor order
}

void TriggerDetector::reset() {
    runs_.clear();
    have_previous_ = false;
    previous_frame_ = 0;
    previous_time_ = 0.0;
}

} // namespace evg
