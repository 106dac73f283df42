#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace evg {

// Every failure in the pipeline carries one of these codes. Diagnostics and
// tests key off the code, not the message text.
enum class Errc {
    // event model
    IdleAction,
    SelfRelation,
    NegativeTime,
    BadId,
    BadRelation,
    // wire formats
    MalformedLine,
    NonMonotoneTime,
    UnknownVerb,
    UnknownScenario,
    // memory
    UnknownInstance,
    DuplicateEvent,
    InvalidWindow,
    SnapshotError,
    // trigger
    OutOfOrderFrame,
    // reasoning backend
    NoScriptedAnswer,
    Timeout,
    RemoteError,
    // reasoner
    UnknownActor,
    EmptyBuffer,
    ParseFailure,
    UnknownReference,
    VocabularyError,
    // metrics
    TooLarge,
    // simulator
    InvalidScript,
    // plumbing
    IoError,
    ConfigError,
};

std::string_view errc_name(Errc code);

class Error : public std::runtime_error {
public:
    // line is 1-based where it applies (wire-format parsers), 0 otherwise.
    Error(Errc code, const std::string& message, int line = 0)
        : std::runtime_error(line > 0 ? std::string(errc_name(code)) + " (line " +
                                            std::to_string(line) + "): " + message
                                      : std::string(errc_name(code)) + ": " + message),
          code_(code),
          line_(line) {}

    Errc code() const { return code_; }
    int line() const { return line_; }

private:
    Errc code_;
    int line_;
};

} // namespace evg
