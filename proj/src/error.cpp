#include "evground/error.hpp"

namespace evg {

std::string_view errc_name(Errc code) {
    switch (code) {
        case Errc::IdleAction: return "IdleAction";
        case Errc::SelfRelation: return "SelfRelation";
        case Errc::NegativeTime: return "NegativeTime";
        case Errc::BadId: return "BadId";
        case Errc::BadRelation: return "BadRelation";
        case Errc::MalformedLine: return "MalformedLine";
        case Errc::NonMonotoneTime: return "NonMonotoneTime";
        case Errc::UnknownVerb: return "UnknownVerb";
        case Errc::UnknownScenario: return "UnknownScenario";
        case Errc::UnknownInstance: return "UnknownInstance";
        case Errc::DuplicateEvent: return "DuplicateEvent";
        case Errc::InvalidWindow: return "InvalidWindow";
        case Errc::SnapshotError: return "SnapshotError";
        case Errc::OutOfOrderFrame: return "OutOfOrderFrame";
        case Errc::NoScriptedAnswer: return "NoScriptedAnswer";
        case Errc::Timeout: return "Timeout";
        case Errc::RemoteError: return "RemoteError";
        case Errc::UnknownActor: return "UnknownActor";
        case Errc::EmptyBuffer: return "EmptyBuffer";
        case Errc::ParseFailure: return "ParseFailure";
        case Errc::UnknownReference: return "UnknownReference";
        case Errc::VocabularyError: return "VocabularyError";
        case Errc::TooLarge: return "TooLarge";
        case Errc::InvalidScript: return "InvalidScript";
        case Errc::IoError: return "IoError";
        case Errc::ConfigError: return "ConfigError";
    }
    return "UnknownError";
}

} // namespace evg
