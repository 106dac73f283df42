#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "evground/event_model.hpp"

namespace evg {

// One registered physical instance: stable id, reference crop, first sighting.
struct InstanceRecord {
    std::string crop;
    double first_seen = 0.0;

    bool operator==(const InstanceRecord&) const = default;
};

// A consistent read of the store: sorted events plus every registered instance.
struct Episode {
    std::vector<EventTuple> events;                 // tuple_order
    std::map<ActorId, InstanceRecord> actors;
    std::map<ObjectId, InstanceRecord> objects;

    bool operator==(const Episode&) const = default;
};

// Central instance and episode store. Registers actor/object instances with
// stable, never-reused ids, appends event tuples, answers time- and
// actor-scoped queries, and persists snapshots (id counters included, so
// identity survives restarts).
//
// Single writer, multiple concurrent readers; reads see a consistent episode.
class MemoryStore {
public:
    MemoryStore() = default;
    MemoryStore(const MemoryStore& other);
    MemoryStore& operator=(const MemoryStore& other);

    // fresh id, strictly increasing index per kind
    ActorId register_actor(std::string crop, double first_seen,
                           ActorKind kind = ActorKind::Person);
    ObjectId register_object(std::string crop, double first_seen);

    // registers a wire-supplied id (no-op if already present with any crop);
    // advances the matching counter past it so fresh ids never collide
    void adopt_actor(ActorId id, std::string crop, double first_seen);
    void adopt_object(ObjectId id, std::string crop, double first_seen);

    bool has_actor(ActorId id) const;
    bool has_object(ObjectId id) const;
    std::optional<InstanceRecord> find_actor(ActorId id) const;
    std::optional<InstanceRecord> find_object(ObjectId id) const;

    // throws UnknownInstance for unregistered references, DuplicateEvent for
    // an exact duplicate of a stored tuple
    void append_event(const EventTuple& tuple);

    // stored tuples with t0 <= time <= t1 (inclusive), optionally filtered by
    // actor, in tuple_order; throws InvalidWindow when t0 > t1
    std::vector<EventTuple> query_events(double t0, double t1,
                                         std::optional<ActorId> actor = {}) const;

    Episode episode() const;
    size_t event_count() const;

    // one JSON document {actors, objects, events, counters}
    void snapshot(std::ostream& sink) const;
    static MemoryStore load(std::istream& source);   // throws SnapshotError

private:
    mutable std::shared_mutex mutex_;
    std::map<ActorId, InstanceRecord> actors_;
    std::map<ObjectId, InstanceRecord> objects_;
    std::vector<EventTuple> events_;                 // kept sorted
    uint32_t person_counter_ = 0;                    // last assigned index
    uint32_t robot_counter_ = 0;
    uint32_t object_counter_ = 0;
};

} // namespace evg
