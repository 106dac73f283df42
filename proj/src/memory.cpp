#include "evground/memory.hpp"

#include <algorithm>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "evground/stream_io.hpp"

namespace evg {

using nlohmann::json;

MemoryStore::MemoryStore(const MemoryStore& other) {
    std::shared_lock lock(other.mutex_);
    actors_ = other.actors_;
    objects_ = other.objects_;
    events_ = other.events_;
    person_counter_ = other.person_counter_;
    robot_counter_ = other.robot_counter_;
    object_counter_ = other.object_counter_;
}

MemoryStore& MemoryStore::operator=(const MemoryStore& other) {
    if (this == &other) return *this;
    MemoryStore copy(other);
    std::unique_lock lock(mutex_);
    actors_ = std::move(copy.actors_);
    objects_ = std::move(copy.objects_);
    events_ = std::move(copy.events_);
    person_counter_ = copy.person_counter_;
    robot_counter_ = copy.robot_counter_;
    object_counter_ = copy.object_counter_;
    return *this;
}

ActorId MemoryStore::register_actor(std::string crop, double first_seen, ActorKind kind) {
    std::unique_lock lock(mutex_);
    uint32_t& counter = kind == ActorKind::Person ? person_counter_ : robot_counter_;
    ActorId id{kind, ++counter};
    actors_.emplace(id, InstanceRecord{std::move(crop), first_seen});
    return id;
}

ObjectId MemoryStore::register_object(std::string crop, double first_seen) {
    std::unique_lock lock(mutex_);
    ObjectId id{++object_counter_};
    objects_.emplace(id, InstanceRecord{std::move(crop), first_seen});
    return id;
}

void MemoryStore::adopt_actor(ActorId id, std::string crop, double first_seen) {
    std::unique_lock lock(mutex_);
    uint32_t& counter = id.kind == ActorKind::Person ? person_counter_ : robot_counter_;
    counter = std::max(counter, id.index);
    actors_.emplace(id, InstanceRecord{std::move(crop), first_seen});
}

void MemoryStore::adopt_object(ObjectId id, std::string crop, double first_seen) {
    std::unique_lock lock(mutex_);
    object_counter_ = std::max(object_counter_, id.index);
    objects_.emplace(id, InstanceRecord{std::move(crop), first_seen});
}

bool MemoryStore::has_actor(ActorId id) const {
    std::shared_lock lock(mutex_);
    return actors_.count(id) > 0;
}

bool MemoryStore::has_object(ObjectId id) const {
    std::shared_lock lock(mutex_);
    return objects_.count(id) > 0;
}

std::optional<InstanceRecord> MemoryStore::find_actor(ActorId id) const {
    std::shared_lock lock(mutex_);
    auto it = actors_.find(id);
    if (it == actors_.end()) return std::nullopt;
    return it->second;
}

std::optional<InstanceRecord> MemoryStore::find_object(ObjectId id) const {
    std::shared_lock lock(mutex_);
    auto it = objects_.find(id);
    if (it == objects_.end()) return std::nullopt;
    return it->second;
}

void MemoryStore::append_event(const EventTuple& tuple) {
    std::unique_lock lock(mutex_);
    if (!actors_.count(tuple.actor))
        throw Error(Errc::UnknownInstance, "actor " + tuple.actor.render() + " is not registered");
    if (!objects_.count(tuple.object))
        throw Error(Errc::UnknownInstance, "object " + tuple.object.render() + " is not registered");
    if (tuple.relation) {
        bool known = std::visit(
            [&](const auto& id) {
                using T = std::decay_t<decltype(id)>;
                if constexpr (std::is_same_v<T, ActorId>)
                    return actors_.count(id) > 0;
                else
                    return objects_.count(id) > 0;
            },
            tuple.relation->target);
        if (!known)
            throw Error(Errc::UnknownInstance, "relation target " +
                                                   render_entity(tuple.relation->target) +
                                                   " is not registered");
    }
    auto at = std::lower_bound(events_.begin(), events_.end(), tuple, tuple_less);
    if (at != events_.end() && *at == tuple)
        throw Error(Errc::DuplicateEvent, "exact duplicate of a stored tuple");
    events_.insert(at, tuple);
}

std::vector<EventTuple> MemoryStore::query_events(double t0, double t1,
                                                  std::optional<ActorId> actor) const {
    if (t0 > t1)
        throw Error(Errc::InvalidWindow, "query window start exceeds end");
    std::shared_lock lock(mutex_);
    std::vector<EventTuple> result;
    for (const EventTuple& tuple : events_) {
        if (tuple.time < t0 || tuple.time > t1) continue;
        if (actor && tuple.actor != *actor) continue;
        result.push_back(tuple);
    }
    return result;
}

Episode MemoryStore::episode() const {
    std::shared_lock lock(mutex_);
    return Episode{events_, actors_, objects_};
}

size_t MemoryStore::event_count() const {
    std::shared_lock lock(mutex_);
    return events_.size();
}

void MemoryStore::snapshot(std::ostream& sink) const {
    std::shared_lock lock(mutex_);
    json actors = json::array();
    for (const auto& [id, record] : actors_)
        actors.push_back({{"id", id.render()},
                          {"crop", record.crop},
                          {"first_seen", record.first_seen}});
    json objects = json::array();
    for (const auto& [id, record] : objects_)
        objects.push_back({{"id", id.render()},
                           {"crop", record.crop},
                           {"first_seen", record.first_seen}});
    json events = json::array();
    for (const EventTuple& tuple : events_) events.push_back(tuple_to_json(tuple));
    json document{{"actors", std::move(actors)},
                  {"objects", std::move(objects)},
                  {"events", std::move(events)},
                  {"counters",
                   {{"person", person_counter_},
                    {"robot", robot_counter_},
                    {"object", object_counter_}}}};
    sink << document.dump(2) << '\n';
    if (!sink) throw Error(Errc::IoError, "failed writing snapshot");
}

MemoryStore MemoryStore::load(std::istream& source) {
    std::string text((std::istreambuf_iterator<char>(source)),
                     std::istreambuf_iterator<char>());
    json document = json::parse(text, nullptr, false);
    if (document.is_discarded() || !document.is_object())
        throw Error(Errc::SnapshotError, "snapshot is not a JSON object");

    MemoryStore store;
    try {
        for (const json& entry : document.at("actors")) {
            auto id = ActorId::try_parse(entry.at("id").get<std::string>());
            if (!id) throw Error(Errc::SnapshotError, "bad actor id in snapshot");
            store.actors_.emplace(*id, InstanceRecord{entry.at("crop").get<std::string>(),
                                                      entry.at("first_seen").get<double>()});
        }
        for (const json& entry : document.at("objects")) {
            auto id = ObjectId::try_parse(entry.at("id").get<std::string>());
            if (!id) throw Error(Errc::SnapshotError, "bad object id in snapshot");
            store.objects_.emplace(*id, InstanceRecord{entry.at("crop").get<std::string>(),
                                                       entry.at("first_seen").get<double>()});
        }
        for (const json& entry : document.at("events"))
            store.events_.push_back(tuple_from_json(entry));
        const json& counters = document.at("counters");
        store.person_counter_ = counters.at("person").get<uint32_t>();
        store.robot_counter_ = counters.at("robot").get<uint32_t>();
        store.object_counter_ = counters.at("object").get<uint32_t>();
    } catch (const std::exception& err) {
        throw Error(Errc::SnapshotError, std::string("corrupt snapshot: ") + err.what());
    }
    std::sort(store.events_.begin(), store.events_.end(), tuple_less);
    return store;
}

} // namespace evg
