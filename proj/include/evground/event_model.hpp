#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "evground/error.hpp"

namespace evg {

// ---------------------------------------------------------------------------
// Identities
// ---------------------------------------------------------------------------

enum class ActorKind : uint8_t { Person, Robot };

// A uniquely identified actor instance. Canonical string form is
// "person_<k>" or "robot_<k>" with k >= 1; that form is the normative
// serialization used by every wire format.
struct ActorId {
    ActorKind kind = ActorKind::Person;
    uint32_t index = 1;

    std::string render() const;
    static ActorId parse(std::string_view text);            // throws Errc::BadId
    static std::optional<ActorId> try_parse(std::string_view text);

    bool is_robot() const { return kind == ActorKind::Robot; }

    auto operator<=>(const ActorId&) const = default;
};

// A uniquely identified object instance, canonical form "object_<k>".
struct ObjectId {
    uint32_t index = 1;

    std::string render() const;
    static ObjectId parse(std::string_view text);            // throws Errc::BadId
    static std::optional<ObjectId> try_parse(std::string_view text);

    auto operator<=>(const ObjectId&) const = default;
};

// ---------------------------------------------------------------------------
// Action vocabulary
// ---------------------------------------------------------------------------

// Closed verb vocabulary. `Idle` is a detector label only; it can never
// appear inside an event tuple.
enum class Verb : uint8_t {
    Idle,
    Grasp,
    Handover,
    Cut,
    PlaceDown,
    Drop,
    Twist,
    Hold,
    Pour,
    Squash,
    Shake,
    Push,
    Stir,
};

inline constexpr std::array<Verb, 13> kAllVerbs = {
    Verb::Idle,  Verb::Grasp, Verb::Handover, Verb::Cut,   Verb::PlaceDown,
    Verb::Drop,  Verb::Twist, Verb::Hold,     Verb::Pour,  Verb::Squash,
    Verb::Shake, Verb::Push,  Verb::Stir,
};

std::string_view verb_name(Verb verb);
std::optional<Verb> verb_from_name(std::string_view name);

// ---------------------------------------------------------------------------
// Spatial relation
// ---------------------------------------------------------------------------

enum class Rho : uint8_t { On, In, To };

std::string_view rho_name(Rho rho);
std::optional<Rho> rho_from_name(std::string_view name);

using EntityId = std::variant<ActorId, ObjectId>;

std::string render_entity(const EntityId& entity);
std::optional<EntityId> try_parse_entity(std::string_view text);

// (rho, target). `on`/`in` require an object target; `to` accepts either.
struct SpatialRelation {
    Rho rho = Rho::On;
    EntityId target = ObjectId{1};

    // throws Errc::BadRelation on an actor target for on/in
    static SpatialRelation make(Rho rho, EntityId target);

    bool operator==(const SpatialRelation&) const = default;
};

// ---------------------------------------------------------------------------
// Event tuple
// ---------------------------------------------------------------------------

// The grounded record of one observed interaction: who did what to which
// object, where, when, and whether the robot interacted with the acting
// person. The system's sole semantic output.
struct EventTuple {
    ActorId actor;
    Verb action = Verb::Grasp;
    ObjectId object;
    std::optional<SpatialRelation> relation;
    bool robot_interaction = false;
    double time = 0.0;

    bool operator==(const EventTuple&) const = default;
};

// Validating constructor. Rejects idle actions, relations that target the
// tuple's own object, and negative or non-finite times.
EventTuple make_tuple(ActorId actor, Verb action, ObjectId object,
                      std::optional<SpatialRelation> relation,
                      bool robot_interaction, double time);

// Total episodic order: (time, actor canonical string, action string), with
// the remaining fields as final tiebreaks so distinct tuples never compare
// equal.
std::strong_ordering tuple_order(const EventTuple& lhs, const EventTuple& rhs);

inline bool tuple_less(const EventTuple& lhs, const EventTuple& rhs) {
    return tuple_order(lhs, rhs) == std::strong_ordering::less;
}

} // namespace evg
