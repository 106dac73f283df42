#include "evground/event_model.hpp"

#include <cmath>
#include <charconv>

namespace evg {

namespace {

// Parses the "<k>" part of "person_<k>" etc. Rejects leading zeros, signs,
// and anything that is not a positive decimal integer.
std::optional<uint32_t> parse_positive_index(std::string_view digits) {
    if (digits.empty() || digits.size() > 9) return std::nullopt;
    if (digits[0] == '0') return std::nullopt;
    uint32_t value = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
    if (ec != std::errc{} || ptr != digits.data() + digits.size()) return std::nullopt;
    if (value == 0) return std::nullopt;
    return value;
}

std::optional<uint32_t> strip_prefix_index(std::string_view text, std::string_view prefix) {
    if (text.size() <= prefix.size() || text.substr(0, prefix.size()) != prefix)
        return std::nullopt;
    return parse_positive_index(text.substr(prefix.size()));
}

} // namespace

std::string ActorId::render() const {
    const char* prefix = kind == ActorKind::Person ? "person_" : "robot_";
    return prefix + std::to_string(index);
}

std::optional<ActorId> ActorId::try_parse(std::string_view text) {
    if (auto idx = strip_prefix_index(text, "person_"))
        return ActorId{ActorKind::Person, *idx};
    if (auto idx = strip_prefix_index(text, "robot_"))
        return ActorId{ActorKind::Robot, *idx};
    return std::nullopt;
}

ActorId ActorId::parse(std::string_view text) {
    if (auto id = try_parse(text)) return *id;
    throw Error(Errc::BadId, "not a canonical actor id: '" + std::string(text) + "'");
}

std::string ObjectId::render() const {
    return "object_" + std::to_string(index);
}

std::optional<ObjectId> ObjectId::try_parse(std::string_view text) {
    if (auto idx = strip_prefix_index(text, "object_")) return ObjectId{*idx};
    return std::nullopt;
}

ObjectId ObjectId::parse(std::string_view text) {
    if (auto id = try_parse(text)) return *id;
    throw Error(Errc::BadId, "not a canonical object id: '" + std::string(text) + "'");
}

std::string_view verb_name(Verb verb) {
    switch (verb) {
        case Verb::Idle: return "idle";
        case Verb::Grasp: return "grasp";
        case Verb::Handover: return "handover";
        case Verb::Cut: return "cut";
        case Verb::PlaceDown: return "place_down";
        case Verb::Drop: return "drop";
        case Verb::Twist: return "twist";
        case Verb::Hold: return "hold";
        case Verb::Pour: return "pour";
        case Verb::Squash: return "squash";
        case Verb::Shake: return "shake";
        case Verb::Push: return "push";
        case Verb::Stir: return "stir";
    }
    return "idle";
}

std::optional<Verb> verb_from_name(std::string_view name) {
    for (Verb verb : kAllVerbs)
        if (verb_name(verb) == name) return verb;
    return std::nullopt;
}

std::string_view rho_name(Rho rho) {
    switch (rho) {
        case Rho::On: return "on";
        case Rho::In: return "in";
        case Rho::To: return "to";
    }
    return "on";
}

std::optional<Rho> rho_from_name(std::string_view name) {
    if (name == "on") return Rho::On;
    if (name == "in") return Rho::In;
    if (name == "to") return Rho::To;
    return std::nullopt;
}

std::string render_entity(const EntityId& entity) {
    return std::visit([](const auto& id) { return id.render(); }, entity);
}

std::optional<EntityId> try_parse_entity(std::string_view text) {
    if (auto actor = ActorId::try_parse(text)) return EntityId{*actor};
    if (auto object = ObjectId::try_parse(text)) return EntityId{*object};
    return std::nullopt;
}

SpatialRelation SpatialRelation::make(Rho rho, EntityId target) {
    if (rho != Rho::To && std::holds_alternative<ActorId>(target))
        throw Error(Errc::BadRelation, "relation '" + std::string(rho_name(rho)) +
                                           "' requires an object target, got " +
                                           render_entity(target));
    return SpatialRelation{rho, std::move(target)};
}

EventTuple make_tuple(ActorId actor, Verb action, ObjectId object,
                      std::optional<SpatialRelation> relation,
                      bool robot_interaction, double time) {
    if (action == Verb::Idle)
        throw Error(Errc::IdleAction, "an event tuple cannot carry the idle label");
    if (relation) {
        if (const auto* target = std::get_if<ObjectId>(&relation->target);
            target && *target == object)
            throw Error(Errc::SelfRelation,
                        object.render() + " cannot relate to itself");
        // re-validate typing for relations built by aggregate initialization
        (void)SpatialRelation::make(relation->rho, relation->target);
    }
    if (!(time >= 0.0) || !std::isfinite(time))
        throw Error(Errc::NegativeTime, "event time must be finite and >= 0");
    return EventTuple{actor, action, object, std::move(relation), robot_interaction, time};
}

namespace {

std::strong_ordering order_doubles(double lhs, double rhs) {
    // event times are validated finite, so a strong order exists
    if (lhs < rhs) return std::strong_ordering::less;
    if (lhs > rhs) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
}

std::strong_ordering order_relations(const std::optional<SpatialRelation>& lhs,
                                     const std::optional<SpatialRelation>& rhs) {
    if (!lhs && !rhs) return std::strong_ordering::equal;
    if (!lhs) return std::strong_ordering::less;
    if (!rhs) return std::strong_ordering::greater;
    if (auto cmp = std::string(rho_name(lhs->rho)) <=> std::string(rho_name(rhs->rho));
        cmp != 0)
        return cmp;
    return render_entity(lhs->target) <=> render_entity(rhs->target);
}

} // namespace

std::strong_ordering tuple_order(const EventTuple& lhs, const EventTuple& rhs) {
    if (auto cmp = order_doubles(lhs.time, rhs.time); cmp != 0) return cmp;
    if (auto cmp = lhs.actor.render() <=> rhs.actor.render(); cmp != 0) return cmp;
    if (auto cmp = std::string(verb_name(lhs.action)) <=> std::string(verb_name(rhs.action));
        cmp != 0)
        return cmp;
    if (auto cmp = lhs.object <=> rhs.object; cmp != 0) return cmp;
    if (auto cmp = order_relations(lhs.relation, rhs.relation); cmp != 0) return cmp;
    return (lhs.robot_interaction ? 1 : 0) <=> (rhs.robot_interaction ? 1 : 0);
}

} // namespace evg
