#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace absforge::pddl {

using ObjectId = std::uint16_t;
using PredicateId = std::uint16_t;

/// Largest predicate arity the ground representation stores inline.
inline constexpr std::size_t kMaxArity = 6;

/// Default visited-state budget for bounded reachability.
inline constexpr std::size_t kDefaultReachabilityBudget = 1'000'000;

/// A ground atom. Object ids index Instance::objects(); predicate ids index
/// Domain::predicates.
struct Atom {
  PredicateId predicate = 0;
  std::uint8_t arity = 0;
  std::array<ObjectId, kMaxArity> args{};

  std::span<const ObjectId> arguments() const { return {args.data(), arity}; }

  friend auto operator<=>(const Atom&, const Atom&) = default;
  friend bool operator==(const Atom&, const Atom&) = default;
};

Atom make_atom(PredicateId predicate, std::span<const ObjectId> args);
Atom make_atom(PredicateId predicate, std::initializer_list<ObjectId> args);

/// Closed-world state: the atoms present are true, everything else is false.
/// Stored as a sorted, duplicate-free vector.
class GroundState {
 public:
  GroundState() = default;
  explicit GroundState(std::vector<Atom> atoms);

  bool contains(const Atom& atom) const;
  void insert(const Atom& atom);
  void erase(const Atom& atom);

  const std::vector<Atom>& atoms() const { return atoms_; }
  std::size_t size() const { return atoms_.size(); }
  bool empty() const { return atoms_.empty(); }
  std::size_t hash() const;

  friend bool operator==(const GroundState&, const GroundState&) = default;
  friend auto operator<=>(const GroundState&, const GroundState&) = default;

 private:
  std::vector<Atom> atoms_;
};

struct GroundStateHash {
  std::size_t operator()(const GroundState& s) const { return s.hash(); }
};

struct TypedName {
  std::string name;
  std::string type = "object";
};

struct PredicateSchema {
  std::string name;
  std::vector<std::string> param_types;

  std::size_t arity() const { return param_types.size(); }
};

/// Argument of a schema atom: an action parameter or a domain constant.
struct Term {
  enum class Kind { Parameter, Constant };
  Kind kind = Kind::Parameter;
  std::size_t parameter = 0;
  std::string constant;
};

struct SchemaAtom {
  PredicateId predicate = 0;
  std::vector<Term> args;
};

struct SchemaLiteral {
  SchemaAtom atom;
  bool positive = true;
};

struct EqualityConstraint {
  Term lhs;
  Term rhs;
  bool positive = true;
};

struct ActionSchema {
  std::string name;
  std::vector<TypedName> params;
  std::vector<SchemaLiteral> pre;
  std::vector<EqualityConstraint> equalities;
  std::vector<SchemaAtom> add;
  std::vector<SchemaAtom> del;
};

struct Domain {
  std::string name;
  std::vector<std::string> requirements;
  /// Declared types mapped to their parent; the implicit root is "object".
  std::map<std::string, std::string> type_parent;
  std::vector<TypedName> constants;
  std::vector<PredicateSchema> predicates;
  std::vector<ActionSchema> actions;
  /// Original source text, kept for prompts.
  std::string source;

  std::optional<PredicateId> find_predicate(std::string_view name) const;
  const ActionSchema* find_action(std::string_view name) const;
  bool has_type(std::string_view type) const;
  bool is_subtype(std::string_view type, std::string_view ancestor) const;

  /// Predicates occurring in no add or delete list, indexed by PredicateId.
  std::vector<bool> static_predicates() const;
};

/// A problem instance bound to its domain. Objects are kept sorted by name so
/// that object ids order lexicographically.
class Instance {
 public:
  Instance(std::string name, std::shared_ptr<const Domain> domain, std::vector<TypedName> objects,
           GroundState init, std::vector<Atom> goal, std::string source = {});

  const std::string& name() const { return name_; }
  const Domain& domain() const { return *domain_; }
  const std::shared_ptr<const Domain>& domain_ptr() const { return domain_; }
  const std::vector<TypedName>& objects() const { return objects_; }
  const GroundState& init() const { return init_; }
  const std::vector<Atom>& goal() const { return goal_; }
  const std::string& source() const { return source_; }

  std::optional<ObjectId> find_object(std::string_view name) const;
  const std::string& object_name(ObjectId id) const { return objects_[id].name; }
  /// Objects whose type is `type` or one of its subtypes; "object" or an
  /// empty string selects every object.
  const std::vector<ObjectId>& objects_of_type(std::string_view type) const;

  /// The init atoms over static predicates.
  GroundState static_atoms() const;

 private:
  std::string name_;
  std::shared_ptr<const Domain> domain_;
  std::vector<TypedName> objects_;
  GroundState init_;
  std::vector<Atom> goal_;
  std::string source_;
  std::map<std::string, std::vector<ObjectId>, std::less<>> by_type_;
  std::vector<ObjectId> empty_;
};

struct GroundAction {
  std::size_t schema = 0;
  std::vector<ObjectId> args;
  std::vector<Atom> pre_pos;
  std::vector<Atom> pre_neg;
  std::vector<Atom> add;
  std::vector<Atom> del;

  friend bool operator==(const GroundAction& a, const GroundAction& b) {
    return a.schema == b.schema && a.args == b.args;
  }
};

using Plan = std::vector<GroundAction>;

class NotApplicable : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Parses a domain in the :strips/:typing/:negative-preconditions/:equality
/// subset. Throws ParseError.
Domain parse_domain(std::string_view text, std::string_view file = "domain.pddl");

/// Parses a problem against `domain`. Throws ParseError.
Instance parse_instance(std::string_view text, std::shared_ptr<const Domain> domain,
                        std::string_view file = "problem.pddl");

/// All type-consistent groundings that satisfy the equality constraints,
/// ordered by schema name then argument tuple.
std::vector<GroundAction> ground_actions(const Instance& inst);

bool applicable(const GroundState& s, const GroundAction& a);

/// (s \ del) ∪ add. Throws NotApplicable when a precondition fails.
GroundState apply(const GroundState& s, const GroundAction& a);

bool holds_goal(const GroundState& s, std::span<const Atom> goal);

std::vector<const GroundAction*> applicable_actions(const GroundState& s,
                                                    std::span<const GroundAction> actions);

struct PlanCheck {
  bool valid = false;
  /// Index of the first inapplicable step, or the plan length when every
  /// step applies but the goal does not hold at the end.
  std::optional<std::size_t> failing_step;
};

PlanCheck validate_plan(const Instance& inst, const Plan& plan);

/// Breadth-first search for a goal state within `k` steps of `s`. Exact
/// within the bound; throws ResourceLimit once more than `budget` distinct
/// states have been visited.
bool bounded_goal_reachable(const Instance& inst, std::span<const GroundAction> actions,
                            const GroundState& s, std::size_t k,
                            std::size_t budget = kDefaultReachabilityBudget);
bool bounded_goal_reachable(const Instance& inst, const GroundState& s, std::size_t k,
                            std::size_t budget = kDefaultReachabilityBudget);

std::string format_atom(const Instance& inst, const Atom& atom);
std::string format_action(const Instance& inst, const GroundAction& a);
std::string format_state(const Instance& inst, const GroundState& s);

/// Looks up a ground action written as `(name arg...)`; nullptr if absent.
const GroundAction* find_ground_action(std::span<const GroundAction> actions, const Instance& inst,
                                       std::string_view text);

}  // namespace absforge::pddl
