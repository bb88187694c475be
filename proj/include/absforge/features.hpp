#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "absforge/pddl.hpp"

namespace absforge::features {

/// Concrete syntax, authoritative:
///
///   f     := atom | (= term term) | (not f) | (and f*) | (or f*)
///          | (exists (tvar+) f) | (forall (tvar+) f)
///   count := (count (tvar+) f)
///   tvar  := ?name | ?name - typename
///   atom  := (pred term*)
///   term  := ?name | objectname
///
/// Untyped variables range over every object of the instance.
inline constexpr std::string_view kGrammar =
    "f     := atom | (= term term) | (not f) | (and f*) | (or f*)\n"
    "       | (exists (tvar+) f) | (forall (tvar+) f)\n"
    "count := (count (tvar+) f)\n"
    "tvar  := ?name | ?name - typename\n"
    "atom  := (pred term*)\n"
    "term  := ?name | objectname\n";

struct Variable {
  std::string name;
  std::string type = "object";
};

/// A variable reference (by environment slot) or an object constant that is
/// resolved by name against the instance at evaluation time.
struct FTerm {
  bool is_variable = true;
  std::size_t slot = 0;
  std::string constant;
};

struct Formula {
  enum class Kind { Atom, Equals, Not, And, Or, Exists, Forall };

  Kind kind = Kind::And;
  pddl::PredicateId predicate = 0;  // Atom
  std::vector<FTerm> terms;         // Atom, Equals
  std::vector<Formula> children;    // Not (1), And, Or, quantifiers (1)
  std::vector<Variable> vars;       // quantifiers
  std::size_t first_slot = 0;       // quantifiers: slot of vars[0]
  std::size_t slots = 0;            // environment size needed at this root

  static Formula truth() { return Formula{}; }
};

/// Count of distinct tuples over `vars` satisfying `body`. The body's free
/// variables are exactly the slots 0..vars.size()-1.
struct CountingTerm {
  std::vector<Variable> vars;
  Formula body;
};

enum class FeatureKind { Boolean, Numerical };

struct Feature {
  std::string name;
  FeatureKind kind = FeatureKind::Boolean;
  std::variant<Formula, CountingTerm> definition;
  std::string source;
};

/// Variable environment indexed by slot.
using Binding = std::vector<pddl::ObjectId>;

/// Parses a formula. `free_vars` (named with their leading ?) become slots
/// 0..n-1; any other unbound variable is an UnboundVariable error. Throws
/// ParseError.
Formula parse_formula(std::string_view text, const pddl::Domain& dom,
                      const std::vector<Variable>& free_vars = {});

/// Parses `(count (tvar+) f)`. Throws ParseError.
CountingTerm parse_count(std::string_view text, const pddl::Domain& dom);

/// Parses a feature definition: a count term makes a numerical feature, any
/// other formula a (closed) boolean feature.
Feature parse_feature(std::string name, std::string_view text, const pddl::Domain& dom);

bool eval_formula(const Formula& f, const pddl::GroundState& s, const pddl::Instance& objs,
                  const Binding& env = {});

std::size_t eval_count(const CountingTerm& t, const pddl::GroundState& s, const pddl::Instance& objs);

using FeatureValue = std::variant<bool, std::size_t>;

FeatureValue eval_feature(const Feature& f, const pddl::GroundState& s, const pddl::Instance& objs);

/// Predicates mentioned anywhere in the definition, sorted and unique.
std::vector<pddl::PredicateId> predicates_used(const Feature& f);

std::string to_string(const Formula& f, const pddl::Domain& dom);
std::string to_string(const CountingTerm& t, const pddl::Domain& dom);

}  // namespace absforge::features
