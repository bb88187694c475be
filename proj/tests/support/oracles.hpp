#pragma once

// Independent reference implementations used to cross-check the library.
// None of them calls the code they check.

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "absforge/pddl.hpp"
#include "absforge/pipeline.hpp"
#include "absforge/qnp.hpp"
#include "absforge/refinement.hpp"

namespace absforge::oracle {

// ---------------------------------------------------------------------------
// Formulas: a string-level interpreter over named objects and atoms.

struct World {
  std::map<std::string, std::string> object_type;  // object -> declared type
  std::map<std::string, std::string> type_parent;  // type -> supertype
  std::set<std::string> atoms;                     // "(pred a b)"
};

/// Builds the world of an instance restricted to the given state.
World world_of(const pddl::Instance& inst, const pddl::GroundState& s);

/// Closed formula text, evaluated by brute-force enumeration of bindings.
bool eval_formula(std::string_view text, const World& w);
/// `(count (vars) body)` text.
std::size_t eval_count(std::string_view text, const World& w);

// ---------------------------------------------------------------------------
// Reachability: plain enumeration of action sequences.

bool reachable_by_enumeration(const pddl::Instance& inst, std::span<const pddl::GroundAction> actions,
                              const pddl::GroundState& s, std::size_t k);

/// Replays a plan with set operations and checks the goal.
bool replay_plan(const pddl::Instance& inst, const pddl::Plan& plan);

// ---------------------------------------------------------------------------
// QNPs: explicit quantitative model checking with counters capped at `cap`.

/// True iff from every concrete initial state consistent with the init
/// literals, every execution of the policy (every dec/inc amount within the
/// cap) is finite, never gets stuck, and ends in a goal state.
bool policy_solves(const qnp::Problem& p, const qnp::Policy& pi, int cap);

struct Enumeration {
  std::optional<qnp::Policy> solution;
  std::size_t candidates = 0;
  bool exhausted_limit = false;
};

/// Enumerates every policy over the qualitatively reachable qstates and
/// model-checks each with policy_solves.
Enumeration find_policy(const qnp::Problem& p, int cap, std::size_t limit);

// ---------------------------------------------------------------------------
// Refined trees: post-hoc audit of every edge.

/// Returns one message per violated edge or structural rule.
std::vector<std::string> audit_tree(const pipeline::RefinedTree& t, const refinement::Abstraction& a,
                                    const pddl::Instance& inst);

}  // namespace absforge::oracle
