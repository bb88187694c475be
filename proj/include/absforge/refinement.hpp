#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "absforge/features.hpp"
#include "absforge/pddl.hpp"
#include "absforge/qnp.hpp"

namespace absforge::refinement {

/// Maps HL variables to features and HL actions to LL schemata. Features are
/// aligned with the paired QNP problem: bool_features[i] defines qnp.bools()[i]
/// and num_features[j] defines qnp.nums()[j]. An HL action without a schema
/// has no refinement.
struct RefinementMapping {
  std::vector<features::Feature> bool_features;
  std::vector<features::Feature> num_features;
  std::vector<std::string> hl_actions;
  std::vector<std::optional<std::string>> schema_of;

  std::optional<std::size_t> find_hl_action(std::string_view name) const;
};

class UnknownHlAction : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Abstraction {
  qnp::Problem qnp;
  RefinementMapping mapping;
};

/// Concrete feature values, aligned with the QNP variable order.
struct AbstractValuation {
  std::vector<bool> bools;
  std::vector<std::size_t> nums;

  friend bool operator==(const AbstractValuation&, const AbstractValuation&) = default;
};

std::string format_valuation(const AbstractValuation& v, const qnp::Problem& p);

AbstractValuation abstract_state(const RefinementMapping& m, const pddl::GroundState& s, const pddl::Instance& objs);

/// Booleans copied; each count maps to >0 iff it is positive.
qnp::QState to_qstate(const AbstractValuation& v);

/// Features evaluated over the goal atoms plus the static atoms of init.
AbstractValuation abstract_goal(const RefinementMapping& m, const pddl::Instance& inst);

/// Names of features that mention a fluent predicate absent from both the
/// goal and the static init atoms; their goal abstraction may be misread.
std::vector<std::string> goal_abstraction_warnings(const RefinementMapping& m, const qnp::Problem& p,
                                                   const pddl::Instance& inst);

struct HlInstance {
  qnp::QState init;
  AbstractValuation init_valuation;
  qnp::QState goal;
  AbstractValuation goal_valuation;
};

struct LiteralMismatch {
  std::string literal;   // e.g. "!A" or "N>0"
  bool in_goal = false;  // violated in S_G rather than S_0
  std::string observed;  // e.g. "A=true" or "N=0"
};

struct MismatchReport {
  std::vector<LiteralMismatch> violations;
  std::vector<std::string> warnings;
};

std::variant<HlInstance, MismatchReport> check_hl_instance(const Abstraction& a, const pddl::Instance& inst);

/// True iff the ground action's schema is the one `hl_action` maps to.
/// Throws UnknownHlAction for a name that is not an HL action.
bool is_refinement(const pddl::GroundAction& a_l, std::string_view hl_action, const RefinementMapping& m,
                   const pddl::Domain& dom);

/// Boolean effects and frame respected exactly; dec(n) requires a strict
/// decrease, inc(n) a strict increase, and untouched counts stay equal.
bool transition_consistent(const qnp::Action& a_h, const AbstractValuation& v, const AbstractValuation& next);

}  // namespace absforge::refinement
