#pragma once

#include <chrono>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "absforge/qnp.hpp"

namespace absforge::qnp {

struct SolverBudget {
  std::size_t max_nodes = 100'000;
  std::chrono::milliseconds time_limit{10'000};
};

struct Solved {
  Policy policy;
};
struct Unsolvable {};
struct SolverResourceLimit {
  std::string reason;
};

using SolveOutcome = std::variant<Solved, Unsolvable, SolverResourceLimit>;

/// Edge of a policy graph. The inc/dec masks are the numerical effects of
/// the action that labels the edge.
struct PolicyEdge {
  std::size_t from = 0;
  std::size_t to = 0;
  std::size_t action = 0;
  std::uint32_t inc_mask = 0;
  std::uint32_t dec_mask = 0;
};

/// Qstates reachable from the initial qstates under a policy. Goal qstates
/// are terminal.
struct PolicyGraph {
  std::vector<QState> nodes;
  std::vector<PolicyEdge> edges;
  std::vector<bool> goal;
};

/// Builds the policy graph from every initial qstate. Returns nullopt (and a
/// reason) when a reachable non-goal qstate is unmapped or mapped to an
/// inapplicable action.
std::optional<PolicyGraph> build_policy_graph(const Policy& pi, const Problem& p, std::string* why = nullptr);

/// Picks which qualifying (SCC, variable) deletion to perform next, given the
/// number of candidates. The default takes the first.
using SieveChooser = std::function<std::size_t(std::size_t candidates)>;

/// Repeatedly removes, inside some SCC, the edges that decrement a variable
/// no edge of that SCC increments; true iff the residual graph is acyclic.
bool sieve_terminates(const PolicyGraph& g, const SieveChooser& choose = {});

/// Closed (defined on every reachable non-goal qstate), goal-reaching from
/// every reachable qstate, and terminating by the Sieve.
bool verify_policy(const Policy& pi, const Problem& p);

/// AND/OR search over qstates for a policy that passes verify_policy.
SolveOutcome solve(const Problem& p, const SolverBudget& budget = {});

struct ExecStep {
  QState state;
  std::size_t action = 0;
};
struct ExecReachedGoal {
  std::vector<ExecStep> trace;
  QState final_state;
};
/// The policy is undefined (or inapplicable) at `stuck` before the goal.
struct ExecAborted {
  std::vector<ExecStep> trace;
  QState stuck;
};
struct ExecStepLimit {
  std::vector<ExecStep> trace;
  QState last;
};
using ExecOutcome = std::variant<ExecReachedGoal, ExecAborted, ExecStepLimit>;

/// Resolves the nondeterministic outcome of applying an action; must return
/// one of successors_q(state, action).
using BranchOracle = std::function<QState(const QState& state, const Action& action)>;

ExecOutcome execute_policy_q(const Policy& pi, const QState& s0, const Problem& p, const BranchOracle& oracle,
                             std::size_t step_bound);

}  // namespace absforge::qnp
