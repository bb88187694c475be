#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "absforge/pddl.hpp"
#include "absforge/qnp.hpp"
#include "absforge/refinement.hpp"
#include "absforge/solver.hpp"

namespace absforge::pipeline {

enum class Stage {
  DocInvalid,
  AscUnsolvable,
  AscTimeout,
  HliscBadInstance,
  HliscAborted,
  HliscTimeout,
  HlprcNoRefinement,
  LlgrcBadTransition,
};

inline constexpr Stage kAllStages[] = {Stage::DocInvalid,       Stage::AscUnsolvable,     Stage::AscTimeout,
                                       Stage::HliscBadInstance, Stage::HliscAborted,      Stage::HliscTimeout,
                                       Stage::HlprcNoRefinement, Stage::LlgrcBadTransition};

/// "ASC_UNSOLVABLE" and so on.
std::string_view stage_name(Stage s);
std::optional<Stage> parse_stage(std::string_view name);

class UnknownStage : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Stage-tagged diagnosis. All content is pre-rendered text so a report can
/// be serialized and turned into a prompt without the objects it came from.
/// Fields a stage does not use stay empty; see docs/report-format.md.
struct DebugReport {
  Stage stage = Stage::DocInvalid;
  std::string instance;                   // empty for DOC and ASC stages
  std::optional<std::size_t> instance_index;
  std::string detail;                     // one-line summary
  std::vector<std::string> violations;    // DOC_INVALID, HLISC_BAD_INSTANCE
  std::vector<std::string> trace;         // HLISC: "qstate => action" steps
  std::vector<std::string> hl_plan;       // sigma_h
  std::optional<std::size_t> layer;       // HLPRC, LLGRC
  std::string qstate;                     // stuck / blocked / s_h
  std::string hl_action;                  // a_h
  std::string next_qstate;                // s'_h (LLGRC)
  std::string ll_state;                   // s_l
  std::vector<std::string> ll_actions;    // HLPRC candidates, LLGRC a_l
  std::vector<std::string> ll_prefix;     // LL actions from s_0^l to s_l
  std::vector<std::string> notes;         // advisory context

  nlohmann::json to_json() const;
  static DebugReport from_json(const nlohmann::json& j);
  friend bool operator==(const DebugReport&, const DebugReport&) = default;
};

/// Default HLISC execution bound: 10 * (1 + sum of the initial counts).
std::size_t default_step_bound(const refinement::AbstractValuation& init);

std::variant<qnp::Policy, DebugReport> run_asc(const refinement::Abstraction& a, const qnp::SolverBudget& budget = {});

/// sigma_h with the qstates it is expected to visit: states.size() == actions.size() + 1.
struct HlPlan {
  std::vector<std::size_t> actions;
  std::vector<qnp::QState> states;
  refinement::AbstractValuation init_valuation;

  std::size_t k() const { return actions.size(); }
};

/// Executes the policy from the instance's abstract init, tracking each count
/// with -1/+1 per dec/inc so the run is deterministic. The HL goal is S_G.
std::variant<HlPlan, DebugReport> run_hlisc(const refinement::Abstraction& a, const qnp::Policy& pi,
                                            const pddl::Instance& inst,
                                            std::optional<std::size_t> step_bound = std::nullopt);

struct TreeNode {
  pddl::GroundState ll_state;
  refinement::AbstractValuation hl_valuation;
  qnp::QState expected_qstate;
  std::optional<pddl::GroundAction> in_action_ll;
  std::optional<std::size_t> in_action_hl;
  std::size_t layer = 0;
  std::optional<std::size_t> parent;
  std::vector<std::size_t> children;
  /// False for a child whose (state, layer) pair already occurs in the tree.
  bool expanded = false;
};

/// Node 0 is the root. Nodes are stored in creation (DFS) order.
struct RefinedTree {
  std::vector<TreeNode> nodes;
  std::size_t depth = 0;
  std::size_t k = 0;
};

struct RefineSuccess {
  pddl::Plan plan;
};

using RefineOutcome = std::variant<RefineSuccess, DebugReport, RefinedTree>;

struct TreeOptions {
  /// Node cap; exceeding it throws ResourceLimit.
  std::size_t max_nodes = 2'000'000;
};

RefineOutcome build_refined_tree(const refinement::Abstraction& a, const pddl::Instance& inst, const HlPlan& plan,
                                 const TreeOptions& opts = {});

struct NoDiagnosis {};

/// Bottom-up (k-i)-step reachability over the tree's layers. Throws
/// ResourceLimit from the reachability search.
std::variant<DebugReport, NoDiagnosis> run_llgrc(const RefinedTree& t, const refinement::Abstraction& a,
                                                 const pddl::Instance& inst, const HlPlan& plan,
                                                 std::size_t reach_budget = pddl::kDefaultReachabilityBudget);

struct Accepted {
  qnp::Policy policy;
  std::vector<pddl::Plan> plans;
};
struct Rejected {
  DebugReport report;
  /// Present when ASC passed, so later-stage prompts can show the policy.
  std::optional<qnp::Policy> policy;
};
using PipelineOutcome = std::variant<Accepted, Rejected>;

struct PipelineOptions {
  qnp::SolverBudget solver;
  std::optional<std::size_t> step_bound;
  TreeOptions tree;
  std::size_t reach_budget = pddl::kDefaultReachabilityBudget;
};

/// ASC once, then HLISC, HLPRC and LLGRC per instance in order; the first
/// failure is reported.
PipelineOutcome run_pipeline(const refinement::Abstraction& a, std::span<const pddl::Instance> insts,
                             const PipelineOptions& opts = {});

/// Text substituted for the notation of the feedback templates.
struct PromptContext {
  std::string domain_pddl;
  std::string abstraction;  // the abstraction document (JSON)
  std::string qnp_text;     // the QNP in the .qnp listing
  std::string policy_text;  // empty when no policy exists
  std::string instance_pddl;  // the instance the report refers to
};

/// Fills the feedback template of the report's stage. Throws UnknownStage.
std::string render_prompt(const DebugReport& r, const PromptContext& ctx);

struct ExecFailure {
  std::string reason;
};

struct ExecOptions {
  std::optional<std::size_t> step_bound;
  std::size_t max_expansions = 200'000;
};

/// Policy-guided depth-first refinement on an LL instance: at each state the
/// policy picks a_h for the abstracted qstate and refinement-consistent
/// ground actions are tried in order, backtracking on dead ends.
std::variant<pddl::Plan, ExecFailure> execute_refined_policy(const refinement::Abstraction& a, const qnp::Policy& pi,
                                                             const pddl::Instance& inst, const ExecOptions& opts = {});

}  // namespace absforge::pipeline
