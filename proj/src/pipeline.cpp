#include "absforge/pipeline.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "absforge/error.hpp"

namespace absforge::pipeline {

using refinement::AbstractValuation;
using refinement::Abstraction;

namespace {

constexpr std::pair<Stage, std::string_view> kStageNames[] = {
    {Stage::DocInvalid, "DOC_INVALID"},
    {Stage::AscUnsolvable, "ASC_UNSOLVABLE"},
    {Stage::AscTimeout, "ASC_TIMEOUT"},
    {Stage::HliscBadInstance, "HLISC_BAD_INSTANCE"},
    {Stage::HliscAborted, "HLISC_ABORTED"},
    {Stage::HliscTimeout, "HLISC_TIMEOUT"},
    {Stage::HlprcNoRefinement, "HLPRC_NO_REFINEMENT"},
    {Stage::LlgrcBadTransition, "LLGRC_BAD_TRANSITION"},
};

constexpr std::size_t kMaxNotes = 10;

std::vector<std::string> format_hl_plan(const qnp::Problem& p, const HlPlan& plan) {
  std::vector<std::string> out;
  for (auto a : plan.actions) out.push_back(p.actions()[a].name);
  return out;
}

std::vector<std::string> path_to(const RefinedTree& t, std::size_t node, const pddl::Instance& inst) {
  std::vector<std::string> out;
  for (std::optional<std::size_t> n = node; n && t.nodes[*n].parent; n = t.nodes[*n].parent) {
    out.push_back(pddl::format_action(inst, *t.nodes[*n].in_action_ll));
  }
  std::reverse(out.begin(), out.end());
  return out;
}

qnp::QState tracked_qstate(const std::vector<bool>& bools, const std::vector<long long>& counts) {
  qnp::QState q;
  for (std::size_t i = 0; i < bools.size(); ++i) {
    if (bools[i]) q.bools |= std::uint32_t{1} << i;
  }
  for (std::size_t j = 0; j < counts.size(); ++j) {
    if (counts[j] > 0) q.nums |= std::uint32_t{1} << j;
  }
  return q;
}

}  // namespace

std::string_view stage_name(Stage s) {
  for (const auto& [stage, name] : kStageNames) {
    if (stage == s) return name;
  }
  throw UnknownStage("unknown stage value " + std::to_string(static_cast<int>(s)));
}

std::optional<Stage> parse_stage(std::string_view name) {
  for (const auto& [stage, n] : kStageNames) {
    if (n == name) return stage;
  }
  return std::nullopt;
}

nlohmann::json DebugReport::to_json() const {
  nlohmann::json j;
  j["stage"] = std::string(stage_name(stage));
  j["instance"] = instance;
  j["instance_index"] = instance_index ? nlohmann::json(*instance_index) : nlohmann::json(nullptr);
  j["detail"] = detail;
  j["violations"] = violations;
  j["trace"] = trace;
  j["hl_plan"] = hl_plan;
  j["layer"] = layer ? nlohmann::json(*layer) : nlohmann::json(nullptr);
  j["qstate"] = qstate;
  j["hl_action"] = hl_action;
  j["next_qstate"] = next_qstate;
  j["ll_state"] = ll_state;
  j["ll_actions"] = ll_actions;
  j["ll_prefix"] = ll_prefix;
  j["notes"] = notes;
  return j;
}

DebugReport DebugReport::from_json(const nlohmann::json& j) {
  DebugReport r;
  auto stage = parse_stage(j.at("stage").get<std::string>());
  if (!stage) throw UnknownStage("unknown stage " + j.at("stage").get<std::string>());
  r.stage = *stage;
  r.instance = j.value("instance", "");
  if (j.contains("instance_index") && !j["instance_index"].is_null()) r.instance_index = j["instance_index"].get<std::size_t>();
  r.detail = j.value("detail", "");
  r.violations = j.value("violations", std::vector<std::string>{});
  r.trace = j.value("trace", std::vector<std::string>{});
  r.hl_plan = j.value("hl_plan", std::vector<std::string>{});
  if (j.contains("layer") && !j["layer"].is_null()) r.layer = j["layer"].get<std::size_t>();
  r.qstate = j.value("qstate", "");
  r.hl_action = j.value("hl_action", "");
  r.next_qstate = j.value("next_qstate", "");
  r.ll_state = j.value("ll_state", "");
  r.ll_actions = j.value("ll_actions", std::vector<std::string>{});
  r.ll_prefix = j.value("ll_prefix", std::vector<std::string>{});
  r.notes = j.value("notes", std::vector<std::string>{});
  return r;
}

std::size_t default_step_bound(const AbstractValuation& init) {
  std::size_t total = 0;
  for (auto n : init.nums) total += n;
  return 10 * (1 + total);
}

std::variant<qnp::Policy, DebugReport> run_asc(const Abstraction& a, const qnp::SolverBudget& budget) {
  auto outcome = qnp::solve(a.qnp, budget);
  if (auto* s = std::get_if<qnp::Solved>(&outcome)) return s->policy;
  DebugReport r;
  if (std::holds_alternative<qnp::Unsolvable>(outcome)) {
    r.stage = Stage::AscUnsolvable;
    r.detail = "the QNP solver found no policy that solves the abstraction";
  } else {
    r.stage = Stage::AscTimeout;
    r.detail = "the QNP solver ran out of budget: " + std::get<qnp::SolverResourceLimit>(outcome).reason;
  }
  return r;
}

std::variant<HlPlan, DebugReport> run_hlisc(const Abstraction& a, const qnp::Policy& pi, const pddl::Instance& inst,
                                            std::optional<std::size_t> step_bound) {
  const auto& p = a.qnp;
  auto checked = refinement::check_hl_instance(a, inst);
  if (auto* bad = std::get_if<refinement::MismatchReport>(&checked)) {
    DebugReport r;
    r.stage = Stage::HliscBadInstance;
    r.instance = inst.name();
    r.detail = "the abstract initial state or goal of the instance violates the QNP";
    for (const auto& v : bad->violations) {
      r.violations.push_back(v.literal + " in " + (v.in_goal ? "S_G" : "S_0") + " (observed " + v.observed + ")");
    }
    r.notes = bad->warnings;
    return r;
  }
  const auto& hl = std::get<refinement::HlInstance>(checked);

  HlPlan plan;
  plan.init_valuation = hl.init_valuation;
  std::vector<bool> bools = hl.init_valuation.bools;
  std::vector<long long> counts(hl.init_valuation.nums.begin(), hl.init_valuation.nums.end());
  const std::size_t bound = step_bound.value_or(default_step_bound(hl.init_valuation));

  qnp::QState q = hl.init;
  plan.states.push_back(q);
  std::vector<std::string> trace;
  auto fail = [&](Stage stage, std::string detail) {
    DebugReport r;
    r.stage = stage;
    r.instance = inst.name();
    r.detail = std::move(detail);
    r.trace = trace;
    r.qstate = p.format(q);
    r.hl_plan = format_hl_plan(p, plan);
    return r;
  };
  while (!qnp::satisfies(q, p.goal())) {
    if (plan.actions.size() >= bound) {
      return fail(Stage::HliscTimeout, "policy execution exceeded " + std::to_string(bound) + " steps");
    }
    auto idx = pi.lookup(q);
    if (!idx) return fail(Stage::HliscAborted, "the policy is undefined at a non-goal qstate");
    const auto& act = p.actions()[*idx];
    if (!qnp::applicable_q(q, act)) {
      return fail(Stage::HliscAborted, "the policy maps a qstate to the inapplicable action " + act.name);
    }
    trace.push_back(p.format(q) + " => " + act.name);
    for (const auto& l : act.bool_eff) bools[l.var] = l.positive;
    for (const auto& e : act.num_eff) counts[e.var] += e.increase ? 1 : -1;
    q = tracked_qstate(bools, counts);
    plan.actions.push_back(*idx);
    plan.states.push_back(q);
  }
  return plan;
}

namespace {

class TreeBuilder {
 public:
  TreeBuilder(const Abstraction& a, const pddl::Instance& inst, const HlPlan& plan, const TreeOptions& opts)
      : a_(a), inst_(inst), plan_(plan), opts_(opts), actions_(pddl::ground_actions(inst)) {}

  RefineOutcome run() {
    tree_.k = plan_.k();
    TreeNode root;
    root.ll_state = inst_.init();
    root.hl_valuation = refinement::abstract_state(a_.mapping, root.ll_state, inst_);
    root.expected_qstate = plan_.states.at(0);
    root.expanded = true;
    tree_.nodes.push_back(std::move(root));
    seen_.insert({0, tree_.nodes[0].ll_state});

    if (auto goal = dfs(0)) {
      pddl::Plan out;
      for (std::optional<std::size_t> n = *goal; tree_.nodes[*n].parent; n = tree_.nodes[*n].parent) {
        out.push_back(*tree_.nodes[*n].in_action_ll);
      }
      std::reverse(out.begin(), out.end());
      return RefineSuccess{std::move(out)};
    }
    if (tree_.depth < tree_.k) return blocked_report();
    return std::move(tree_);
  }

 private:
  std::optional<std::size_t> dfs(std::size_t id) {
    const std::size_t x = tree_.nodes[id].layer;
    if (x >= tree_.k) {
      const auto& n = tree_.nodes[id];
      if (qnp::satisfies(n.expected_qstate, a_.qnp.goal()) && pddl::holds_goal(n.ll_state, inst_.goal())) return id;
      return std::nullopt;
    }
    const auto& act = a_.qnp.actions()[plan_.actions[x]];
    const qnp::QState expected = plan_.states[x + 1];
    bool any_child = false;
    for (const auto& gl : actions_) {
      if (!pddl::applicable(tree_.nodes[id].ll_state, gl)) continue;
      if (!refinement::is_refinement(gl, act.name, a_.mapping, inst_.domain())) continue;
      pddl::GroundState next = pddl::apply(tree_.nodes[id].ll_state, gl);
      AbstractValuation v = refinement::abstract_state(a_.mapping, next, inst_);
      if (!refinement::transition_consistent(act, tree_.nodes[id].hl_valuation, v) ||
          refinement::to_qstate(v) != expected) {
        if (mismatches_.size() < kMaxNotes) {
          mismatches_.push_back("layer " + std::to_string(x) + ": " + pddl::format_action(inst_, gl) +
                                " refines " + act.name + " syntactically but reaches " +
                                refinement::format_valuation(v, a_.qnp) + " instead of " + a_.qnp.format(expected));
        }
        continue;
      }
      any_child = true;
      if (tree_.nodes.size() >= opts_.max_nodes) {
        throw ResourceLimit("refined tree exceeded " + std::to_string(opts_.max_nodes) + " nodes");
      }
      TreeNode child;
      child.ll_state = std::move(next);
      child.hl_valuation = std::move(v);
      child.expected_qstate = expected;
      child.in_action_ll = gl;
      child.in_action_hl = plan_.actions[x];
      child.layer = x + 1;
      child.parent = id;
      child.expanded = seen_.insert({x + 1, child.ll_state}).second;
      const std::size_t cid = tree_.nodes.size();
      const bool expand = child.expanded;
      tree_.nodes.push_back(std::move(child));
      tree_.nodes[id].children.push_back(cid);
      tree_.depth = std::max(tree_.depth, x + 1);
      if (!expand) continue;
      if (auto found = dfs(cid)) return found;
    }
    if (!any_child && (!blocked_ || tree_.nodes[*blocked_].layer < x)) blocked_ = id;
    return std::nullopt;
  }

  DebugReport blocked_report() const {
    const std::size_t id = blocked_.value_or(0);
    const auto& n = tree_.nodes[id];
    const auto& act = a_.qnp.actions()[plan_.actions[n.layer]];
    DebugReport r;
    r.stage = Stage::HlprcNoRefinement;
    r.instance = inst_.name();
    r.layer = n.layer;
    r.qstate = a_.qnp.format(n.expected_qstate);
    r.hl_action = act.name;
    r.ll_state = pddl::format_state(inst_, n.ll_state);
    for (const auto* gl : pddl::applicable_actions(n.ll_state, actions_)) r.ll_actions.push_back(pddl::format_action(inst_, *gl));
    r.ll_prefix = path_to(tree_, id, inst_);
    r.hl_plan = format_hl_plan(a_.qnp, plan_);
    r.detail = "no LL action refines " + act.name + " at step " + std::to_string(n.layer) + " of the HL plan";
    auto idx = a_.mapping.find_hl_action(act.name);
    if (idx && !a_.mapping.schema_of[*idx]) r.notes.push_back(act.name + " has no action_map entry");
    for (const auto& m : mismatches_) r.notes.push_back(m);
    return r;
  }

  const Abstraction& a_;
  const pddl::Instance& inst_;
  const HlPlan& plan_;
  const TreeOptions& opts_;
  std::vector<pddl::GroundAction> actions_;
  RefinedTree tree_;
  std::set<std::pair<std::size_t, pddl::GroundState>> seen_;
  std::optional<std::size_t> blocked_;
  std::vector<std::string> mismatches_;
};

}  // namespace

RefineOutcome build_refined_tree(const Abstraction& a, const pddl::Instance& inst, const HlPlan& plan,
                                 const TreeOptions& opts) {
  return TreeBuilder(a, inst, plan, opts).run();
}

std::variant<DebugReport, NoDiagnosis> run_llgrc(const RefinedTree& t, const Abstraction& a,
                                                 const pddl::Instance& inst, const HlPlan& plan,
                                                 std::size_t reach_budget) {
  if (t.k == 0) return NoDiagnosis{};
  const auto actions = pddl::ground_actions(inst);
  std::map<std::pair<pddl::GroundState, std::size_t>, bool> memo;
  auto reach = [&](const pddl::GroundState& s, std::size_t bound) {
    auto key = std::make_pair(s, bound);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    bool r = pddl::bounded_goal_reachable(inst, actions, s, bound, reach_budget);
    memo.emplace(std::move(key), r);
    return r;
  };

  for (std::size_t i = std::min(t.k, t.depth + 1); i-- > 0;) {
    for (std::size_t id = 0; id < t.nodes.size(); ++id) {
      const auto& n = t.nodes[id];
      if (n.layer != i || n.children.empty()) continue;
      if (!reach(n.ll_state, t.k - i)) continue;
      bool all_dead = std::all_of(n.children.begin(), n.children.end(),
                                  [&](std::size_t c) { return !reach(t.nodes[c].ll_state, t.k - i - 1); });
      if (!all_dead) continue;
      DebugReport r;
      r.stage = Stage::LlgrcBadTransition;
      r.instance = inst.name();
      r.layer = i;
      r.qstate = a.qnp.format(n.expected_qstate);
      r.hl_action = a.qnp.actions()[plan.actions[i]].name;
      r.next_qstate = a.qnp.format(plan.states[i + 1]);
      r.ll_state = pddl::format_state(inst, n.ll_state);
      for (auto c : n.children) r.ll_actions.push_back(pddl::format_action(inst, *t.nodes[c].in_action_ll));
      r.ll_prefix = path_to(t, id, inst);
      r.hl_plan = format_hl_plan(a.qnp, plan);
      r.detail = "the LL state at step " + std::to_string(i) + " reaches the goal within " + std::to_string(t.k - i) +
                 " steps, but none of its refined successors does within " + std::to_string(t.k - i - 1);
      return r;
    }
  }
  return NoDiagnosis{};
}

PipelineOutcome run_pipeline(const Abstraction& a, std::span<const pddl::Instance> insts, const PipelineOptions& opts) {
  auto asc = run_asc(a, opts.solver);
  if (auto* r = std::get_if<DebugReport>(&asc)) return Rejected{std::move(*r), std::nullopt};
  Accepted accepted{std::get<qnp::Policy>(std::move(asc)), {}};

  for (std::size_t i = 0; i < insts.size(); ++i) {
    const auto& inst = insts[i];
    auto tag = [&](DebugReport r) {
      r.instance = inst.name();
      r.instance_index = i + 1;
      return Rejected{std::move(r), accepted.policy};
    };
    auto hl = run_hlisc(a, accepted.policy, inst, opts.step_bound);
    if (auto* r = std::get_if<DebugReport>(&hl)) return tag(std::move(*r));
    const auto& plan = std::get<HlPlan>(hl);

    auto refined = build_refined_tree(a, inst, plan, opts.tree);
    if (auto* ok = std::get_if<RefineSuccess>(&refined)) {
      accepted.plans.push_back(std::move(ok->plan));
      continue;
    }
    if (auto* r = std::get_if<DebugReport>(&refined)) return tag(std::move(*r));
    const auto& tree = std::get<RefinedTree>(refined);
    auto diag = run_llgrc(tree, a, inst, plan, opts.reach_budget);
    if (auto* r = std::get_if<DebugReport>(&diag)) return tag(std::move(*r));
    DebugReport r;
    r.stage = Stage::LlgrcBadTransition;
    r.hl_plan = format_hl_plan(a.qnp, plan);
    r.detail = "the refined tree reaches depth " + std::to_string(plan.k()) +
               " without an LL goal state, and the LL goal is not reachable within " + std::to_string(plan.k()) +
               " steps from the initial state, so the HL plan is too short for this instance";
    return tag(std::move(r));
  }
  return accepted;
}

namespace {

std::string block(std::string_view title, std::string_view body) {
  std::string out(title);
  out += ":\n```\n";
  out += body;
  if (!body.empty() && body.back() != '\n') out += '\n';
  out += "```\n";
  return out;
}

std::string bullets(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += "- " + s + "\n";
  return out;
}

std::string join(const std::vector<std::string>& items, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

std::string lines(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += s + "\n";
  return out;
}

constexpr std::string_view kClosing = "Fix the QNP abstraction Q.\n";
constexpr std::string_view kReplyFormat =
    "Reply with the complete revised abstraction document as a single JSON object in the same format.\n";

}  // namespace

std::string render_prompt(const DebugReport& r, const PromptContext& ctx) {
  const std::string_view name = stage_name(r.stage);
  std::string out;
  auto qnp_blocks = [&] {
    out += block("Q (abstraction document)", ctx.abstraction);
    out += block("Q (QNP listing)", ctx.qnp_text);
  };
  auto notes = [&] {
    if (!r.notes.empty()) out += "Additional observations:\n" + bullets(r.notes);
  };

  switch (r.stage) {
    case Stage::DocInvalid:
      out += "Input: abstraction document Q, Domain D_l\n";
      out += block("Q (abstraction document)", ctx.abstraction);
      out += block("D_l", ctx.domain_pddl);
      out += "The abstraction document Q could not be turned into a QNP with a refinement mapping over D_l. "
             "The following problems were found:\n";
      out += bullets(r.violations);
      notes();
      break;
    case Stage::AscUnsolvable:
      out += "Input: QNP Abstraction Q\n";
      qnp_blocks();
      out += "We used a QNP solver to solve Q, but no solution is return. ";
      break;
    case Stage::AscTimeout:
      out += "Input: QNP Abstraction Q\n";
      qnp_blocks();
      out += "We used a QNP solver to solve Q, but it encountered an unexpected dead-end and timed out (" + r.detail +
             "). ";
      break;
    case Stage::HliscBadInstance:
      out += "Input: QNP Q, LL Q_l, Mapping m\n";
      qnp_blocks();
      out += block("Q_l (instance " + r.instance + ")", ctx.instance_pddl);
      out += "We compute Q_h with Q_l and m, but Q_h is not an instance of Q. "
             "The abstract initial state or goal of Q_l violates:\n";
      out += bullets(r.violations);
      notes();
      break;
    case Stage::HliscAborted:
    case Stage::HliscTimeout:
      out += "Input: QNP Q, LL Q_l, Policy pi, Mapping m\n";
      qnp_blocks();
      out += block("Q_l (instance " + r.instance + ")", ctx.instance_pddl);
      out += block("pi", ctx.policy_text);
      out += "We compute Q_h with Q_l and m, and confirmed that Q_h is an instance of Q. "
             "Policy pi should solve Q_h, but fails.\nException:\n";
      if (r.stage == Stage::HliscAborted) {
        out += "The execution exc(pi) of pi aborted prematurely before reaching the goal of Q_h.\n";
      } else {
        out += "The execution exc(pi) of pi timed out due to getting stuck in an unexpected dead-end.\n";
      }
      out += block("exc(pi)", lines(r.trace) + "last qstate: " + r.qstate + "\n");
      break;
    case Stage::HlprcNoRefinement:
      out += "Input: Instances Q_l and Q_h, Plan sigma_h of Q_h\n";
      qnp_blocks();
      out += block("Q_l (instance " + r.instance + ")", ctx.instance_pddl);
      out += block("sigma_h", lines(r.hl_plan));
      out += block("LL state s_l after " + std::to_string(r.layer.value_or(0)) + " refined steps", r.ll_state);
      out += "Plan sigma_h should be refined as an action sequence in Q_l, when we trying to do this, "
             "the following exception raised:\n";
      out += "- There is no refinement action in Q_l of the abstract action " + r.hl_action + " (step " +
             std::to_string(r.layer.value_or(0)) + " of sigma_h, abstract state " + r.qstate + "). Action " +
             r.hl_action + " should be an abstraction of one of actions in {" + join(r.ll_actions, ", ") + "}.\n";
      notes();
      break;
    case Stage::LlgrcBadTransition:
      out += "Input: Instances Q_l and Q_h, Plan sigma_h of Q_h, Action sequence sigma_l in Q_l\n";
      qnp_blocks();
      out += block("Q_l (instance " + r.instance + ")", ctx.instance_pddl);
      out += block("sigma_h", lines(r.hl_plan));
      out += block("sigma_l", lines(r.ll_prefix));
      out += "The action sequence sigma_l refined by sigma_h should reach the goal of Q_l. "
             "When we examined the request, the following exception raised:\n";
      if (r.layer) {
        out += "- The abstract action " + r.hl_action + " and state " + r.qstate + " in Q_h (leading to " +
               r.next_qstate + ") corresponds to " + join(r.ll_actions, ", ") + " and the LL state {" + r.ll_state +
               "} in Q_l are inappropriate.\n";
      } else {
        out += "- " + r.detail + ".\n";
      }
      notes();
      break;
    default:
      throw UnknownStage("no prompt template for stage " + std::string(name));
  }
  out += kClosing;
  out += kReplyFormat;
  return out;
}

namespace {

class PolicyRefiner {
 public:
  PolicyRefiner(const Abstraction& a, const qnp::Policy& pi, const pddl::Instance& inst, const ExecOptions& opts)
      : a_(a), pi_(pi), inst_(inst), opts_(opts), actions_(pddl::ground_actions(inst)) {}

  std::variant<pddl::Plan, ExecFailure> run() {
    const auto& s0 = inst_.init();
    auto v0 = refinement::abstract_state(a_.mapping, s0, inst_);
    bound_ = opts_.step_bound.value_or(default_step_bound(v0));
    visited_.insert(s0);
    if (dfs(s0, v0)) return plan_;
    if (expansions_ > opts_.max_expansions) {
      return ExecFailure{"expansion limit of " + std::to_string(opts_.max_expansions) + " reached"};
    }
    if (!first_undefined_.empty()) {
      return ExecFailure{"no refinement-consistent path to the goal; the policy is undefined at " + first_undefined_};
    }
    return ExecFailure{"no refinement-consistent path to the goal within " + std::to_string(bound_) + " steps"};
  }

 private:
  bool dfs(const pddl::GroundState& s, const AbstractValuation& v) {
    if (pddl::holds_goal(s, inst_.goal())) return true;
    if (plan_.size() >= bound_ || ++expansions_ > opts_.max_expansions) return false;
    const qnp::QState q = refinement::to_qstate(v);
    auto idx = pi_.lookup(q);
    if (!idx) {
      if (first_undefined_.empty()) first_undefined_ = a_.qnp.format(q);
      return false;
    }
    const auto& act = a_.qnp.actions()[*idx];
    if (!qnp::applicable_q(q, act)) return false;
    for (const auto& gl : actions_) {
      if (!pddl::applicable(s, gl)) continue;
      if (!refinement::is_refinement(gl, act.name, a_.mapping, inst_.domain())) continue;
      pddl::GroundState next = pddl::apply(s, gl);
      if (visited_.count(next)) continue;
      AbstractValuation nv = refinement::abstract_state(a_.mapping, next, inst_);
      if (!refinement::transition_consistent(act, v, nv)) continue;
      visited_.insert(next);
      plan_.push_back(gl);
      if (dfs(next, nv)) return true;
      plan_.pop_back();
      if (expansions_ > opts_.max_expansions) return false;
    }
    return false;
  }

  const Abstraction& a_;
  const qnp::Policy& pi_;
  const pddl::Instance& inst_;
  const ExecOptions& opts_;
  std::vector<pddl::GroundAction> actions_;
  std::set<pddl::GroundState> visited_;
  pddl::Plan plan_;
  std::size_t bound_ = 0;
  std::size_t expansions_ = 0;
  std::string first_undefined_;
};

}  // namespace

std::variant<pddl::Plan, ExecFailure> execute_refined_policy(const Abstraction& a, const qnp::Policy& pi,
                                                             const pddl::Instance& inst, const ExecOptions& opts) {
  return PolicyRefiner(a, pi, inst, opts).run();
}

}  // namespace absforge::pipeline
