#include "absforge/refinement.hpp"

#include <algorithm>

namespace absforge::refinement {

std::optional<std::size_t> RefinementMapping::find_hl_action(std::string_view name) const {
  for (std::size_t i = 0; i < hl_actions.size(); ++i) {
    if (hl_actions[i] == name) return i;
  }
  return std::nullopt;
}

std::string format_valuation(const AbstractValuation& v, const qnp::Problem& p) {
  std::string out;
  for (std::size_t j = 0; j < v.nums.size(); ++j) {
    if (!out.empty()) out += ' ';
    out += p.nums().at(j) + "=" + std::to_string(v.nums[j]);
  }
  for (std::size_t i = 0; i < v.bools.size(); ++i) {
    if (!out.empty()) out += ' ';
    out += (v.bools[i] ? "" : "!") + p.bools().at(i);
  }
  return out;
}

AbstractValuation abstract_state(const RefinementMapping& m, const pddl::GroundState& s, const pddl::Instance& objs) {
  AbstractValuation v;
  v.bools.reserve(m.bool_features.size());
  for (const auto& f : m.bool_features) v.bools.push_back(std::get<bool>(features::eval_feature(f, s, objs)));
  v.nums.reserve(m.num_features.size());
  for (const auto& f : m.num_features) v.nums.push_back(std::get<std::size_t>(features::eval_feature(f, s, objs)));
  return v;
}

qnp::QState to_qstate(const AbstractValuation& v) {
  qnp::QState q;
  for (std::size_t i = 0; i < v.bools.size(); ++i) {
    if (v.bools[i]) q.bools |= std::uint32_t{1} << i;
  }
  for (std::size_t j = 0; j < v.nums.size(); ++j) {
    if (v.nums[j] > 0) q.nums |= std::uint32_t{1} << j;
  }
  return q;
}

namespace {

pddl::GroundState goal_state(const pddl::Instance& inst) {
  std::vector<pddl::Atom> atoms = inst.goal();
  const auto statics = inst.static_atoms();
  atoms.insert(atoms.end(), statics.atoms().begin(), statics.atoms().end());
  return pddl::GroundState(std::move(atoms));
}

}  // namespace

AbstractValuation abstract_goal(const RefinementMapping& m, const pddl::Instance& inst) {
  return abstract_state(m, goal_state(inst), inst);
}

std::vector<std::string> goal_abstraction_warnings(const RefinementMapping& m, const qnp::Problem& p,
                                                   const pddl::Instance& inst) {
  const auto is_static = inst.domain().static_predicates();
  std::vector<bool> in_goal(inst.domain().predicates.size(), false);
  for (const auto& a : inst.goal()) in_goal[a.predicate] = true;
  std::vector<std::string> out;
  auto check = [&](const features::Feature& f, const std::string& var) {
    for (auto pid : features::predicates_used(f)) {
      if (!is_static[pid] && !in_goal[pid]) {
        out.push_back("feature " + var + " mentions fluent " + inst.domain().predicates[pid].name +
                      ", which the goal does not specify; its goal value assumes it is false");
        return;
      }
    }
  };
  for (std::size_t i = 0; i < m.bool_features.size(); ++i) check(m.bool_features[i], p.bools().at(i));
  for (std::size_t j = 0; j < m.num_features.size(); ++j) check(m.num_features[j], p.nums().at(j));
  return out;
}

std::variant<HlInstance, MismatchReport> check_hl_instance(const Abstraction& a, const pddl::Instance& inst) {
  HlInstance hl;
  hl.init_valuation = abstract_state(a.mapping, inst.init(), inst);
  hl.init = to_qstate(hl.init_valuation);
  hl.goal_valuation = abstract_goal(a.mapping, inst);
  hl.goal = to_qstate(hl.goal_valuation);

  MismatchReport report;
  auto observed = [&](const qnp::Literal& l, const AbstractValuation& v) {
    if (l.kind == qnp::VarKind::Num) return a.qnp.nums()[l.var] + "=" + std::to_string(v.nums[l.var]);
    return a.qnp.bools()[l.var] + "=" + (v.bools[l.var] ? "true" : "false");
  };
  for (const auto& l : a.qnp.init()) {
    if (!hl.init.holds(l)) report.violations.push_back({a.qnp.format(l), false, observed(l, hl.init_valuation)});
  }
  for (const auto& l : a.qnp.goal()) {
    if (!hl.goal.holds(l)) report.violations.push_back({a.qnp.format(l), true, observed(l, hl.goal_valuation)});
  }
  if (report.violations.empty()) return hl;
  report.warnings = goal_abstraction_warnings(a.mapping, a.qnp, inst);
  return report;
}

bool is_refinement(const pddl::GroundAction& a_l, std::string_view hl_action, const RefinementMapping& m,
                   const pddl::Domain& dom) {
  auto idx = m.find_hl_action(hl_action);
  if (!idx) throw UnknownHlAction("unknown HL action " + std::string(hl_action));
  const auto& schema = m.schema_of[*idx];
  return schema && dom.actions.at(a_l.schema).name == *schema;
}

bool transition_consistent(const qnp::Action& a_h, const AbstractValuation& v, const AbstractValuation& next) {
  if (v.bools.size() != next.bools.size() || v.nums.size() != next.nums.size()) return false;
  std::vector<bool> expected = v.bools;
  for (const auto& l : a_h.bool_eff) expected.at(l.var) = l.positive;
  if (expected != next.bools) return false;
  for (std::size_t j = 0; j < v.nums.size(); ++j) {
    auto eff = std::find_if(a_h.num_eff.begin(), a_h.num_eff.end(), [j](const qnp::NumEffect& e) { return e.var == j; });
    if (eff == a_h.num_eff.end()) {
      if (next.nums[j] != v.nums[j]) return false;
    } else if (eff->increase) {
      if (!(next.nums[j] > v.nums[j])) return false;
    } else if (!(next.nums[j] < v.nums[j])) {
      return false;
    }
  }
  return true;
}

}  // namespace absforge::refinement
