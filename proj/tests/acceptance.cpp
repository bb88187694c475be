// Runs the eight acceptance criteria and prints one PASS/FAIL line for each.
// Exit status is the number of failed criteria.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "absforge/features.hpp"
#include "absforge/harness.hpp"
#include "absforge/pipeline.hpp"
#include "absforge/solver.hpp"
#include "fixtures.hpp"
#include "generators.hpp"
#include "oracles.hpp"

using namespace absforge;

namespace {

/// Collects failed expectations for one criterion.
class Checker {
 public:
  void expect(bool ok, const std::string& what) {
    ++checks_;
    if (!ok && failures_.size() < 5) failures_.push_back(what);
    failed_ |= !ok;
  }
  bool failed() const { return failed_; }
  std::size_t checks() const { return checks_; }
  std::string summary() const {
    std::string out;
    for (const auto& f : failures_) out += (out.empty() ? "" : "; ") + f;
    return out;
  }

 private:
  bool failed_ = false;
  std::size_t checks_ = 0;
  std::vector<std::string> failures_;
};

constexpr int kCap = 5;

// 1 -------------------------------------------------------------------------

void solver_soundness(Checker& c) {
  std::size_t solved = 0, unsolvable = 0;
  for (const auto& f : testing::qnp_fixtures()) {
    auto p = testing::load_qnp(f);
    if (p.bools().size() + p.nums().size() > 4) continue;
    auto out = qnp::solve(p);
    if (auto* s = std::get_if<qnp::Solved>(&out)) {
      ++solved;
      c.expect(oracle::policy_solves(p, s->policy, kCap), f + ": solved policy fails the model check");
    } else if (std::holds_alternative<qnp::Unsolvable>(out)) {
      ++unsolvable;
      auto e = oracle::find_policy(p, kCap, 1'000'000);
      c.expect(!e.exhausted_limit, f + ": enumeration limit reached");
      c.expect(!e.solution, f + ": enumeration found a policy the solver missed");
    } else {
      c.expect(false, f + ": resource limit");
    }
  }
  c.expect(solved > 0 && unsolvable > 0, "fixtures must include both verdicts");
}

// 2 -------------------------------------------------------------------------

using Edge = std::tuple<std::string, std::string, std::string>;  // from, action, to

std::set<Edge> edges_of(const qnp::PolicyGraph& g, const qnp::Problem& p) {
  std::set<Edge> out;
  for (const auto& e : g.edges) {
    out.insert({p.format(g.nodes[e.from]), p.actions()[e.action].name, p.format(g.nodes[e.to])});
  }
  return out;
}

void sieve_correctness(Checker& c) {
  // Take leaves X>0 or X=0 with p set; Return undoes p and increments X.
  // Every node is in one SCC in which X is both incremented and decremented,
  // so nothing can be removed and the cycle remains.
  {
    auto p = testing::load_qnp("qnp/inc_dec_cycle.qnp");
    auto qs = [&](std::initializer_list<std::string_view> lits) {
      qnp::QState s;
      for (auto l : lits) s.set(p.parse_literal(l));
      return s;
    };
    qnp::Policy pi;
    pi.rules[qs({"!p", "X>0"})] = 0;
    pi.rules[qs({"p", "X>0"})] = 1;
    auto g = qnp::build_policy_graph(pi, p);
    c.expect(g.has_value(), "inc/dec policy graph should be closed");
    if (g) {
      const std::set<Edge> hand{{"X>0 !p", "Take", "X>0 p"}, {"X>0 !p", "Take", "X=0 p"}, {"X>0 p", "Return", "X>0 !p"}};
      c.expect(edges_of(*g, p) == hand, "inc/dec policy graph differs from the hand-derived one");
      c.expect(!qnp::sieve_terminates(*g), "Sieve accepts the inc/dec 2-cycle");
    }
    c.expect(!qnp::verify_policy(pi, p), "verify_policy accepts the inc/dec 2-cycle");
    c.expect(std::holds_alternative<qnp::Unsolvable>(qnp::solve(p)), "inc/dec fixture should be unsolvable");
  }
  // Take decrements X inside the SCC {!p X>0, p X>0} and nothing increments
  // it, so the Take edges go and the residue is acyclic.
  {
    auto p = testing::load_qnp("qnp/pure_dec_loop.qnp");
    auto qs = [&](std::initializer_list<std::string_view> lits) {
      qnp::QState s;
      for (auto l : lits) s.set(p.parse_literal(l));
      return s;
    };
    qnp::Policy pi;
    pi.rules[qs({"!p", "X>0"})] = 0;
    pi.rules[qs({"p", "X>0"})] = 1;
    auto g = qnp::build_policy_graph(pi, p);
    c.expect(g.has_value(), "pure-dec policy graph should be closed");
    if (g) {
      const std::set<Edge> hand{{"X>0 !p", "Take", "X>0 p"}, {"X>0 !p", "Take", "X=0 p"}, {"X>0 p", "Reset", "X>0 !p"}};
      c.expect(edges_of(*g, p) == hand, "pure-dec policy graph differs from the hand-derived one");
      c.expect(qnp::sieve_terminates(*g), "Sieve rejects the pure-dec loop");
    }
    c.expect(qnp::verify_policy(pi, p), "verify_policy rejects the pure-dec loop");
    c.expect(std::holds_alternative<qnp::Solved>(qnp::solve(p)), "pure-dec fixture should be solvable");
  }
}

// 3 -------------------------------------------------------------------------

void feature_oracle(Checker& c) {
  std::mt19937 rng(20240611);
  std::size_t pairs = 0;
  for (int trial = 0; trial < 150; ++trial) {
    auto world = gen::formula_instance(rng);
    auto ftext = gen::random_formula(rng);
    auto ctext = gen::random_count(rng);
    auto f = features::parse_formula(ftext, *world.domain);
    auto t = features::parse_count(ctext, *world.domain);
    for (int k = 0; k < 2; ++k) {
      auto s = gen::random_state(world.instance, rng);
      auto w = oracle::world_of(world.instance, s);
      c.expect(features::eval_formula(f, s, world.instance) == oracle::eval_formula(ftext, w), "formula " + ftext);
      c.expect(features::eval_count(t, s, world.instance) == oracle::eval_count(ctext, w), "count " + ctext);
      pairs += 2;
    }
  }
  c.expect(pairs >= 200, "fewer than 200 pairs");
}

// 4 -------------------------------------------------------------------------

void gripper_end_to_end(Checker& c) {
  auto dom = testing::load_domain("gripper/domain.pddl");
  auto ref = testing::load_abstraction("gripper/docs/reference.json", *dom);
  auto train = testing::load_instances(dom, {"gripper/train/train1.pddl", "gripper/train/train2.pddl"});
  auto out = pipeline::run_pipeline(ref, train);
  c.expect(std::holds_alternative<pipeline::Accepted>(out), "reference rejected on the training instances");
  if (!std::holds_alternative<pipeline::Accepted>(out)) return;
  const auto& pi = std::get<pipeline::Accepted>(out).policy;

  std::vector<std::string> rels;
  for (int i = 1; i <= 10; ++i) rels.push_back("gripper/eval/eval" + std::string(i < 10 ? "0" : "") + std::to_string(i) + ".pddl");
  auto evals = testing::load_instances(dom, rels);
  auto ev = harness::evaluate_abstraction(ref, pi, evals);
  c.expect(ev.coverage == std::optional<double>(1.0), "coverage below 1.0");
  for (const auto& inst : evals) {
    auto plan = pipeline::execute_refined_policy(ref, pi, inst);
    c.expect(std::holds_alternative<pddl::Plan>(plan), inst.name() + ": no plan");
    if (!std::holds_alternative<pddl::Plan>(plan)) continue;
    c.expect(pddl::validate_plan(inst, std::get<pddl::Plan>(plan)).valid, inst.name() + ": plan fails validate_plan");
    c.expect(oracle::replay_plan(inst, std::get<pddl::Plan>(plan)), inst.name() + ": plan fails replay");
  }
}

// 5 -------------------------------------------------------------------------

void error_injection(Checker& c) {
  auto dom = testing::load_domain("gripper/domain.pddl");
  auto train = testing::load_instances(dom, {"gripper/train/train1.pddl", "gripper/train/train2.pddl"});
  const std::vector<std::pair<std::string, pipeline::Stage>> cases{
      {"mut_a_unsolvable", pipeline::Stage::AscUnsolvable},
      {"mut_b_bad_init", pipeline::Stage::HliscBadInstance},
      {"mut_c_missing_move", pipeline::Stage::HlprcNoRefinement},
      {"mut_d_landmark", pipeline::Stage::LlgrcBadTransition}};
  for (const auto& [doc, stage] : cases) {
    auto a = testing::load_abstraction("gripper/docs/" + doc + ".json", *dom);
    auto out = pipeline::run_pipeline(a, train);
    auto* rej = std::get_if<pipeline::Rejected>(&out);
    c.expect(rej != nullptr, doc + ": accepted");
    if (!rej) continue;
    c.expect(rej->report.stage == stage, doc + ": got " + std::string(pipeline::stage_name(rej->report.stage)) +
                                             ", want " + std::string(pipeline::stage_name(stage)));
  }
}

// 6 -------------------------------------------------------------------------

void loop_replay(Checker& c) {
  auto j = nlohmann::json::parse(testing::read_text(testing::fixture_path("gripper/run.json")));
  j["proposer"]["files"] = {"docs/mut_c_missing_move.json", "docs/reference.json"};
  j["max_iterations"] = 10;
  auto cfg = harness::RunConfig::from_json(j, testing::fixture_path("gripper"));
  auto a = harness::run_loop(cfg);
  auto b = harness::run_loop(cfg);
  c.expect(a.error.empty(), "run error: " + a.error);
  c.expect(a.accepted_iteration == std::optional<std::size_t>(2), "not accepted at iteration 2");
  for (const auto& [stage, n] : a.stage_counts) {
    std::size_t want = stage == "HLPRC_NO_REFINEMENT" ? 1 : 0;
    c.expect(n == want, stage + " count " + std::to_string(n));
  }
  c.expect(a.stage_counts.size() == std::size(pipeline::kAllStages), "stage table incomplete");
  c.expect(a.serialize() == b.serialize(), "run records differ between runs");
}

// 7 -------------------------------------------------------------------------

void reachability_exactness(Checker& c) {
  struct Case {
    int rooms, balls;
    std::string extra, goal;
  };
  const std::vector<Case> cases{
      {2, 2, "", ""},
      {3, 1, "", ""},
      {2, 1, "", ""},
      {3, 1, "", "(and (at b1 r3) (at-robby r1))"},
      {2, 2, "", "(and (carry b1 g1) (carry b2 g2))"},
  };
  std::size_t pairs = 0;
  for (const auto& k : cases) {
    auto x = testing::parse_inline(testing::kMiniGripper, testing::mini_gripper_problem(k.rooms, k.balls, k.extra, k.goal));
    const auto& inst = x.instance;
    auto actions = pddl::ground_actions(inst);
    // Every reachable state.
    std::set<pddl::GroundState> seen{inst.init()};
    std::vector<pddl::GroundState> frontier{inst.init()};
    while (!frontier.empty()) {
      auto s = frontier.back();
      frontier.pop_back();
      for (const auto* a : pddl::applicable_actions(s, actions)) {
        auto n = pddl::apply(s, *a);
        if (seen.insert(n).second) frontier.push_back(n);
      }
    }
    for (const auto& s : seen) {
      for (std::size_t bound = 0; bound <= 4; ++bound) {
        bool ours = pddl::bounded_goal_reachable(inst, actions, s, bound);
        bool ref = oracle::reachable_by_enumeration(inst, actions, s, bound);
        c.expect(ours == ref, inst.name() + ": disagreement at k=" + std::to_string(bound));
        ++pairs;
      }
    }
  }
  c.expect(pairs > 100, "too few (state, k) pairs");
}

// 8 -------------------------------------------------------------------------

void spanner_limitation(Checker& c) {
  auto dom = testing::load_domain("spanner/domain.pddl");
  auto a = testing::load_abstraction("spanner/docs/best_effort.json", *dom);
  auto insts = testing::load_instances(dom, {"spanner/corridor.pddl"});
  auto out = pipeline::run_pipeline(a, insts);
  auto* rej = std::get_if<pipeline::Rejected>(&out);
  c.expect(rej != nullptr, "best-effort abstraction accepted");
  if (rej) {
    c.expect(rej->report.stage == pipeline::Stage::HlprcNoRefinement,
             "got " + std::string(pipeline::stage_name(rej->report.stage)));
  }
}

struct Criterion {
  int id;
  const char* name;
  double limit_s;
  std::function<void(Checker&)> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> all{
      {1, "QNP solver soundness", 10, solver_soundness},
      {2, "Sieve correctness", 1, sieve_correctness},
      {3, "feature evaluator vs brute force", 30, feature_oracle},
      {4, "Gripper end-to-end", 60, gripper_end_to_end},
      {5, "error-injection staging", 60, error_injection},
      {6, "loop convergence replay", 60, loop_replay},
      {7, "bounded reachability exactness", 30, reachability_exactness},
      {8, "Spanner limitation", 30, spanner_limitation},
  };
  int failed = 0;
  for (const auto& cr : all) {
    Checker c;
    auto t0 = std::chrono::steady_clock::now();
    try {
      cr.run(c);
    } catch (const std::exception& e) {
      c.expect(false, std::string("exception: ") + e.what());
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > cr.limit_s) {
      std::ostringstream msg;
      msg << "took " << secs << " s, limit " << cr.limit_s << " s";
      c.expect(false, msg.str());
    }
    const bool ok = !c.failed();
    failed += !ok;
    std::printf("criterion %d: %s  %s (%zu checks, %.2f s)%s%s\n", cr.id, ok ? "PASS" : "FAIL", cr.name, c.checks(),
                secs, ok ? "" : ": ", ok ? "" : c.summary().c_str());
  }
  return failed;
}
