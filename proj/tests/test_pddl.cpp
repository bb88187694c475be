#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "absforge/error.hpp"
#include "absforge/pddl.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace absforge;
using namespace absforge::pddl;
using absforge::testing::kMiniGripper;
using absforge::testing::mini_gripper_problem;
using absforge::testing::parse_inline;

namespace {

Atom atom(const Instance& inst, std::string_view pred, std::initializer_list<std::string_view> args) {
  auto pid = inst.domain().find_predicate(pred);
  REQUIRE(pid);
  std::vector<ObjectId> ids;
  for (auto a : args) {
    auto id = inst.find_object(a);
    REQUIRE(id);
    ids.push_back(*id);
  }
  return make_atom(*pid, ids);
}

const GroundAction& action(const std::vector<GroundAction>& all, const Instance& inst, std::string_view text) {
  const GroundAction* a = find_ground_action(all, inst, text);
  REQUIRE_MESSAGE(a != nullptr, text);
  return *a;
}

std::size_t count_schema(const std::vector<GroundAction>& all, const Instance& inst, std::string_view name) {
  return std::count_if(all.begin(), all.end(),
                       [&](const GroundAction& g) { return inst.domain().actions[g.schema].name == name; });
}

ParseErrorKind parse_error_kind(const std::function<void()>& f) {
  try {
    f();
  } catch (const ParseError& e) {
    return e.kind();
  }
  FAIL("expected a ParseError");
  return ParseErrorKind::Syntax;
}

}  // namespace

TEST_CASE("gripper domain parses with its three actions") {
  auto dom = testing::load_domain("gripper/domain.pddl");
  CHECK(dom->name == "gripper");
  CHECK(dom->actions.size() == 3);
  for (auto name : {"move", "pick", "drop"}) CHECK(dom->find_action(name) != nullptr);
  for (auto p : {"at-robby", "at", "free", "carry", "goal_at", "ball", "gripper"}) CHECK(dom->find_predicate(p));
  CHECK(dom->predicates[*dom->find_predicate("at")].arity() == 2);
}

TEST_CASE("domain without actions is valid") {
  auto dom = parse_domain("(define (domain empty) (:requirements :strips) (:predicates (p)))");
  CHECK(dom.actions.empty());
  CHECK(dom.predicates.size() == 1);
}

TEST_CASE("unsupported requirement is rejected") {
  CHECK(parse_error_kind([] { parse_domain("(define (domain d) (:requirements :adl) (:predicates (p)))"); }) ==
        ParseErrorKind::UnsupportedRequirement);
}

TEST_CASE("parse errors carry line and column") {
  try {
    parse_domain("(define (domain d)\n  (:predicates (p))\n  (:action a :parameters () :effect (q)))");
    FAIL("expected a ParseError");
  } catch (const ParseError& e) {
    CHECK(e.kind() == ParseErrorKind::UndeclaredPredicate);
    CHECK(e.line() == 3);
    CHECK(e.column() > 1);
  }
}

TEST_CASE("example instance: init and goal") {
  auto dom = testing::load_domain("gripper/domain.pddl");
  auto inst = testing::load_instance(dom, "gripper/example1.pddl");
  const auto& s0 = inst.init();
  for (auto [b, r] : {std::pair{"b1", "r1"}, {"b2", "r2"}, {"b4", "r4"}}) CHECK(s0.contains(atom(inst, "at", {b, r})));
  CHECK(s0.contains(atom(inst, "free", {"g1"})));
  CHECK(s0.contains(atom(inst, "free", {"g2"})));
  CHECK(s0.contains(atom(inst, "at-robby", {"r1"})));
  CHECK(s0.contains(atom(inst, "goal_at", {"b2", "r5"})));
  std::set<Atom> goal(inst.goal().begin(), inst.goal().end());
  CHECK(goal == std::set<Atom>{atom(inst, "at", {"b1", "r3"}), atom(inst, "at", {"b2", "r5"}),
                               atom(inst, "at", {"b4", "r1"})});
  CHECK_FALSE(holds_goal(s0, inst.goal()));
}

TEST_CASE("empty goal and undeclared objects") {
  auto x = parse_inline(kMiniGripper, "(define (problem p) (:domain gripper) (:objects r1 - room)"
                                      " (:init (at-robby r1)) (:goal (and)))");
  CHECK(x.instance.goal().empty());
  CHECK(holds_goal(x.instance.init(), x.instance.goal()));
  CHECK(parse_error_kind([] {
          parse_inline(kMiniGripper, "(define (problem p) (:domain gripper) (:objects r1 - room)"
                                     " (:init (at b9 r1)) (:goal (and)))");
        }) == ParseErrorKind::UndeclaredObject);
  CHECK(parse_error_kind([] {
          parse_inline(kMiniGripper, "(define (problem p) (:domain gripper) (:objects r1 - room)"
                                     " (:init (at-robby r1 r1)) (:goal (and)))");
        }) == ParseErrorKind::ArityMismatch);
  CHECK(parse_error_kind([] {
          parse_inline(kMiniGripper, "(define (problem p) (:domain gripper) (:objects r1 - room)"
                                     " (:init) (:goal (and (at-home r1))))");
        }) == ParseErrorKind::UndeclaredPredicate);
}

TEST_CASE("grounding counts follow type-consistent enumeration") {
  // Counts are derived by multiplying the sizes of the parameter types.
  auto two = parse_inline(kMiniGripper, mini_gripper_problem(2, 1));
  auto all = ground_actions(two.instance);
  CHECK(count_schema(all, two.instance, "move") == 2 * 2);
  CHECK(count_schema(all, two.instance, "pick") == 1 * 2 * 2);
  CHECK(count_schema(all, two.instance, "drop") == 1 * 2 * 2);
  CHECK(find_ground_action(all, two.instance, "(move r1 r1)") != nullptr);

  auto three = parse_inline(kMiniGripper, mini_gripper_problem(3, 1));
  CHECK(count_schema(ground_actions(three.instance), three.instance, "move") == 9);

  auto none = parse_inline(kMiniGripper, mini_gripper_problem(2, 0));
  auto g = ground_actions(none.instance);
  CHECK(count_schema(g, none.instance, "pick") == 0);
  CHECK(count_schema(g, none.instance, "drop") == 0);
  CHECK(count_schema(g, none.instance, "move") == 4);
}

TEST_CASE("grounding order is schema name then arguments") {
  auto x = parse_inline(kMiniGripper, mini_gripper_problem(3, 2));
  auto all = ground_actions(x.instance);
  std::vector<std::string> names;
  for (const auto& a : all) names.push_back(format_action(x.instance, a));
  CHECK(std::is_sorted(names.begin(), names.end()));
  CHECK(ground_actions(x.instance) == all);
}

TEST_CASE("applicability and progression on the example state") {
  auto dom = testing::load_domain("gripper/domain.pddl");
  auto inst = testing::load_instance(dom, "gripper/example1.pddl");
  auto all = ground_actions(inst);
  const auto& s0 = inst.init();
  const auto& pick = action(all, inst, "(pick b1 r1 g1)");
  CHECK(applicable(s0, pick));
  CHECK_FALSE(applicable(s0, action(all, inst, "(pick b2 r2 g1)")));

  auto s1 = apply(s0, pick);
  CHECK_FALSE(s1.contains(atom(inst, "at", {"b1", "r1"})));
  CHECK_FALSE(s1.contains(atom(inst, "free", {"g1"})));
  CHECK(s1.contains(atom(inst, "carry", {"b1", "g1"})));
  CHECK(s1.size() == s0.size() - 1);

  auto there = apply(s0, action(all, inst, "(move r1 r2)"));
  auto back = apply(there, action(all, inst, "(move r2 r1)"));
  CHECK(back == s0);
  CHECK_THROWS_AS(apply(s0, action(all, inst, "(drop b1 r1 g1)")), NotApplicable);
}

TEST_CASE("action without precondition or effects") {
  auto x = parse_inline("(define (domain d) (:predicates (p)) (:action noop :parameters () :effect (and)))",
                        "(define (problem q) (:domain d) (:init (p)) (:goal (and (p))))");
  auto all = ground_actions(x.instance);
  REQUIRE(all.size() == 1);
  CHECK(applicable(GroundState{}, all[0]));
  CHECK(apply(x.instance.init(), all[0]) == x.instance.init());
}

TEST_CASE("validate_plan reports the first failing step") {
  auto x = parse_inline(kMiniGripper, mini_gripper_problem(3, 1));
  auto all = ground_actions(x.instance);
  auto step = [&](std::string_view t) { return action(all, x.instance, t); };
  Plan good{step("(pick b1 r1 g1)"), step("(move r1 r3)"), step("(drop b1 r3 g1)")};
  auto ok = validate_plan(x.instance, good);
  CHECK(ok.valid);
  CHECK_FALSE(ok.failing_step);

  Plan swapped{step("(move r1 r3)"), step("(pick b1 r1 g1)"), step("(drop b1 r3 g1)")};
  auto bad = validate_plan(x.instance, swapped);
  CHECK_FALSE(bad.valid);
  REQUIRE(bad.failing_step);
  CHECK(*bad.failing_step == 1);

  Plan wrong_first{step("(drop b1 r1 g1)")};
  CHECK(validate_plan(x.instance, wrong_first).failing_step == std::optional<std::size_t>(0));

  auto delivered = parse_inline(kMiniGripper, mini_gripper_problem(2, 1, "(at b1 r2)", "(at b1 r2)"));
  CHECK(validate_plan(delivered.instance, {}).valid);
}

TEST_CASE("a plan that opens with an inapplicable pick fails at step 0") {
  // The ball and robot start apart, so moving first is required; swapping puts pick first.
  auto x = parse_inline(kMiniGripper,
                        mini_gripper_problem(3, 1, "(at b1 r2) (goal_at b1 r3)", "(at b1 r3)"));
  auto all = ground_actions(x.instance);
  auto step = [&](std::string_view t) { return action(all, x.instance, t); };
  Plan good{step("(move r1 r2)"), step("(pick b1 r2 g1)"), step("(move r2 r3)"), step("(drop b1 r3 g1)")};
  CHECK(validate_plan(x.instance, good).valid);
  Plan swapped{step("(pick b1 r2 g1)"), step("(move r1 r2)"), step("(move r2 r3)"), step("(drop b1 r3 g1)")};
  CHECK(validate_plan(x.instance, swapped).failing_step == std::optional<std::size_t>(0));
}

TEST_CASE("bounded reachability examples") {
  auto x = parse_inline(kMiniGripper, mini_gripper_problem(2, 1, "(at b1 r1)", "(at b1 r2)"));
  const auto& inst = x.instance;
  CHECK_FALSE(bounded_goal_reachable(inst, inst.init(), 2));
  CHECK(bounded_goal_reachable(inst, inst.init(), 3));
  auto all = ground_actions(inst);
  auto done = apply(apply(apply(inst.init(), action(all, inst, "(pick b1 r1 g1)")), action(all, inst, "(move r1 r2)")),
                    action(all, inst, "(drop b1 r2 g1)"));
  CHECK(bounded_goal_reachable(inst, done, 0));

  auto never = parse_inline(kMiniGripper, mini_gripper_problem(2, 1, "(at b1 r1)", "(goal_at b1 r2)"));
  for (std::size_t k = 0; k <= 5; ++k) CHECK_FALSE(bounded_goal_reachable(never.instance, never.instance.init(), k));
}

TEST_CASE("bounded reachability raises ResourceLimit past its budget") {
  auto x = parse_inline(kMiniGripper, mini_gripper_problem(4, 2));
  CHECK_THROWS_AS(bounded_goal_reachable(x.instance, x.instance.init(), 20, 5), ResourceLimit);
}

namespace {

/// Random states over all type-consistent ground atoms of the mini domain.
GroundState random_state(const Instance& inst, std::mt19937& rng) {
  std::vector<Atom> atoms;
  const auto& dom = inst.domain();
  std::bernoulli_distribution coin(0.3);
  for (PredicateId p = 0; p < dom.predicates.size(); ++p) {
    const auto& params = dom.predicates[p].param_types;
    std::vector<ObjectId> args(params.size());
    std::function<void(std::size_t)> rec = [&](std::size_t i) {
      if (i == params.size()) {
        if (coin(rng)) atoms.push_back(make_atom(p, args));
        return;
      }
      for (auto o : inst.objects_of_type(params[i])) {
        args[i] = o;
        rec(i + 1);
      }
    };
    rec(0);
  }
  return GroundState(atoms);
}

}  // namespace

TEST_CASE("apply is deterministic and respects the frame") {
  auto x = parse_inline(kMiniGripper, mini_gripper_problem(3, 2));
  auto all = ground_actions(x.instance);
  std::mt19937 rng(7);
  std::size_t checked = 0;
  for (int trial = 0; trial < 300; ++trial) {
    auto s = random_state(x.instance, rng);
    for (const auto& a : all) {
      if (!applicable(s, a)) continue;
      auto t = apply(s, a);
      CHECK(t == apply(s, a));
      std::set<Atom> touched(a.add.begin(), a.add.end());
      touched.insert(a.del.begin(), a.del.end());
      for (const auto& at : s.atoms()) {
        if (!touched.count(at)) CHECK(t.contains(at));
      }
      for (const auto& at : t.atoms()) {
        if (!touched.count(at)) CHECK(s.contains(at));
      }
      for (const auto& ad : a.add) CHECK(t.contains(ad));
      ++checked;
    }
  }
  CHECK(checked > 100);
}

TEST_CASE("validate_plan agrees with an independent replay") {
  auto x = parse_inline(kMiniGripper, mini_gripper_problem(2, 1, "(at b1 r1)", "(at b1 r2)"));
  auto all = ground_actions(x.instance);
  std::mt19937 rng(11);
  std::uniform_int_distribution<std::size_t> pick(0, all.size() - 1);
  std::size_t valid = 0;
  for (int trial = 0; trial < 2000; ++trial) {
    Plan p;
    std::size_t len = 1 + trial % 5;
    for (std::size_t i = 0; i < len; ++i) p.push_back(all[pick(rng)]);
    bool v = validate_plan(x.instance, p).valid;
    CHECK(v == oracle::replay_plan(x.instance, p));
    valid += v;
  }
  CHECK(valid > 0);
}

TEST_CASE("bounded reachability is monotone in k and matches enumeration") {
  auto x = parse_inline(kMiniGripper, mini_gripper_problem(2, 2, "(at b1 r1) (at b2 r2)", "(at b1 r2) (at b2 r1)"));
  auto all = ground_actions(x.instance);
  std::mt19937 rng(3);
  for (int trial = 0; trial < 40; ++trial) {
    auto s = random_state(x.instance, rng);
    bool prev = false;
    for (std::size_t k = 0; k <= 4; ++k) {
      bool r = bounded_goal_reachable(x.instance, all, s, k);
      CHECK(r == oracle::reachable_by_enumeration(x.instance, all, s, k));
      if (prev) CHECK(r);
      prev = r;
    }
  }
}

TEST_CASE("static predicates are those no action changes") {
  auto dom = testing::load_domain("gripper/domain.pddl");
  auto st = dom->static_predicates();
  CHECK(st[*dom->find_predicate("goal_at")]);
  CHECK(st[*dom->find_predicate("ball")]);
  CHECK_FALSE(st[*dom->find_predicate("at")]);
  CHECK_FALSE(st[*dom->find_predicate("at-robby")]);
}

TEST_CASE("typing hierarchy, negative preconditions and equality") {
  auto x = parse_inline(R"(
    (define (domain h)
      (:requirements :strips :typing :negative-preconditions :equality)
      (:types vehicle - object car truck - vehicle place)
      (:predicates (at ?v - vehicle ?p - place) (busy ?v - vehicle))
      (:action go
        :parameters (?v - vehicle ?a ?b - place)
        :precondition (and (at ?v ?a) (not (busy ?v)) (not (= ?a ?b)))
        :effect (and (at ?v ?b) (not (at ?v ?a)))))
  )",
                        "(define (problem q) (:domain h) (:objects c - car t - truck p1 p2 - place)"
                        " (:init (at c p1) (at t p1) (busy t)) (:goal (and (at c p2))))");
  auto all = ground_actions(x.instance);
  CHECK(all.size() == 2 * 2);  // two vehicles, ordered pairs of distinct places
  CHECK(x.instance.objects_of_type("vehicle").size() == 2);
  CHECK(applicable(x.instance.init(), action(all, x.instance, "(go c p1 p2)")));
  CHECK_FALSE(applicable(x.instance.init(), action(all, x.instance, "(go t p1 p2)")));
  CHECK(find_ground_action(all, x.instance, "(go c p1 p1)") == nullptr);
}
