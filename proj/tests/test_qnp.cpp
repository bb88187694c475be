#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "absforge/error.hpp"
#include "absforge/qnp.hpp"
#include "fixtures.hpp"
#include "generators.hpp"

using namespace absforge;
using namespace absforge::qnp;

namespace {

Literal B(std::size_t v, bool pos = true) { return {VarKind::Bool, v, pos}; }
Literal X(std::size_t v, bool pos = true) { return {VarKind::Num, v, pos}; }

/// The ball-delivery QNP: N; H, A, G.
Problem delivery() { return testing::load_qnp("qnp/gripper.qnp"); }

QState qs(const Problem& p, std::initializer_list<std::string_view> lits) {
  QState s;
  for (auto l : lits) s.set(p.parse_literal(l));
  return s;
}

}  // namespace

TEST_CASE("applicability in the initial qstate") {
  auto p = delivery();
  auto s0 = qs(p, {"N>0", "!H", "!A", "!G"});
  auto pre_ok = make_action("a", {p.parse_literal("N>0"), p.parse_literal("!H")}, {}, {});
  auto pre_h = make_action("b", {p.parse_literal("H")}, {}, {});
  auto none = make_action("c", {}, {}, {});
  CHECK(applicable_q(s0, pre_ok));
  CHECK_FALSE(applicable_q(s0, pre_h));
  CHECK(applicable_q(s0, none));
  CHECK(applicable_q(QState{}, none));
}

TEST_CASE("successor semantics") {
  auto dec = make_action("dec", {X(0)}, {}, {{0, false}});
  QState x_pos;
  x_pos.set(X(0));
  auto succ = successors_q(x_pos, dec);
  REQUIRE(succ.size() == 2);
  QState x_zero;
  CHECK(std::count(succ.begin(), succ.end(), x_pos) == 1);
  CHECK(std::count(succ.begin(), succ.end(), x_zero) == 1);

  auto inc = make_action("inc", {}, {B(0, false)}, {{0, true}});
  QState s;
  s.set(B(0));
  auto one = successors_q(s, inc);
  REQUIRE(one.size() == 1);
  CHECK(one[0].holds(X(0)));
  CHECK(one[0].holds(B(0, false)));

  auto two = make_action("two", {X(0), X(1)}, {}, {{0, false}, {1, false}});
  QState both;
  both.set(X(0));
  both.set(X(1));
  auto four = successors_q(both, two);
  CHECK(four.size() == 4);
  CHECK(std::set<QState>(four.begin(), four.end()).size() == 4);

  CHECK_THROWS_AS(successors_q(QState{}, dec), NotApplicableQ);
}

TEST_CASE("untouched variables persist") {
  auto a = make_action("a", {}, {B(1)}, {{1, true}});
  QState s;
  s.set(B(0));
  s.set(X(0));
  auto out = successors_q(s, a);
  REQUIRE(out.size() == 1);
  CHECK(out[0].holds(B(0)));
  CHECK(out[0].holds(X(0)));
  CHECK(out[0].holds(B(1)));
  CHECK(out[0].holds(X(1)));
}

TEST_CASE("initial qstates") {
  Problem total({"H", "A", "G"}, {"N"}, {}, {X(0), B(0, false), B(1, false), B(2, false)}, {});
  CHECK(initial_qstates(total).size() == 1);
  CHECK(initial_qstates(total)[0] == qs(total, {"N>0", "!H", "!A", "!G"}));

  // The committed fixture leaves A open.
  auto p = delivery();
  CHECK(initial_qstates(p).size() == 2);

  Problem empty({"p"}, {"x"}, {}, {}, {});
  auto all = initial_qstates(empty);
  CHECK(all.size() == 4);
  CHECK(std::is_sorted(all.begin(), all.end()));
}

TEST_CASE("goal test") {
  auto p = delivery();
  CHECK(is_goal_q(qs(p, {"N=0", "!H", "!A", "!G"}), p));
  CHECK_FALSE(is_goal_q(qs(p, {"N>0", "!H", "!A", "!G"}), p));
  Problem free_goal({"p"}, {"x"}, {}, {}, {});
  for (const auto& s : initial_qstates(free_goal)) CHECK(is_goal_q(s, free_goal));
}

TEST_CASE("action invariants") {
  CHECK_THROWS_AS(make_action("bad", {}, {}, {{0, false}}), QnpError);
  CHECK_THROWS_AS(make_action("bad", {X(0)}, {}, {{0, false}, {0, true}}), QnpError);
  CHECK_THROWS_AS(make_action("bad", {B(0), B(0, false)}, {}, {}), QnpError);
  CHECK_THROWS_AS(make_action("bad", {}, {X(0)}, {}), QnpError);
  CHECK_NOTHROW(make_action("ok", {X(0)}, {}, {{0, false}}));
}

TEST_CASE("problem invariants") {
  CHECK_THROWS_AS(Problem({"p"}, {"x"}, {}, {X(0), X(0, false)}, {}), QnpError);
  CHECK_THROWS_AS(Problem({"p"}, {"x"}, {}, {}, {B(3)}), QnpError);
  CHECK_THROWS_AS(Problem({"p", "p"}, {}, {}, {}, {}), QnpError);
  CHECK_THROWS_AS(Problem({"p"}, {"p"}, {}, {}, {}), QnpError);
  auto a = make_action("a", {}, {}, {});
  CHECK_THROWS_AS(Problem({"p"}, {}, {a, a}, {}, {}), QnpError);
  auto far = make_action("far", {}, {}, {{4, true}});
  CHECK_THROWS_AS(Problem({"p"}, {"x"}, {far}, {}, {}), QnpError);
}

TEST_CASE("literal syntax") {
  auto p = delivery();
  CHECK(p.parse_literal("N>0") == X(0));
  CHECK(p.parse_literal("N=0") == X(0, false));
  CHECK(p.parse_literal("H") == B(0));
  CHECK(p.parse_literal("!G") == B(2, false));
  CHECK_THROWS_AS(p.parse_literal("Z"), QnpError);
  CHECK_THROWS_AS(p.parse_literal("H>0"), QnpError);
  CHECK_THROWS_AS(p.parse_literal("!N"), QnpError);
  CHECK(p.format(X(0, false)) == "N=0");
  CHECK(p.format(B(1, false)) == "!A");
  CHECK(p.format(qs(p, {"N>0", "H"})) == "N>0 H !A !G");
}

TEST_CASE("successor count is 2^#dec") {
  std::mt19937 rng(1);
  for (int trial = 0; trial < 300; ++trial) {
    auto p = gen::random_qnp(rng, 1 + trial % 3, 1 + trial % 3, 4);
    for (const auto& a : p.actions()) {
      std::size_t decs = std::count_if(a.num_eff.begin(), a.num_eff.end(), [](auto& e) { return !e.increase; });
      for (std::uint32_t b = 0; b < (1U << p.bools().size()); ++b) {
        for (std::uint32_t n = 0; n < (1U << p.nums().size()); ++n) {
          QState s{b, n};
          if (!applicable_q(s, a)) continue;
          auto succ = successors_q(s, a);
          CHECK(succ.size() == (std::size_t{1} << decs));
          CHECK(std::set<QState>(succ.begin(), succ.end()).size() == succ.size());
        }
      }
    }
  }
}

TEST_CASE("qualitative successors cover quantitative transitions") {
  std::mt19937 rng(8);
  std::uniform_int_distribution<int> value(0, 6), amount(1, 6);
  std::size_t checked = 0;
  for (int trial = 0; trial < 400; ++trial) {
    std::size_t nb = trial % 2, nn = 1 + trial % 3;
    auto p = gen::random_qnp(rng, nb, nn, 3);
    std::vector<int> vals(nn);
    for (auto& v : vals) v = value(rng);
    std::uint32_t bools = std::uniform_int_distribution<std::uint32_t>(0, (1U << nb) - 1)(rng);
    QState s{bools, 0};
    for (std::size_t j = 0; j < nn; ++j) s.nums |= (vals[j] > 0 ? 1U : 0U) << j;
    for (const auto& a : p.actions()) {
      if (!applicable_q(s, a)) continue;
      // Quantitative step with arbitrary positive amounts.
      auto next_vals = vals;
      for (const auto& e : a.num_eff) {
        if (e.increase) {
          next_vals[e.var] += amount(rng);
        } else {
          next_vals[e.var] -= std::uniform_int_distribution<int>(1, vals[e.var])(rng);
        }
        REQUIRE(next_vals[e.var] >= 0);
      }
      QState image{bools, 0};
      for (const auto& l : a.bool_eff) image.set(l);
      for (std::size_t j = 0; j < nn; ++j) image.nums |= (next_vals[j] > 0 ? 1U : 0U) << j;
      auto succ = successors_q(s, a);
      CHECK(std::find(succ.begin(), succ.end(), image) != succ.end());
      ++checked;
    }
  }
  CHECK(checked > 100);
}

TEST_CASE(".qnp listing round-trips") {
  for (const auto& f : testing::qnp_fixtures()) {
    auto p = testing::load_qnp(f);
    auto text = write_qnp(p);
    auto q = parse_qnp(text);
    CHECK_MESSAGE(write_qnp(q) == text, f);
    CHECK(q.bools() == p.bools());
    CHECK(q.nums() == p.nums());
    CHECK(q.init() == p.init());
    CHECK(q.goal() == p.goal());
    REQUIRE(q.actions().size() == p.actions().size());
    for (std::size_t i = 0; i < p.actions().size(); ++i) {
      CHECK(q.actions()[i].name == p.actions()[i].name);
      CHECK(q.actions()[i].pre == p.actions()[i].pre);
      CHECK(q.actions()[i].bool_eff == p.actions()[i].bool_eff);
      CHECK(q.actions()[i].num_eff == p.actions()[i].num_eff);
    }
  }
}

TEST_CASE(".qnp errors name the line") {
  auto line_of = [](std::string_view text) {
    try {
      parse_qnp(text, "t.qnp");
    } catch (const ParseError& e) {
      return e.line();
    }
    return -1;
  };
  CHECK(line_of("vars bool:p\ninit p\ngoal q\n") == 3);
  CHECK(line_of("vars bool:p num:x\ninit p\ngoal x=0\naction a\npre p\neff dec(x)\nend\n") == 4);
  CHECK(line_of("vars bool:p\ninit p\n") == 3);
  CHECK(line_of("vars int:p\ninit\ngoal\n") == 1);
  CHECK(line_of("; comment\nvars bool:p\ninit p\ngoal !p\naction a\npre p\neff !p\nend\n") == -1);
}

TEST_CASE("policy lookup and formatting") {
  auto p = delivery();
  Policy pi;
  auto s0 = qs(p, {"N>0"});
  pi.rules[s0] = 0;
  CHECK(pi.lookup(s0) == std::optional<std::size_t>(0));
  CHECK_FALSE(pi.lookup(qs(p, {"N>0", "H"})));
  CHECK(format_policy(pi, p) == "N>0 !H !A !G => Move-Ball\n");
}
