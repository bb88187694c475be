#include "generators.hpp"

#include <functional>
#include <span>
#include <vector>

namespace absforge::gen {

const std::string_view kFormulaDomain = R"(
(define (domain formulas)
  (:requirements :strips :typing)
  (:types a b - object c - a)
  (:predicates (s) (p ?x - object) (q ?x - a ?y - object) (r ?x ?y - object) (t ?x - b)))
)";

namespace {

struct Obj {
  const char* name;
  const char* type;
};
constexpr Obj kObjects[] = {{"a1", "a"}, {"b1", "b"}, {"c1", "c"}, {"a2", "a"}, {"b2", "b"}, {"c2", "c"}};

bool is_a(std::string_view type) { return type == "a" || type == "c"; }

struct Var {
  std::string name;
  std::string type;  // "object" when untyped
};

struct Gen {
  std::mt19937& rng;
  FormulaOptions opts;
  int next_var = 0;

  int roll(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); }

  /// A term whose type fits `need` ("object", "a" or "b").
  std::string term(const std::vector<Var>& scope, std::string_view need) {
    std::vector<std::string> options;
    for (const auto& v : scope) {
      if (need == "object" || v.type == need || (need == "a" && v.type == "c")) options.push_back(v.name);
    }
    if (options.empty() || roll(4) == 0) {
      // Only the first three objects exist in every generated instance.
      for (const auto& o : std::span(kObjects, 3)) {
        if (need == "object" || o.type == need || (need == "a" && is_a(o.type))) options.push_back(o.name);
      }
    }
    return options[roll(static_cast<int>(options.size()))];
  }

  std::string atom(const std::vector<Var>& scope) {
    switch (roll(6)) {
      case 0:
        return "(s)";
      case 1:
        return "(p " + term(scope, "object") + ")";
      case 2:
        return "(q " + term(scope, "a") + " " + term(scope, "object") + ")";
      case 3:
        return "(r " + term(scope, "object") + " " + term(scope, "object") + ")";
      case 4:
        return "(t " + term(scope, "b") + ")";
      default:
        return "(= " + term(scope, "object") + " " + term(scope, "object") + ")";
    }
  }

  std::vector<Var> fresh_vars(int n) {
    static const char* types[] = {"object", "a", "b", "c"};
    std::vector<Var> out;
    for (int i = 0; i < n; ++i) out.push_back({"?v" + std::to_string(next_var++), types[roll(4)]});
    return out;
  }

  static std::string var_list(const std::vector<Var>& vars) {
    std::string s = "(";
    for (std::size_t i = 0; i < vars.size(); ++i) {
      if (i) s += " ";
      s += vars[i].name;
      if (vars[i].type != "object") s += " - " + vars[i].type;
    }
    return s + ")";
  }

  std::string formula(std::vector<Var> scope, int depth) {
    if (depth <= 0 || roll(5) == 0) return atom(scope);
    int choice = roll(opts.allow_negation ? 6 : 5);
    switch (choice) {
      case 0:
      case 1: {
        int n = roll(4);  // 0..3 conjuncts
        std::string s = choice == 0 ? "(and" : "(or";
        for (int i = 0; i < n; ++i) s += " " + formula(scope, depth - 1);
        return s + ")";
      }
      case 2:
      case 3:
      case 4: {
        auto vars = fresh_vars(1 + roll(2));
        std::string head = choice == 4 ? "forall" : "exists";
        auto inner = scope;
        inner.insert(inner.end(), vars.begin(), vars.end());
        return "(" + head + " " + var_list(vars) + " " + formula(inner, depth - 1) + ")";
      }
      default:
        return "(not " + formula(scope, depth - 1) + ")";
    }
  }
};

}  // namespace

testing::Inline formula_instance(std::mt19937& rng) {
  int n = std::uniform_int_distribution<int>(3, 6)(rng);
  std::string objs;
  for (int i = 0; i < n; ++i) objs += std::string(" ") + kObjects[i].name + " - " + kObjects[i].type;
  return testing::parse_inline(kFormulaDomain,
                               "(define (problem f) (:domain formulas) (:objects" + objs + ") (:init) (:goal (and)))");
}

pddl::GroundState random_state(const pddl::Instance& inst, std::mt19937& rng, double density) {
  std::vector<pddl::Atom> atoms;
  const auto& dom = inst.domain();
  std::bernoulli_distribution coin(density);
  for (pddl::PredicateId p = 0; p < dom.predicates.size(); ++p) {
    const auto& params = dom.predicates[p].param_types;
    std::vector<pddl::ObjectId> args(params.size());
    std::function<void(std::size_t)> rec = [&](std::size_t i) {
      if (i == params.size()) {
        if (coin(rng)) atoms.push_back(pddl::make_atom(p, args));
        return;
      }
      for (auto o : inst.objects_of_type(params[i])) {
        args[i] = o;
        rec(i + 1);
      }
    };
    rec(0);
  }
  return pddl::GroundState(atoms);
}

std::string random_formula(std::mt19937& rng, const FormulaOptions& opts) {
  Gen g{rng, opts};
  return g.formula({}, opts.max_depth);
}

std::string random_count(std::mt19937& rng, const FormulaOptions& opts) {
  Gen g{rng, opts};
  auto vars = g.fresh_vars(1 + g.roll(2));
  return "(count " + Gen::var_list(vars) + " " + g.formula(vars, opts.max_depth - 1) + ")";
}

qnp::Problem random_qnp(std::mt19937& rng, std::size_t bools, std::size_t nums, std::size_t max_actions) {
  auto roll = [&](int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); };
  std::vector<std::string> bnames, nnames;
  for (std::size_t i = 0; i < bools; ++i) bnames.push_back("p" + std::to_string(i));
  for (std::size_t j = 0; j < nums; ++j) nnames.push_back("x" + std::to_string(j));

  auto random_literals = [&](int percent) {
    std::vector<qnp::Literal> out;
    for (std::size_t i = 0; i < bools; ++i) {
      if (roll(100) < percent) out.push_back({qnp::VarKind::Bool, i, roll(2) == 0});
    }
    for (std::size_t j = 0; j < nums; ++j) {
      if (roll(100) < percent) out.push_back({qnp::VarKind::Num, j, roll(2) == 0});
    }
    return out;
  };

  std::vector<qnp::Action> actions;
  std::size_t n_actions = 1 + roll(static_cast<int>(max_actions));
  for (std::size_t k = 0; k < n_actions; ++k) {
    auto pre = random_literals(40);
    std::vector<qnp::Literal> eff;
    for (std::size_t i = 0; i < bools; ++i) {
      if (roll(100) < 40) eff.push_back({qnp::VarKind::Bool, i, roll(2) == 0});
    }
    std::vector<qnp::NumEffect> num_eff;
    for (std::size_t j = 0; j < nums; ++j) {
      int r = roll(3);
      if (r == 0) continue;
      bool inc = r == 1;
      if (!inc) {
        // dec(x) needs x>0 in the precondition.
        bool has = false;
        for (auto& l : pre) {
          if (l.kind == qnp::VarKind::Num && l.var == j) {
            l.positive = true;
            has = true;
          }
        }
        if (!has) pre.push_back({qnp::VarKind::Num, j, true});
      }
      num_eff.push_back({j, inc});
    }
    actions.push_back(qnp::make_action("a" + std::to_string(k), pre, eff, num_eff));
  }
  auto init = random_literals(70);
  auto goal = random_literals(50);
  if (goal.empty() && nums > 0) goal.push_back({qnp::VarKind::Num, 0, false});
  return qnp::Problem(bnames, nnames, actions, init, goal);
}

}  // namespace absforge::gen
