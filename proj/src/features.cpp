#include "absforge/features.hpp"

#include <algorithm>
#include <functional>

#include "absforge/error.hpp"
#include "absforge/sexpr.hpp"

namespace absforge::features {

using pddl::ObjectId;
using sexpr::Node;

namespace {

class FormulaParser {
 public:
  FormulaParser(const pddl::Domain& dom, std::string_view file) : dom_(dom), file_(file) {}

  [[noreturn]] void fail(ParseErrorKind kind, const Node& at, const std::string& msg) const {
    throw ParseError(kind, file_, at.line, at.col, msg);
  }

  void push_scope(const std::vector<Variable>& vars) {
    for (const auto& v : vars) scope_.push_back(v.name);
    max_slots_ = std::max(max_slots_, scope_.size());
  }

  void pop_scope(std::size_t n) { scope_.resize(scope_.size() - n); }

  std::size_t max_slots() const { return max_slots_; }

  std::vector<Variable> variables(const Node& list) const {
    if (!list.is_list || list.size() == 0) fail(ParseErrorKind::Syntax, list, "expected a non-empty variable list");
    std::vector<Variable> out;
    std::size_t pending = 0;
    for (std::size_t i = 0; i < list.size(); ++i) {
      const Node& n = list[i];
      if (n.is_symbol("-")) {
        if (i + 1 >= list.size() || list[i + 1].is_list) fail(ParseErrorKind::Syntax, n, "missing type after '-'");
        if (pending == out.size()) fail(ParseErrorKind::Syntax, n, "type without variables");
        const std::string& type = list[i + 1].symbol;
        if (!dom_.has_type(type)) fail(ParseErrorKind::UndeclaredType, list[i + 1], "undeclared type " + type);
        for (std::size_t j = pending; j < out.size(); ++j) out[j].type = type;
        pending = out.size();
        ++i;
        continue;
      }
      if (n.is_list || n.symbol.empty() || n.symbol.front() != '?') {
        fail(ParseErrorKind::Syntax, n, "expected variable '?name'");
      }
      for (const auto& v : out) {
        if (v.name == n.symbol) fail(ParseErrorKind::Duplicate, n, "variable " + n.symbol + " bound twice");
      }
      out.push_back({n.symbol, "object"});
    }
    return out;
  }

  FTerm term(const Node& n) const {
    if (n.is_list || n.symbol.empty()) fail(ParseErrorKind::Syntax, n, "expected a term");
    FTerm t;
    if (n.symbol.front() == '?') {
      for (std::size_t i = scope_.size(); i-- > 0;) {
        if (scope_[i] == n.symbol) {
          t.slot = i;
          return t;
        }
      }
      fail(ParseErrorKind::UnboundVariable, n, "unbound variable " + n.symbol);
    }
    t.is_variable = false;
    t.constant = n.symbol;
    return t;
  }

  Formula formula(const Node& n) {
    if (!n.is_list) fail(ParseErrorKind::Syntax, n, "expected a formula, got '" + n.symbol + "'");
    if (n.size() == 0) fail(ParseErrorKind::Syntax, n, "empty formula");
    if (!n[0].is_symbol()) fail(ParseErrorKind::Syntax, n, "formula head must be a symbol");
    const std::string& head = n[0].symbol;
    Formula f;
    if (head == "and" || head == "or") {
      f.kind = head == "and" ? Formula::Kind::And : Formula::Kind::Or;
      for (std::size_t i = 1; i < n.size(); ++i) f.children.push_back(formula(n[i]));
      return f;
    }
    if (head == "not") {
      if (n.size() != 2) fail(ParseErrorKind::Syntax, n, "not takes one argument");
      f.kind = Formula::Kind::Not;
      f.children.push_back(formula(n[1]));
      return f;
    }
    if (head == "exists" || head == "forall") {
      if (n.size() != 3) fail(ParseErrorKind::Syntax, n, head + " takes a variable list and a body");
      f.kind = head == "exists" ? Formula::Kind::Exists : Formula::Kind::Forall;
      f.vars = variables(n[1]);
      f.first_slot = scope_.size();
      push_scope(f.vars);
      f.children.push_back(formula(n[2]));
      pop_scope(f.vars.size());
      return f;
    }
    if (head == "=") {
      if (n.size() != 3) fail(ParseErrorKind::Syntax, n, "= takes two terms");
      f.kind = Formula::Kind::Equals;
      f.terms = {term(n[1]), term(n[2])};
      return f;
    }
    if (head == "count") fail(ParseErrorKind::Syntax, n, "count terms cannot be nested inside formulas");
    auto pid = dom_.find_predicate(head);
    if (!pid) fail(ParseErrorKind::UndeclaredPredicate, n, "unknown predicate " + head);
    const auto& schema = dom_.predicates[*pid];
    if (n.size() - 1 != schema.arity()) {
      fail(ParseErrorKind::ArityMismatch, n,
           head + " expects " + std::to_string(schema.arity()) + " arguments, got " + std::to_string(n.size() - 1));
    }
    f.kind = Formula::Kind::Atom;
    f.predicate = *pid;
    for (std::size_t i = 1; i < n.size(); ++i) f.terms.push_back(term(n[i]));
    return f;
  }

 private:
  const pddl::Domain& dom_;
  std::string file_;
  std::vector<std::string> scope_;
  std::size_t max_slots_ = 0;
};

constexpr std::string_view kFile = "<formula>";

struct Evaluator {
  const pddl::GroundState& state;
  const pddl::Instance& objs;
  Binding& env;

  std::optional<ObjectId> value(const FTerm& t) const {
    if (t.is_variable) return env[t.slot];
    return objs.find_object(t.constant);
  }

  bool eval(const Formula& f) const {
    switch (f.kind) {
      case Formula::Kind::Atom: {
        pddl::Atom atom;
        atom.predicate = f.predicate;
        atom.arity = static_cast<std::uint8_t>(f.terms.size());
        for (std::size_t i = 0; i < f.terms.size(); ++i) {
          auto v = value(f.terms[i]);
          if (!v) return false;
          atom.args[i] = *v;
        }
        return state.contains(atom);
      }
      case Formula::Kind::Equals: {
        auto a = value(f.terms[0]);
        auto b = value(f.terms[1]);
        return a && b && *a == *b;
      }
      case Formula::Kind::Not:
        return !eval(f.children[0]);
      case Formula::Kind::And:
        for (const auto& c : f.children) {
          if (!eval(c)) return false;
        }
        return true;
      case Formula::Kind::Or:
        for (const auto& c : f.children) {
          if (eval(c)) return true;
        }
        return false;
      case Formula::Kind::Exists:
        return quantify(f, 0, true);
      case Formula::Kind::Forall:
        return !quantify(f, 0, false);
    }
    return false;
  }

  /// Exists: true iff some binding satisfies the body. Forall is evaluated as
  /// "some binding falsifies the body" and negated by the caller.
  bool quantify(const Formula& f, std::size_t i, bool want) const {
    if (i == f.vars.size()) return eval(f.children[0]) == want;
    for (ObjectId o : objs.objects_of_type(f.vars[i].type)) {
      env[f.first_slot + i] = o;
      if (quantify(f, i + 1, want)) return true;
    }
    return false;
  }
};

void collect_predicates(const Formula& f, std::vector<pddl::PredicateId>& out) {
  if (f.kind == Formula::Kind::Atom) out.push_back(f.predicate);
  for (const auto& c : f.children) collect_predicates(c, out);
}

std::string vars_to_string(const std::vector<Variable>& vars) {
  std::string out = "(";
  for (std::size_t i = 0; i < vars.size(); ++i) {
    if (i) out += ' ';
    out += vars[i].name;
    if (vars[i].type != "object") out += " - " + vars[i].type;
  }
  return out + ")";
}

void render(const Formula& f, const pddl::Domain& dom, std::vector<std::string>& names, std::string& out) {
  auto term = [&](const FTerm& t) { return t.is_variable ? names.at(t.slot) : t.constant; };
  switch (f.kind) {
    case Formula::Kind::Atom:
      out += "(" + dom.predicates[f.predicate].name;
      for (const auto& t : f.terms) out += " " + term(t);
      out += ")";
      return;
    case Formula::Kind::Equals:
      out += "(= " + term(f.terms[0]) + " " + term(f.terms[1]) + ")";
      return;
    case Formula::Kind::Not:
      out += "(not ";
      render(f.children[0], dom, names, out);
      out += ")";
      return;
    case Formula::Kind::And:
    case Formula::Kind::Or:
      out += f.kind == Formula::Kind::And ? "(and" : "(or";
      for (const auto& c : f.children) {
        out += ' ';
        render(c, dom, names, out);
      }
      out += ")";
      return;
    case Formula::Kind::Exists:
    case Formula::Kind::Forall: {
      out += f.kind == Formula::Kind::Exists ? "(exists " : "(forall ";
      out += vars_to_string(f.vars) + " ";
      if (names.size() < f.first_slot + f.vars.size()) names.resize(f.first_slot + f.vars.size());
      for (std::size_t i = 0; i < f.vars.size(); ++i) names[f.first_slot + i] = f.vars[i].name;
      render(f.children[0], dom, names, out);
      out += ")";
      return;
    }
  }
}

}  // namespace

Formula parse_formula(std::string_view text, const pddl::Domain& dom, const std::vector<Variable>& free_vars) {
  Node node = sexpr::parse_one(text, kFile);
  FormulaParser p(dom, kFile);
  p.push_scope(free_vars);
  Formula f = p.formula(node);
  f.slots = p.max_slots();
  return f;
}

CountingTerm parse_count(std::string_view text, const pddl::Domain& dom) {
  Node node = sexpr::parse_one(text, kFile);
  FormulaParser p(dom, kFile);
  if (!node.has_head("count") || node.size() != 3) {
    p.fail(ParseErrorKind::Syntax, node, "expected (count (vars) formula)");
  }
  CountingTerm t;
  t.vars = p.variables(node[1]);
  p.push_scope(t.vars);
  t.body = p.formula(node[2]);
  t.body.slots = p.max_slots();
  return t;
}

Feature parse_feature(std::string name, std::string_view text, const pddl::Domain& dom) {
  Node node = sexpr::parse_one(text, kFile);
  Feature f;
  f.name = std::move(name);
  f.source = std::string(text);
  if (node.has_head("count")) {
    f.kind = FeatureKind::Numerical;
    f.definition = parse_count(text, dom);
  } else {
    f.kind = FeatureKind::Boolean;
    f.definition = parse_formula(text, dom);
  }
  return f;
}

bool eval_formula(const Formula& f, const pddl::GroundState& s, const pddl::Instance& objs, const Binding& env) {
  Binding local = env;
  if (local.size() < f.slots) local.resize(f.slots);
  return Evaluator{s, objs, local}.eval(f);
}

std::size_t eval_count(const CountingTerm& t, const pddl::GroundState& s, const pddl::Instance& objs) {
  Binding env(std::max(t.body.slots, t.vars.size()));
  Evaluator ev{s, objs, env};
  std::size_t count = 0;
  std::function<void(std::size_t)> rec = [&](std::size_t i) {
    if (i == t.vars.size()) {
      if (ev.eval(t.body)) ++count;
      return;
    }
    for (ObjectId o : objs.objects_of_type(t.vars[i].type)) {
      env[i] = o;
      rec(i + 1);
    }
  };
  rec(0);
  return count;
}

FeatureValue eval_feature(const Feature& f, const pddl::GroundState& s, const pddl::Instance& objs) {
  if (const auto* t = std::get_if<CountingTerm>(&f.definition)) return eval_count(*t, s, objs);
  return eval_formula(std::get<Formula>(f.definition), s, objs);
}

std::vector<pddl::PredicateId> predicates_used(const Feature& f) {
  std::vector<pddl::PredicateId> out;
  if (const auto* t = std::get_if<CountingTerm>(&f.definition)) {
    collect_predicates(t->body, out);
  } else {
    collect_predicates(std::get<Formula>(f.definition), out);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::string to_string(const Formula& f, const pddl::Domain& dom) {
  std::vector<std::string> names(f.slots);
  std::string out;
  render(f, dom, names, out);
  return out;
}

std::string to_string(const CountingTerm& t, const pddl::Domain& dom) {
  std::vector<std::string> names(std::max(t.body.slots, t.vars.size()));
  for (std::size_t i = 0; i < t.vars.size(); ++i) names[i] = t.vars[i].name;
  std::string out = "(count " + vars_to_string(t.vars) + " ";
  render(t.body, dom, names, out);
  return out + ")";
}

}  // namespace absforge::features
