#include "absforge/pddl.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <set>
#include <unordered_set>

#include "absforge/error.hpp"
#include "absforge/sexpr.hpp"

namespace absforge::pddl {

using sexpr::Node;

Atom make_atom(PredicateId predicate, std::span<const ObjectId> args) {
  if (args.size() > kMaxArity) throw std::invalid_argument("atom arity exceeds kMaxArity");
  Atom atom;
  atom.predicate = predicate;
  atom.arity = static_cast<std::uint8_t>(args.size());
  std::copy(args.begin(), args.end(), atom.args.begin());
  return atom;
}

Atom make_atom(PredicateId predicate, std::initializer_list<ObjectId> args) {
  return make_atom(predicate, std::span<const ObjectId>(args.begin(), args.size()));
}

GroundState::GroundState(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
  std::sort(atoms_.begin(), atoms_.end());
  atoms_.erase(std::unique(atoms_.begin(), atoms_.end()), atoms_.end());
}

bool GroundState::contains(const Atom& atom) const {
  return std::binary_search(atoms_.begin(), atoms_.end(), atom);
}

void GroundState::insert(const Atom& atom) {
  auto it = std::lower_bound(atoms_.begin(), atoms_.end(), atom);
  if (it == atoms_.end() || *it != atom) atoms_.insert(it, atom);
}

void GroundState::erase(const Atom& atom) {
  auto it = std::lower_bound(atoms_.begin(), atoms_.end(), atom);
  if (it != atoms_.end() && *it == atom) atoms_.erase(it);
}

std::size_t GroundState::hash() const {
  std::size_t h = 1469598103934665603ull;
  auto mix = [&h](std::size_t v) { h = (h ^ v) * 1099511628211ull; };
  for (const Atom& a : atoms_) {
    mix(a.predicate);
    for (ObjectId o : a.arguments()) mix(o + 0x9e37u);
  }
  return h;
}

// ---------------------------------------------------------------------------
// Domain / Instance

std::optional<PredicateId> Domain::find_predicate(std::string_view name) const {
  for (std::size_t i = 0; i < predicates.size(); ++i) {
    if (predicates[i].name == name) return static_cast<PredicateId>(i);
  }
  return std::nullopt;
}

const ActionSchema* Domain::find_action(std::string_view name) const {
  for (const auto& a : actions) {
    if (a.name == name) return &a;
  }
  return nullptr;
}

bool Domain::has_type(std::string_view type) const {
  return type == "object" || type_parent.find(std::string(type)) != type_parent.end();
}

bool Domain::is_subtype(std::string_view type, std::string_view ancestor) const {
  if (ancestor == "object" || ancestor.empty()) return true;
  std::string current(type);
  for (std::size_t guard = 0; guard <= type_parent.size(); ++guard) {
    if (current == ancestor) return true;
    auto it = type_parent.find(current);
    if (it == type_parent.end()) return false;
    current = it->second;
  }
  return false;
}

std::vector<bool> Domain::static_predicates() const {
  std::vector<bool> is_static(predicates.size(), true);
  for (const auto& a : actions) {
    for (const auto& e : a.add) is_static[e.predicate] = false;
    for (const auto& e : a.del) is_static[e.predicate] = false;
  }
  return is_static;
}

Instance::Instance(std::string name, std::shared_ptr<const Domain> domain,
                   std::vector<TypedName> objects, GroundState init, std::vector<Atom> goal,
                   std::string source)
    : name_(std::move(name)),
      domain_(std::move(domain)),
      objects_(std::move(objects)),
      init_(std::move(init)),
      goal_(std::move(goal)),
      source_(std::move(source)) {
  std::sort(objects_.begin(), objects_.end(),
            [](const TypedName& a, const TypedName& b) { return a.name < b.name; });
  std::sort(goal_.begin(), goal_.end());
  goal_.erase(std::unique(goal_.begin(), goal_.end()), goal_.end());
  std::vector<ObjectId> all;
  for (std::size_t i = 0; i < objects_.size(); ++i) all.push_back(static_cast<ObjectId>(i));
  by_type_["object"] = all;
  for (const auto& [type, parent] : domain_->type_parent) {
    std::vector<ObjectId> members;
    for (std::size_t i = 0; i < objects_.size(); ++i) {
      if (domain_->is_subtype(objects_[i].type, type)) members.push_back(static_cast<ObjectId>(i));
    }
    by_type_[type] = std::move(members);
  }
}

std::optional<ObjectId> Instance::find_object(std::string_view name) const {
  auto it = std::lower_bound(objects_.begin(), objects_.end(), name,
                             [](const TypedName& o, std::string_view n) { return o.name < n; });
  if (it == objects_.end() || it->name != name) return std::nullopt;
  return static_cast<ObjectId>(it - objects_.begin());
}

const std::vector<ObjectId>& Instance::objects_of_type(std::string_view type) const {
  if (type.empty()) type = "object";
  auto it = by_type_.find(type);
  return it == by_type_.end() ? empty_ : it->second;
}

GroundState Instance::static_atoms() const {
  auto is_static = domain_->static_predicates();
  std::vector<Atom> out;
  for (const Atom& a : init_.atoms()) {
    if (is_static[a.predicate]) out.push_back(a);
  }
  return GroundState(std::move(out));
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

const std::set<std::string>& supported_requirements() {
  static const std::set<std::string> reqs{":strips", ":typing", ":negative-preconditions",
                                          ":equality"};
  return reqs;
}

class Parser {
 public:
  explicit Parser(std::string_view file) : file_(file) {}

  [[noreturn]] void fail(ParseErrorKind kind, const Node& at, const std::string& msg) const {
    throw ParseError(kind, file_, at.line, at.col, msg);
  }

  void expect_list(const Node& n, const char* what) const {
    if (!n.is_list) fail(ParseErrorKind::Syntax, n, std::string("expected ") + what);
  }

  const Node& expect_symbol(const Node& n, const char* what) const {
    if (!n.is_symbol() || n.symbol.empty()) fail(ParseErrorKind::Syntax, n, std::string("expected ") + what);
    return n;
  }

  /// `a b - t c d - u e` → typed names. Variables keep their leading '?'.
  std::vector<TypedName> typed_list(const Node& list, std::size_t begin, bool variables) const {
    std::vector<TypedName> out;
    std::size_t pending = out.size();
    for (std::size_t i = begin; i < list.size(); ++i) {
      const Node& n = list[i];
      if (n.is_symbol("-")) {
        if (i + 1 >= list.size()) fail(ParseErrorKind::Syntax, n, "missing type after '-'");
        const Node& t = list[i + 1];
        if (t.is_list) {
          fail(ParseErrorKind::UnsupportedFeature, t, "either-types are not supported");
        }
        if (pending == out.size()) fail(ParseErrorKind::Syntax, n, "type without names");
        for (std::size_t j = pending; j < out.size(); ++j) out[j].type = t.symbol;
        pending = out.size();
        ++i;
        continue;
      }
      expect_symbol(n, variables ? "variable" : "name");
      if (variables && n.symbol.front() != '?') fail(ParseErrorKind::Syntax, n, "expected variable '?name'");
      if (!variables && n.symbol.front() == '?') fail(ParseErrorKind::Syntax, n, "unexpected variable");
      out.push_back({n.symbol, "object"});
    }
    return out;
  }

  std::string file_;
};

class DomainParser : Parser {
 public:
  using Parser::Parser;

  Domain parse(std::string_view text) {
    auto forms = sexpr::parse_all(text, file_);
    if (forms.empty()) throw ParseError(ParseErrorKind::Syntax, file_, 1, 1, "empty domain file");
    if (forms.size() > 1) fail(ParseErrorKind::Syntax, forms[1], "trailing input after domain");
    const Node& root = forms.front();
    if (!root.has_head("define") || root.size() < 2) fail(ParseErrorKind::Syntax, root, "expected (define (domain ...) ...)");
    const Node& header = root[1];
    if (!header.has_head("domain") || header.size() != 2) fail(ParseErrorKind::Syntax, header, "expected (domain NAME)");
    dom_.name = expect_symbol(header[1], "domain name").symbol;
    dom_.source = std::string(text);

    // Types and predicates may be referenced before the section that declares
    // them only in the order PDDL mandates, so sections are processed in order.
    for (std::size_t i = 2; i < root.size(); ++i) {
      const Node& sec = root[i];
      expect_list(sec, "domain section");
      if (sec.size() == 0 || !sec[0].is_symbol()) fail(ParseErrorKind::Syntax, sec, "malformed section");
      const std::string& key = sec[0].symbol;
      if (key == ":requirements") {
        requirements(sec);
      } else if (key == ":types") {
        types(sec);
      } else if (key == ":constants") {
        constants(sec);
      } else if (key == ":predicates") {
        predicates(sec);
      } else if (key == ":action") {
        action(sec);
      } else if (key == ":functions" || key == ":durative-action" || key == ":derived" ||
                 key == ":constraints") {
        fail(ParseErrorKind::UnsupportedFeature, sec, "section " + key + " is not supported");
      } else {
        fail(ParseErrorKind::Syntax, sec, "unknown domain section " + key);
      }
    }
    return std::move(dom_);
  }

 private:
  void requirements(const Node& sec) {
    for (std::size_t i = 1; i < sec.size(); ++i) {
      const Node& r = expect_symbol(sec[i], "requirement");
      if (!supported_requirements().count(r.symbol)) {
        fail(ParseErrorKind::UnsupportedRequirement, r, "unsupported requirement " + r.symbol);
      }
      dom_.requirements.push_back(r.symbol);
    }
  }

  void types(const Node& sec) {
    auto list = typed_list(sec, 1, false);
    for (const auto& t : list) {
      if (t.name == "object") continue;
      if (dom_.type_parent.count(t.name) && dom_.type_parent[t.name] != t.type &&
          dom_.type_parent[t.name] != "object") {
        fail(ParseErrorKind::Duplicate, sec, "type " + t.name + " declared twice");
      }
      dom_.type_parent[t.name] = t.type;
    }
    // Parent types named only after '-' are declared implicitly.
    for (const auto& t : list) {
      if (t.type != "object" && !dom_.type_parent.count(t.type)) dom_.type_parent[t.type] = "object";
    }
  }

  void check_type(const Node& at, const std::string& type) const {
    if (!dom_.has_type(type)) fail(ParseErrorKind::UndeclaredType, at, "undeclared type " + type);
  }

  void constants(const Node& sec) {
    for (auto& c : typed_list(sec, 1, false)) {
      check_type(sec, c.type);
      for (const auto& existing : dom_.constants) {
        if (existing.name == c.name) fail(ParseErrorKind::Duplicate, sec, "constant " + c.name + " declared twice");
      }
      dom_.constants.push_back(std::move(c));
    }
  }

  void predicates(const Node& sec) {
    for (std::size_t i = 1; i < sec.size(); ++i) {
      const Node& p = sec[i];
      expect_list(p, "predicate declaration");
      if (p.size() == 0) fail(ParseErrorKind::Syntax, p, "empty predicate declaration");
      const std::string& name = expect_symbol(p[0], "predicate name").symbol;
      if (dom_.find_predicate(name)) fail(ParseErrorKind::Duplicate, p, "predicate " + name + " declared twice");
      PredicateSchema schema{name, {}};
      for (const auto& v : typed_list(p, 1, true)) {
        check_type(p, v.type);
        schema.param_types.push_back(v.type);
      }
      if (schema.arity() > kMaxArity) {
        fail(ParseErrorKind::UnsupportedFeature, p, "predicate arity above " + std::to_string(kMaxArity));
      }
      dom_.predicates.push_back(std::move(schema));
    }
  }

  Term term(const Node& n, const ActionSchema& act) const {
    expect_symbol(n, "term");
    Term t;
    if (n.symbol.front() == '?') {
      for (std::size_t i = 0; i < act.params.size(); ++i) {
        if (act.params[i].name == n.symbol) {
          t.kind = Term::Kind::Parameter;
          t.parameter = i;
          return t;
        }
      }
      fail(ParseErrorKind::UnboundVariable, n, "variable " + n.symbol + " is not a parameter of " + act.name);
    }
    for (const auto& c : dom_.constants) {
      if (c.name == n.symbol) {
        t.kind = Term::Kind::Constant;
        t.constant = n.symbol;
        return t;
      }
    }
    fail(ParseErrorKind::UndeclaredObject, n, "undeclared constant " + n.symbol);
  }

  SchemaAtom atom(const Node& n, const ActionSchema& act) const {
    expect_list(n, "atom");
    if (n.size() == 0) fail(ParseErrorKind::Syntax, n, "empty atom");
    const std::string& name = expect_symbol(n[0], "predicate").symbol;
    auto pid = dom_.find_predicate(name);
    if (!pid) fail(ParseErrorKind::UndeclaredPredicate, n, "undeclared predicate " + name);
    const auto& schema = dom_.predicates[*pid];
    if (n.size() - 1 != schema.arity()) {
      fail(ParseErrorKind::ArityMismatch, n,
           name + " expects " + std::to_string(schema.arity()) + " arguments, got " + std::to_string(n.size() - 1));
    }
    SchemaAtom a{*pid, {}};
    for (std::size_t i = 1; i < n.size(); ++i) a.args.push_back(term(n[i], act));
    return a;
  }

  void precondition(const Node& n, ActionSchema& act) const {
    expect_list(n, "precondition");
    if (n.size() == 0) return;
    if (n.has_head("and")) {
      for (std::size_t i = 1; i < n.size(); ++i) precondition(n[i], act);
      return;
    }
    bool positive = true;
    const Node* body = &n;
    if (n.has_head("not")) {
      if (n.size() != 2) fail(ParseErrorKind::Syntax, n, "not takes one argument");
      positive = false;
      body = &n[1];
      expect_list(*body, "literal");
    }
    if (body->has_head("=")) {
      if (body->size() != 3) fail(ParseErrorKind::Syntax, *body, "= takes two arguments");
      act.equalities.push_back({term((*body)[1], act), term((*body)[2], act), positive});
      return;
    }
    if (body->size() > 0 && body->items[0].is_symbol()) {
      const std::string& head = body->items[0].symbol;
      if (head == "or" || head == "imply" || head == "exists" || head == "forall" || head == "not" ||
          head == "and") {
        fail(ParseErrorKind::UnsupportedFeature, *body, "'" + head + "' is not supported in preconditions");
      }
    }
    act.pre.push_back({atom(*body, act), positive});
  }

  void effect(const Node& n, ActionSchema& act) const {
    expect_list(n, "effect");
    if (n.size() == 0) return;
    if (n.has_head("and")) {
      for (std::size_t i = 1; i < n.size(); ++i) effect(n[i], act);
      return;
    }
    if (n.size() > 0 && n[0].is_symbol()) {
      const std::string& head = n[0].symbol;
      if (head == "when" || head == "forall" || head == "increase" || head == "decrease" ||
          head == "assign" || head == "scale-up" || head == "scale-down") {
        fail(ParseErrorKind::UnsupportedFeature, n, "'" + head + "' is not supported in effects");
      }
    }
    if (n.has_head("not")) {
      if (n.size() != 2) fail(ParseErrorKind::Syntax, n, "not takes one argument");
      act.del.push_back(atom(n[1], act));
    } else {
      act.add.push_back(atom(n, act));
    }
  }

  void action(const Node& sec) {
    if (sec.size() < 2) fail(ParseErrorKind::Syntax, sec, "action without name");
    ActionSchema act;
    act.name = expect_symbol(sec[1], "action name").symbol;
    if (dom_.find_action(act.name)) fail(ParseErrorKind::Duplicate, sec, "action " + act.name + " declared twice");
    const Node* pre = nullptr;
    const Node* eff = nullptr;
    for (std::size_t i = 2; i < sec.size(); i += 2) {
      const Node& key = expect_symbol(sec[i], "action keyword");
      if (i + 1 >= sec.size()) fail(ParseErrorKind::Syntax, key, "missing value for " + key.symbol);
      const Node& val = sec[i + 1];
      if (key.symbol == ":parameters") {
        expect_list(val, "parameter list");
        act.params = typed_list(val, 0, true);
        for (std::size_t a = 0; a < act.params.size(); ++a) {
          check_type(val, act.params[a].type);
          for (std::size_t b = 0; b < a; ++b) {
            if (act.params[a].name == act.params[b].name) fail(ParseErrorKind::Duplicate, val, "duplicate parameter " + act.params[a].name);
          }
        }
      } else if (key.symbol == ":precondition") {
        pre = &val;
      } else if (key.symbol == ":effect") {
        eff = &val;
      } else {
        fail(ParseErrorKind::UnsupportedFeature, key, "unsupported action keyword " + key.symbol);
      }
    }
    if (pre) precondition(*pre, act);
    if (eff) effect(*eff, act);
    dom_.actions.push_back(std::move(act));
  }

  Domain dom_;
};

class ProblemParser : Parser {
 public:
  ProblemParser(std::string_view file, std::shared_ptr<const Domain> dom)
      : Parser(file), dom_(std::move(dom)) {}

  Instance parse(std::string_view text) {
    auto forms = sexpr::parse_all(text, file_);
    if (forms.empty()) throw ParseError(ParseErrorKind::Syntax, file_, 1, 1, "empty problem file");
    if (forms.size() > 1) fail(ParseErrorKind::Syntax, forms[1], "trailing input after problem");
    const Node& root = forms.front();
    if (!root.has_head("define") || root.size() < 2) fail(ParseErrorKind::Syntax, root, "expected (define (problem ...) ...)");
    const Node& header = root[1];
    if (!header.has_head("problem") || header.size() != 2) fail(ParseErrorKind::Syntax, header, "expected (problem NAME)");
    std::string name = expect_symbol(header[1], "problem name").symbol;

    const Node* init = nullptr;
    const Node* goal = nullptr;
    bool saw_domain = false;
    for (std::size_t i = 2; i < root.size(); ++i) {
      const Node& sec = root[i];
      expect_list(sec, "problem section");
      if (sec.size() == 0 || !sec[0].is_symbol()) fail(ParseErrorKind::Syntax, sec, "malformed section");
      const std::string& key = sec[0].symbol;
      if (key == ":domain") {
        if (sec.size() != 2) fail(ParseErrorKind::Syntax, sec, "expected (:domain NAME)");
        if (sec[1].symbol != dom_->name) {
          fail(ParseErrorKind::DomainMismatch, sec[1], "problem references domain " + sec[1].symbol +
                                                           " but " + dom_->name + " was given");
        }
        saw_domain = true;
      } else if (key == ":requirements") {
        for (std::size_t r = 1; r < sec.size(); ++r) {
          if (!supported_requirements().count(sec[r].symbol)) {
            fail(ParseErrorKind::UnsupportedRequirement, sec[r], "unsupported requirement " + sec[r].symbol);
          }
        }
      } else if (key == ":objects") {
        for (auto& o : typed_list(sec, 1, false)) {
          if (!dom_->has_type(o.type)) fail(ParseErrorKind::UndeclaredType, sec, "undeclared type " + o.type + " for object " + o.name);
          add_object(sec, std::move(o));
        }
      } else if (key == ":init") {
        init = &sec;
      } else if (key == ":goal") {
        goal = &sec;
      } else {
        fail(ParseErrorKind::UnsupportedFeature, sec, "unsupported problem section " + key);
      }
    }
    if (!saw_domain) fail(ParseErrorKind::Syntax, root, "missing (:domain NAME)");
    for (const auto& c : dom_->constants) add_object(root, c);

    std::sort(objects_.begin(), objects_.end(),
              [](const TypedName& a, const TypedName& b) { return a.name < b.name; });

    std::vector<Atom> init_atoms;
    if (init) {
      for (std::size_t i = 1; i < init->size(); ++i) init_atoms.push_back(ground_atom((*init)[i]));
    }
    std::vector<Atom> goal_atoms;
    if (goal) {
      if (goal->size() > 2) fail(ParseErrorKind::Syntax, *goal, "goal takes one formula");
      if (goal->size() == 2) goal_formula((*goal)[1], goal_atoms);
    }
    return Instance(std::move(name), dom_, objects_, GroundState(std::move(init_atoms)),
                    std::move(goal_atoms), std::string(text));
  }

 private:
  void add_object(const Node& at, TypedName o) {
    for (const auto& existing : objects_) {
      if (existing.name == o.name) fail(ParseErrorKind::Duplicate, at, "object " + o.name + " declared twice");
    }
    objects_.push_back(std::move(o));
  }

  const TypedName* object(const std::string& name) const {
    auto it = std::lower_bound(objects_.begin(), objects_.end(), name,
                               [](const TypedName& o, const std::string& n) { return o.name < n; });
    if (it == objects_.end() || it->name != name) return nullptr;
    return &*it;
  }

  Atom ground_atom(const Node& n) const {
    expect_list(n, "ground atom");
    if (n.size() == 0) fail(ParseErrorKind::Syntax, n, "empty atom");
    if (n.has_head("not")) fail(ParseErrorKind::Syntax, n, "negative literal in a ground atom list");
    if (n.has_head("=")) fail(ParseErrorKind::UnsupportedFeature, n, "numeric fluents are not supported");
    const std::string& pname = expect_symbol(n[0], "predicate").symbol;
    auto pid = dom_->find_predicate(pname);
    if (!pid) fail(ParseErrorKind::UndeclaredPredicate, n, "undeclared predicate " + pname);
    const auto& schema = dom_->predicates[*pid];
    if (n.size() - 1 != schema.arity()) {
      fail(ParseErrorKind::ArityMismatch, n,
           pname + " expects " + std::to_string(schema.arity()) + " arguments, got " + std::to_string(n.size() - 1));
    }
    std::vector<ObjectId> args;
    for (std::size_t i = 1; i < n.size(); ++i) {
      const Node& arg = expect_symbol(n[i], "object");
      const TypedName* obj = object(arg.symbol);
      if (!obj) fail(ParseErrorKind::UndeclaredObject, arg, "undeclared object " + arg.symbol);
      if (!dom_->is_subtype(obj->type, schema.param_types[i - 1])) {
        fail(ParseErrorKind::TypeMismatch, arg,
             "object " + arg.symbol + " of type " + obj->type + " where " + schema.param_types[i - 1] + " is expected");
      }
      args.push_back(static_cast<ObjectId>(obj - objects_.data()));
    }
    return make_atom(*pid, args);
  }

  void goal_formula(const Node& n, std::vector<Atom>& out) const {
    expect_list(n, "goal formula");
    if (n.has_head("and")) {
      for (std::size_t i = 1; i < n.size(); ++i) goal_formula(n[i], out);
      return;
    }
    if (n.has_head("not")) fail(ParseErrorKind::NegativeGoal, n, "negative goal literals are not supported");
    if (n.size() > 0 && n[0].is_symbol()) {
      const std::string& head = n[0].symbol;
      if (head == "or" || head == "imply" || head == "exists" || head == "forall") {
        fail(ParseErrorKind::UnsupportedFeature, n, "'" + head + "' is not supported in goals");
      }
    }
    out.push_back(ground_atom(n));
  }

  std::shared_ptr<const Domain> dom_;
  std::vector<TypedName> objects_;
};

}  // namespace

Domain parse_domain(std::string_view text, std::string_view file) {
  return DomainParser(file).parse(text);
}

Instance parse_instance(std::string_view text, std::shared_ptr<const Domain> domain, std::string_view file) {
  return ProblemParser(file, std::move(domain)).parse(text);
}

// ---------------------------------------------------------------------------
// Grounding and semantics

namespace {

ObjectId resolve(const Instance& inst, const Term& t, std::span<const ObjectId> args) {
  if (t.kind == Term::Kind::Parameter) return args[t.parameter];
  auto id = inst.find_object(t.constant);
  if (!id) throw std::logic_error("constant " + t.constant + " missing from instance");
  return *id;
}

Atom instantiate(const Instance& inst, const SchemaAtom& a, std::span<const ObjectId> args) {
  Atom atom;
  atom.predicate = a.predicate;
  atom.arity = static_cast<std::uint8_t>(a.args.size());
  for (std::size_t i = 0; i < a.args.size(); ++i) atom.args[i] = resolve(inst, a.args[i], args);
  return atom;
}

void sort_unique(std::vector<Atom>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

}  // namespace

std::vector<GroundAction> ground_actions(const Instance& inst) {
  const Domain& dom = inst.domain();
  std::vector<std::size_t> order(dom.actions.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return dom.actions[a].name < dom.actions[b].name; });

  std::vector<GroundAction> out;
  for (std::size_t idx : order) {
    const ActionSchema& schema = dom.actions[idx];
    std::vector<const std::vector<ObjectId>*> domains;
    bool empty = false;
    for (const auto& p : schema.params) {
      domains.push_back(&inst.objects_of_type(p.type));
      if (domains.back()->empty()) empty = true;
    }
    if (empty) continue;
    std::vector<ObjectId> args(schema.params.size());
    std::function<void(std::size_t)> rec = [&](std::size_t depth) {
      if (depth == args.size()) {
        for (const auto& eq : schema.equalities) {
          bool same = resolve(inst, eq.lhs, args) == resolve(inst, eq.rhs, args);
          if (same != eq.positive) return;
        }
        GroundAction g;
        g.schema = idx;
        g.args = args;
        for (const auto& lit : schema.pre) {
          (lit.positive ? g.pre_pos : g.pre_neg).push_back(instantiate(inst, lit.atom, args));
        }
        for (const auto& a : schema.add) g.add.push_back(instantiate(inst, a, args));
        for (const auto& d : schema.del) g.del.push_back(instantiate(inst, d, args));
        sort_unique(g.pre_pos);
        sort_unique(g.pre_neg);
        sort_unique(g.add);
        sort_unique(g.del);
        // Add wins over delete for atoms in both lists.
        std::vector<Atom> del;
        std::set_difference(g.del.begin(), g.del.end(), g.add.begin(), g.add.end(), std::back_inserter(del));
        g.del = std::move(del);
        out.push_back(std::move(g));
        return;
      }
      for (ObjectId o : *domains[depth]) {
        args[depth] = o;
        rec(depth + 1);
      }
    };
    rec(0);
  }
  return out;
}

bool applicable(const GroundState& s, const GroundAction& a) {
  for (const Atom& p : a.pre_pos) {
    if (!s.contains(p)) return false;
  }
  for (const Atom& p : a.pre_neg) {
    if (s.contains(p)) return false;
  }
  return true;
}

GroundState apply(const GroundState& s, const GroundAction& a) {
  if (!applicable(s, a)) throw NotApplicable("action is not applicable in the given state");
  std::vector<Atom> next;
  next.reserve(s.size() + a.add.size());
  std::set_difference(s.atoms().begin(), s.atoms().end(), a.del.begin(), a.del.end(), std::back_inserter(next));
  std::vector<Atom> merged;
  merged.reserve(next.size() + a.add.size());
  std::set_union(next.begin(), next.end(), a.add.begin(), a.add.end(), std::back_inserter(merged));
  return GroundState(std::move(merged));
}

bool holds_goal(const GroundState& s, std::span<const Atom> goal) {
  for (const Atom& g : goal) {
    if (!s.contains(g)) return false;
  }
  return true;
}

std::vector<const GroundAction*> applicable_actions(const GroundState& s, std::span<const GroundAction> actions) {
  std::vector<const GroundAction*> out;
  for (const auto& a : actions) {
    if (applicable(s, a)) out.push_back(&a);
  }
  return out;
}

PlanCheck validate_plan(const Instance& inst, const Plan& plan) {
  GroundState s = inst.init();
  for (std::size_t i = 0; i < plan.size(); ++i) {
    if (!applicable(s, plan[i])) return {false, i};
    s = apply(s, plan[i]);
  }
  if (!holds_goal(s, inst.goal())) return {false, plan.size()};
  return {true, std::nullopt};
}

bool bounded_goal_reachable(const Instance& inst, std::span<const GroundAction> actions,
                            const GroundState& s, std::size_t k, std::size_t budget) {
  if (holds_goal(s, inst.goal())) return true;
  if (k == 0) return false;
  std::unordered_set<GroundState, GroundStateHash> visited{s};
  std::vector<GroundState> frontier{s};
  for (std::size_t depth = 1; depth <= k && !frontier.empty(); ++depth) {
    std::vector<GroundState> next;
    for (const auto& state : frontier) {
      for (const auto& a : actions) {
        if (!applicable(state, a)) continue;
        GroundState succ = apply(state, a);
        if (holds_goal(succ, inst.goal())) return true;
        if (visited.insert(succ).second) {
          if (visited.size() > budget) {
            throw ResourceLimit("bounded reachability exceeded " + std::to_string(budget) + " states");
          }
          next.push_back(std::move(succ));
        }
      }
    }
    frontier = std::move(next);
  }
  return false;
}

bool bounded_goal_reachable(const Instance& inst, const GroundState& s, std::size_t k, std::size_t budget) {
  auto actions = ground_actions(inst);
  return bounded_goal_reachable(inst, actions, s, k, budget);
}

// ---------------------------------------------------------------------------
// Formatting

std::string format_atom(const Instance& inst, const Atom& atom) {
  std::string out = "(" + inst.domain().predicates[atom.predicate].name;
  for (ObjectId o : atom.arguments()) out += " " + inst.object_name(o);
  return out + ")";
}

std::string format_action(const Instance& inst, const GroundAction& a) {
  std::string out = "(" + inst.domain().actions[a.schema].name;
  for (ObjectId o : a.args) out += " " + inst.object_name(o);
  return out + ")";
}

std::string format_state(const Instance& inst, const GroundState& s) {
  std::string out = "{";
  for (std::size_t i = 0; i < s.atoms().size(); ++i) {
    if (i) out += ", ";
    out += format_atom(inst, s.atoms()[i]);
  }
  return out + "}";
}

const GroundAction* find_ground_action(std::span<const GroundAction> actions, const Instance& inst,
                                       std::string_view text) {
  auto node = sexpr::parse_one(text, "<action>");
  if (!node.is_list || node.size() == 0) return nullptr;
  for (const auto& a : actions) {
    const auto& schema = inst.domain().actions[a.schema];
    if (schema.name != node[0].symbol || a.args.size() != node.size() - 1) continue;
    bool match = true;
    for (std::size_t i = 0; i < a.args.size() && match; ++i) {
      match = inst.object_name(a.args[i]) == node[i + 1].symbol;
    }
    if (match) return &a;
  }
  return nullptr;
}

}  // namespace absforge::pddl
