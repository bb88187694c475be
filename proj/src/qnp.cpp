#include "absforge/qnp.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

#include "absforge/error.hpp"

namespace absforge::qnp {

namespace {

std::uint32_t bit(std::size_t i) { return std::uint32_t{1} << i; }

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

void check_consistent(const std::vector<Literal>& lits, const std::string& what) {
  for (std::size_t i = 0; i < lits.size(); ++i) {
    for (std::size_t j = i + 1; j < lits.size(); ++j) {
      if (lits[i].kind == lits[j].kind && lits[i].var == lits[j].var && lits[i].positive != lits[j].positive) {
        throw QnpError(what + " is inconsistent");
      }
    }
  }
}

}  // namespace

Action make_action(std::string name, std::vector<Literal> pre, std::vector<Literal> bool_eff,
                   std::vector<NumEffect> num_eff) {
  Action a{std::move(name), std::move(pre), std::move(bool_eff), std::move(num_eff)};
  check_consistent(a.pre, "precondition of " + a.name);
  check_consistent(a.bool_eff, "effects of " + a.name);
  for (const auto& e : a.bool_eff) {
    if (e.kind != VarKind::Bool) throw QnpError("action " + a.name + " has a numerical literal among its boolean effects");
  }
  for (std::size_t i = 0; i < a.num_eff.size(); ++i) {
    for (std::size_t j = i + 1; j < a.num_eff.size(); ++j) {
      if (a.num_eff[i].var == a.num_eff[j].var) {
        throw QnpError("action " + a.name + " has more than one effect on the same numerical variable");
      }
    }
    if (!a.num_eff[i].increase) {
      Literal needed{VarKind::Num, a.num_eff[i].var, true};
      if (std::find(a.pre.begin(), a.pre.end(), needed) == a.pre.end()) {
        throw QnpError("action " + a.name + " decrements a variable without the precondition that it is >0");
      }
    }
  }
  return a;
}

bool QState::holds(const Literal& l) const {
  std::uint32_t mask = l.kind == VarKind::Bool ? bools : nums;
  return ((mask & bit(l.var)) != 0) == l.positive;
}

void QState::set(const Literal& l) {
  std::uint32_t& mask = l.kind == VarKind::Bool ? bools : nums;
  if (l.positive) {
    mask |= bit(l.var);
  } else {
    mask &= ~bit(l.var);
  }
}

Problem::Problem(std::vector<std::string> bools, std::vector<std::string> nums, std::vector<Action> actions,
                 std::vector<Literal> init, std::vector<Literal> goal)
    : bools_(std::move(bools)),
      nums_(std::move(nums)),
      actions_(std::move(actions)),
      init_(std::move(init)),
      goal_(std::move(goal)) {
  if (bools_.size() > kMaxVariables || nums_.size() > kMaxVariables) {
    throw QnpError("at most " + std::to_string(kMaxVariables) + " boolean and numerical variables are supported");
  }
  std::set<std::string> names;
  for (const auto& n : bools_) {
    if (!names.insert(n).second) throw QnpError("variable " + n + " declared twice");
  }
  for (const auto& n : nums_) {
    if (!names.insert(n).second) throw QnpError("variable " + n + " declared twice");
  }
  auto check_lit = [&](const Literal& l, const std::string& where) {
    std::size_t limit = l.kind == VarKind::Bool ? bools_.size() : nums_.size();
    if (l.var >= limit) throw QnpError(where + " references an undeclared variable");
  };
  std::set<std::string> action_names;
  for (auto& a : actions_) {
    if (!action_names.insert(a.name).second) throw QnpError("action " + a.name + " declared twice");
    for (const auto& l : a.pre) check_lit(l, "precondition of " + a.name);
    for (const auto& l : a.bool_eff) check_lit(l, "effect of " + a.name);
    for (const auto& e : a.num_eff) {
      if (e.var >= nums_.size()) throw QnpError("effect of " + a.name + " references an undeclared variable");
    }
    a = make_action(a.name, a.pre, a.bool_eff, a.num_eff);
  }
  for (const auto& l : init_) check_lit(l, "initial condition");
  for (const auto& l : goal_) check_lit(l, "goal condition");
  check_consistent(init_, "initial condition");
  check_consistent(goal_, "goal condition");
}

std::optional<std::size_t> Problem::find_bool(std::string_view name) const {
  for (std::size_t i = 0; i < bools_.size(); ++i) {
    if (bools_[i] == name) return i;
  }
  return std::nullopt;
}

std::optional<std::size_t> Problem::find_num(std::string_view name) const {
  for (std::size_t i = 0; i < nums_.size(); ++i) {
    if (nums_[i] == name) return i;
  }
  return std::nullopt;
}

std::optional<std::size_t> Problem::find_action(std::string_view name) const {
  for (std::size_t i = 0; i < actions_.size(); ++i) {
    if (actions_[i].name == name) return i;
  }
  return std::nullopt;
}

Literal Problem::parse_literal(std::string_view text) const {
  std::string t = trim(text);
  if (t.size() > 2 && (t.ends_with(">0") || t.ends_with("=0"))) {
    std::string name = trim(std::string_view(t).substr(0, t.size() - 2));
    auto idx = find_num(name);
    if (!idx) throw QnpError("unknown numerical variable '" + name + "'");
    return {VarKind::Num, *idx, t.ends_with(">0")};
  }
  bool positive = true;
  if (!t.empty() && (t.front() == '!' || t.front() == '~')) {
    positive = false;
    t = trim(std::string_view(t).substr(1));
  }
  auto idx = find_bool(t);
  if (!idx) throw QnpError("unknown boolean variable '" + t + "'");
  return {VarKind::Bool, *idx, positive};
}

std::string Problem::format(const Literal& l) const {
  if (l.kind == VarKind::Num) return nums_.at(l.var) + (l.positive ? ">0" : "=0");
  return (l.positive ? "" : "!") + bools_.at(l.var);
}

std::string Problem::format(const NumEffect& e) const {
  return std::string(e.increase ? "inc(" : "dec(") + nums_.at(e.var) + ")";
}

std::string Problem::format(const QState& s) const {
  std::string out;
  for (std::size_t j = 0; j < nums_.size(); ++j) {
    if (!out.empty()) out += ' ';
    out += format(Literal{VarKind::Num, j, (s.nums & bit(j)) != 0});
  }
  for (std::size_t i = 0; i < bools_.size(); ++i) {
    if (!out.empty()) out += ' ';
    out += format(Literal{VarKind::Bool, i, (s.bools & bit(i)) != 0});
  }
  return out;
}

std::optional<std::size_t> Policy::lookup(const QState& s) const {
  auto it = rules.find(s);
  if (it == rules.end()) return std::nullopt;
  return it->second;
}

bool satisfies(const QState& s, std::span<const Literal> literals) {
  return std::all_of(literals.begin(), literals.end(), [&](const Literal& l) { return s.holds(l); });
}

bool applicable_q(const QState& s, const Action& a) { return satisfies(s, a.pre); }

std::vector<QState> successors_q(const QState& s, const Action& a) {
  if (!applicable_q(s, a)) throw NotApplicableQ("action " + a.name + " is not applicable");
  QState base = s;
  for (const auto& l : a.bool_eff) base.set(l);
  std::vector<std::size_t> decs;
  for (const auto& e : a.num_eff) {
    if (e.increase) {
      base.nums |= bit(e.var);
    } else {
      decs.push_back(e.var);
    }
  }
  std::vector<QState> out;
  out.reserve(std::size_t{1} << decs.size());
  for (std::size_t mask = 0; mask < (std::size_t{1} << decs.size()); ++mask) {
    QState next = base;
    for (std::size_t i = 0; i < decs.size(); ++i) {
      // bit set → the decrement reached zero
      if (mask & (std::size_t{1} << i)) {
        next.nums &= ~bit(decs[i]);
      } else {
        next.nums |= bit(decs[i]);
      }
    }
    out.push_back(next);
  }
  return out;
}

std::vector<QState> initial_qstates(const Problem& p) {
  std::uint32_t fixed_b = 0, value_b = 0, fixed_n = 0, value_n = 0;
  for (const auto& l : p.init()) {
    auto& fixed = l.kind == VarKind::Bool ? fixed_b : fixed_n;
    auto& value = l.kind == VarKind::Bool ? value_b : value_n;
    fixed |= bit(l.var);
    if (l.positive) value |= bit(l.var);
  }
  std::vector<std::size_t> free_vars;  // < bools.size() → bool, else num
  for (std::size_t i = 0; i < p.bools().size(); ++i) {
    if (!(fixed_b & bit(i))) free_vars.push_back(i);
  }
  for (std::size_t j = 0; j < p.nums().size(); ++j) {
    if (!(fixed_n & bit(j))) free_vars.push_back(p.bools().size() + j);
  }
  std::vector<QState> out;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << free_vars.size()); ++mask) {
    QState s{value_b, value_n};
    for (std::size_t k = 0; k < free_vars.size(); ++k) {
      if (!(mask & (std::uint64_t{1} << k))) continue;
      std::size_t v = free_vars[k];
      if (v < p.bools().size()) {
        s.bools |= bit(v);
      } else {
        s.nums |= bit(v - p.bools().size());
      }
    }
    out.push_back(s);
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool is_goal_q(const QState& s, const Problem& p) { return satisfies(s, p.goal()); }

// ---------------------------------------------------------------------------
// Text format

namespace {

struct Line {
  int number = 0;
  std::vector<std::pair<std::string, int>> tokens;  // token, column
};

std::vector<Line> tokenize(std::string_view text) {
  std::vector<Line> lines;
  int number = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view raw = text.substr(pos, end - pos);
    ++number;
    if (auto c = raw.find(';'); c != std::string_view::npos) raw = raw.substr(0, c);
    Line line{number, {}};
    std::size_t i = 0;
    while (i < raw.size()) {
      while (i < raw.size() && (std::isspace(static_cast<unsigned char>(raw[i])) || raw[i] == ',')) ++i;
      std::size_t start = i;
      while (i < raw.size() && !std::isspace(static_cast<unsigned char>(raw[i])) && raw[i] != ',') ++i;
      if (i > start) line.tokens.emplace_back(std::string(raw.substr(start, i - start)), static_cast<int>(start) + 1);
    }
    if (!line.tokens.empty()) lines.push_back(std::move(line));
    if (end == text.size()) break;
    pos = end + 1;
  }
  return lines;
}

}  // namespace

Problem parse_qnp(std::string_view text, std::string_view file) {
  const std::string fname(file);
  auto lines = tokenize(text);
  auto fail = [&](int line, int col, const std::string& msg) -> ParseError {
    return ParseError(ParseErrorKind::Syntax, fname, line, col, msg);
  };
  auto expect_keyword = [&](std::size_t idx, const char* kw) -> const Line& {
    if (idx >= lines.size()) {
      int last = lines.empty() ? 1 : lines.back().number + 1;
      throw fail(last, 1, std::string("expected '") + kw + "' line");
    }
    const Line& l = lines[idx];
    if (l.tokens.front().first != kw) throw fail(l.number, 1, std::string("expected '") + kw + "'");
    return l;
  };

  std::vector<std::string> bools, nums;
  const Line& vars = expect_keyword(0, "vars");
  for (std::size_t i = 1; i < vars.tokens.size(); ++i) {
    const auto& [tok, col] = vars.tokens[i];
    if (tok.starts_with("bool:") && tok.size() > 5) {
      bools.push_back(tok.substr(5));
    } else if (tok.starts_with("num:") && tok.size() > 4) {
      nums.push_back(tok.substr(4));
    } else {
      throw fail(vars.number, col, "expected bool:NAME or num:NAME, got '" + tok + "'");
    }
  }
  // A skeleton problem resolves literal names while the actions are read.
  Problem names;
  try {
    names = Problem(bools, nums, {}, {}, {});
  } catch (const QnpError& e) {
    throw fail(vars.number, 1, e.what());
  }
  auto literals = [&](const Line& l) {
    std::vector<Literal> out;
    for (std::size_t i = 1; i < l.tokens.size(); ++i) {
      try {
        out.push_back(names.parse_literal(l.tokens[i].first));
      } catch (const QnpError& e) {
        throw fail(l.number, l.tokens[i].second, e.what());
      }
    }
    return out;
  };
  auto init = literals(expect_keyword(1, "init"));
  auto goal = literals(expect_keyword(2, "goal"));

  std::vector<Action> actions;
  std::size_t idx = 3;
  while (idx < lines.size()) {
    const Line& head = expect_keyword(idx, "action");
    if (head.tokens.size() != 2) throw fail(head.number, 1, "expected 'action NAME'");
    std::string name = head.tokens[1].first;
    auto pre = literals(expect_keyword(idx + 1, "pre"));
    const Line& eff = expect_keyword(idx + 2, "eff");
    std::vector<Literal> bool_eff;
    std::vector<NumEffect> num_eff;
    for (std::size_t i = 1; i < eff.tokens.size(); ++i) {
      const auto& [tok, col] = eff.tokens[i];
      if ((tok.starts_with("inc(") || tok.starts_with("dec(")) && tok.ends_with(")")) {
        std::string var = tok.substr(4, tok.size() - 5);
        auto v = names.find_num(var);
        if (!v) throw fail(eff.number, col, "unknown numerical variable '" + var + "'");
        num_eff.push_back({*v, tok.starts_with("inc(")});
        continue;
      }
      try {
        bool_eff.push_back(names.parse_literal(tok));
      } catch (const QnpError& e) {
        throw fail(eff.number, col, e.what());
      }
    }
    idx += 3;
    if (idx < lines.size() && lines[idx].tokens.front().first == "end") ++idx;
    try {
      actions.push_back(make_action(name, pre, bool_eff, num_eff));
    } catch (const QnpError& e) {
      throw fail(head.number, 1, e.what());
    }
  }
  try {
    return Problem(bools, nums, std::move(actions), std::move(init), std::move(goal));
  } catch (const QnpError& e) {
    throw fail(1, 1, e.what());
  }
}

std::string write_qnp(const Problem& p) {
  std::ostringstream out;
  out << "vars";
  for (const auto& b : p.bools()) out << " bool:" << b;
  for (const auto& n : p.nums()) out << " num:" << n;
  out << "\ninit";
  for (const auto& l : p.init()) out << ' ' << p.format(l);
  out << "\ngoal";
  for (const auto& l : p.goal()) out << ' ' << p.format(l);
  out << '\n';
  for (const auto& a : p.actions()) {
    out << "action " << a.name << "\npre";
    for (const auto& l : a.pre) out << ' ' << p.format(l);
    out << "\neff";
    for (const auto& l : a.bool_eff) out << ' ' << p.format(l);
    for (const auto& e : a.num_eff) out << ' ' << p.format(e);
    out << "\nend\n";
  }
  return out.str();
}

std::string format_policy(const Policy& pi, const Problem& p) {
  std::string out;
  for (const auto& [state, action] : pi.rules) {
    out += p.format(state) + " => " + p.actions().at(action).name + "\n";
  }
  return out;
}

}  // namespace absforge::qnp
