#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace absforge::qnp {

/// Upper bound on |B| and on |X|; qstates pack each into a 32-bit mask.
inline constexpr std::size_t kMaxVariables = 32;

enum class VarKind { Bool, Num };

/// `p` / `!p` for booleans, `x>0` / `x=0` for numerical variables
/// (`positive` selects `p` or `x>0`).
struct Literal {
  VarKind kind = VarKind::Bool;
  std::size_t var = 0;
  bool positive = true;

  friend bool operator==(const Literal&, const Literal&) = default;
  friend auto operator<=>(const Literal&, const Literal&) = default;
};

struct NumEffect {
  std::size_t var = 0;
  bool increase = true;

  friend bool operator==(const NumEffect&, const NumEffect&) = default;
};

/// Violated structural rule of a QNP action or problem.
class QnpError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Action {
  std::string name;
  std::vector<Literal> pre;
  std::vector<Literal> bool_eff;  // boolean literals only
  std::vector<NumEffect> num_eff;
};

/// Builds an action and enforces its invariants: every dec(v) comes with the
/// precondition v>0, no variable is both increased and decreased, and the
/// precondition and boolean effects are consistent. Throws QnpError.
Action make_action(std::string name, std::vector<Literal> pre, std::vector<Literal> bool_eff,
                   std::vector<NumEffect> num_eff);

/// Total assignment: bit i of `bools` is the value of boolean i, bit j of
/// `nums` is set iff numerical variable j is >0.
struct QState {
  std::uint32_t bools = 0;
  std::uint32_t nums = 0;

  bool holds(const Literal& l) const;
  void set(const Literal& l);

  friend bool operator==(const QState&, const QState&) = default;
  friend auto operator<=>(const QState&, const QState&) = default;
};

class Problem {
 public:
  Problem() = default;
  /// Validates names, literal references, consistency of init/goal and every
  /// action invariant. Throws QnpError.
  Problem(std::vector<std::string> bools, std::vector<std::string> nums, std::vector<Action> actions,
          std::vector<Literal> init, std::vector<Literal> goal);

  const std::vector<std::string>& bools() const { return bools_; }
  const std::vector<std::string>& nums() const { return nums_; }
  const std::vector<Action>& actions() const { return actions_; }
  const std::vector<Literal>& init() const { return init_; }
  const std::vector<Literal>& goal() const { return goal_; }

  std::optional<std::size_t> find_bool(std::string_view name) const;
  std::optional<std::size_t> find_num(std::string_view name) const;
  std::optional<std::size_t> find_action(std::string_view name) const;

  /// Parses `p`, `!p`, `x>0`, `x=0`. Throws QnpError on unknown names.
  Literal parse_literal(std::string_view text) const;
  std::string format(const Literal& l) const;
  std::string format(const NumEffect& e) const;
  /// Numerical literals first, then booleans, each in declaration order.
  std::string format(const QState& s) const;

 private:
  std::vector<std::string> bools_;
  std::vector<std::string> nums_;
  std::vector<Action> actions_;
  std::vector<Literal> init_;
  std::vector<Literal> goal_;
};

/// Partial map from qstates to action indices of the owning problem.
struct Policy {
  std::map<QState, std::size_t> rules;

  std::optional<std::size_t> lookup(const QState& s) const;
  friend bool operator==(const Policy&, const Policy&) = default;
};

class NotApplicableQ : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

bool satisfies(const QState& s, std::span<const Literal> literals);

bool applicable_q(const QState& s, const Action& a);

/// Boolean effects overwrite, inc(v) forces v>0, dec(v) branches into v>0 and
/// v=0. Returns 2^(#dec) states in a fixed order. Throws NotApplicableQ.
std::vector<QState> successors_q(const QState& s, const Action& a);

/// Every total qstate consistent with the init literals, in ascending order.
std::vector<QState> initial_qstates(const Problem& p);

bool is_goal_q(const QState& s, const Problem& p);

/// Plain-text listing (see docs/qnp-format.md). Throws ParseError.
Problem parse_qnp(std::string_view text, std::string_view file = "problem.qnp");
std::string write_qnp(const Problem& p);

/// One `qstate => action` line per rule, ordered by qstate.
std::string format_policy(const Policy& pi, const Problem& p);

}  // namespace absforge::qnp
